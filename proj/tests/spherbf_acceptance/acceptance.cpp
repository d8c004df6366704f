#include "spherbf_acceptance/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spherbf/analysis.hpp"
#include "spherbf/experiment.hpp"
#include "spherbf/minres.hpp"

namespace spherbf::acceptance {
namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Reporter {
 public:
  explicit Reporter(std::ostream& os) : os_(os) {}

  bool criterion(int id, bool pass, const std::string& detail) {
    os_ << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << " - " << detail << "\n";
    os_.flush();
    all_pass_ = all_pass_ && pass;
    return pass;
  }

  bool all_pass() const { return all_pass_; }

 private:
  std::ostream& os_;
  bool all_pass_ = true;
};

struct SolveRecord {
  std::string label;
  double interp_inf = 0;
  double side_inf = 0;
  double rhs_inf = 0;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// Criterion 1: exact block preconditioner has exactly the three eigenvalue
// clusters 1, (1 +- sqrt(5))/2, and MINRES with it converges in <= 4
// iterations at a 1e-10 residual reduction.
void criterion_1(Reporter& rep, std::vector<SolveRecord>& solves) {
  Timer timer;
  const auto points = generate_equal_area<double>(60);
  const auto kernel = ZonalKernel<double>::wendland(WendlandOrder{1});
  const HarmonicBasis basis(1);
  const auto sys = build_saddle_system(points, kernel, basis,
                                       [](const Vector3<double>& p) { return paper_field(p); });

  const auto clusters = exact_precond_spectrum(sys);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const double targets[3] = {1.0 - golden, 1.0, golden};
  bool spectrum_ok = clusters.size() == 3;
  double max_dev = 0;
  Index mult_sum = 0;
  if (spectrum_ok) {
    for (int i = 0; i < 3; ++i) {
      max_dev = std::max(max_dev, std::abs(clusters[i].value - targets[i]));
      mult_sum += clusters[i].multiplicity;
    }
    spectrum_ok = max_dev <= 1e-8 && mult_sum == sys.size();
  }

  const auto pc = BlockDiagPreconditioner<double>::exact_block(sys.A, exact_schur(sys.A, sys.Q));
  const auto [x, report] = minres_solve<double>(
      [&](const Vector<double>& v) { return apply_saddle(sys, v); },
      [&](const Vector<double>& v) { return pc.apply(v); }, sys.rhs, 1e-10, 50);
  const Vector<double> res = sys.rhs - apply_saddle(sys, x);
  solves.push_back({"criterion1 N=60", res.head(sys.n()).lpNorm<Eigen::Infinity>(),
                    res.tail(sys.m()).lpNorm<Eigen::Infinity>(),
                    sys.rhs.head(sys.n()).lpNorm<Eigen::Infinity>()});

  const double secs = timer.seconds();
  const bool pass = spectrum_ok && report.converged && report.iterations <= 4 && secs < 5.0;
  rep.criterion(1, pass,
                std::to_string(clusters.size()) + " clusters, max deviation " + fmt(max_dev) +
                    ", MINRES " + std::to_string(report.iterations) + " iters, " + fmt(secs) + " s");
}

// Criterion 2: every generalized eigenvalue of (S, Lambda_L) lies in
// (0, 1 + 1e-8] over the full (m, N, L) grid.
void criterion_2(Reporter& rep) {
  Timer timer;
  ExperimentConfig small;
  small.m_list = {0, 1, 2};
  small.n_list = {500};
  small.l_list = {0, 5, 10};
  small.n_cap = 0;
  ExperimentConfig big = small;
  big.n_list = {2000, 4000};
  big.n_cap = 1000;

  auto rows = run_spectrum(small);
  const auto more = run_spectrum(big);
  rows.insert(rows.end(), more.begin(), more.end());

  bool pass = true;
  double worst_upper = -1, worst_lower = 2;
  for (const auto& r : rows) {
    pass = pass && r.lambda_min > 0 && r.lambda_max <= 1.0 + 1e-8;
    worst_upper = std::max(worst_upper, r.lambda_max - 1.0);
    worst_lower = std::min(worst_lower, r.lambda_min);
  }
  rep.criterion(2, pass,
                std::to_string(rows.size()) + " cells, max(lambda_max - 1) = " + fmt(worst_upper) +
                    ", min lambda_min = " + fmt(worst_lower) + ", " + fmt(timer.seconds()) + " s");
}

// Criterion 3: Table-3 values at N = 4000 within the stated tolerances.
void criterion_3(Reporter& rep) {
  Timer timer;
  ExperimentConfig cfg;
  cfg.m_list = {0, 1};
  cfg.n_list = {4000};
  cfg.l_list = {5, 25};
  cfg.n_cap = 1000;
  const auto rows = run_spectrum(cfg);

  const auto find = [&](int m, int l) -> const SpectrumRow& {
    for (const auto& r : rows)
      if (r.cell.m == m && r.cell.l == l) return r;
    throw std::logic_error("criterion 3: missing cell");
  };
  const auto& m0l5 = find(0, 5);
  const auto& m0l25 = find(0, 25);
  const auto& m1l25 = find(1, 25);
  const bool pass = std::abs(m0l5.lambda_min - 0.9987) <= 0.02 &&
                    std::abs(m0l5.lambda_max - 0.99977) <= 0.005 &&
                    std::abs(m0l25.lambda_min - 0.835) <= 0.05 &&
                    std::abs(m1l25.lambda_min - 0.991) <= 0.02;
  rep.criterion(3, pass,
                "m0L5 (" + fmt(m0l5.lambda_min) + ", " + fmt(m0l5.lambda_max) + "), m0L25 min " +
                    fmt(m0l25.lambda_min) + ", m1L25 min " + fmt(m1l25.lambda_min) + ", " +
                    fmt(timer.seconds()) + " s");
}

// Criterion 4: at m = 0, L = 5 the unpreconditioned iteration counts are at
// least 5x the block-preconditioned ones, and the preconditioned counts are
// nearly constant from N = 2000 to N = 4000.
void criterion_4(Reporter& rep, std::vector<SolveRecord>& solves) {
  Timer timer;
  ExperimentConfig cfg;
  cfg.m_list = {0};
  cfg.n_list = {2000, 4000};
  cfg.l_list = {5};
  cfg.n_cap = 1000;
  cfg.rtol = 1e-9;

  cfg.precond = "none";
  const auto rows_un = run_solve(cfg);
  cfg.precond = "schwarz";
  cfg.schur = "lambda";
  const auto rows_bl = run_solve(cfg);

  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < rows_un.size(); ++i) {
    const auto& u = rows_un[i];
    const auto& b = rows_bl[i];
    pass = pass && u.converged && b.converged &&
           u.iterations >= 5 * std::max<Index>(b.iterations, 1);
    detail += "N=" + std::to_string(u.cell.n) + ": " + std::to_string(u.iterations) + " vs " +
              std::to_string(b.iterations) + "; ";
    solves.push_back({"criterion4 none N=" + std::to_string(u.cell.n), u.interp_residual_inf,
                      u.side_condition_inf, u.rhs_inf});
    solves.push_back({"criterion4 block N=" + std::to_string(b.cell.n), b.interp_residual_inf,
                      b.side_condition_inf, b.rhs_inf});
  }
  const double hi = static_cast<double>(std::max(rows_bl[0].iterations, rows_bl[1].iterations));
  const double lo = static_cast<double>(std::max<Index>(
      std::min(rows_bl[0].iterations, rows_bl[1].iterations), 1));
  pass = pass && hi / lo <= 1.6;
  rep.criterion(4, pass,
                detail + "preconditioned spread " + fmt((hi / lo - 1.0) * 100) + "%, " +
                    fmt(timer.seconds()) + " s");
}

// Criterion 5: the Figure-1 band for m = 1 and agreement of a_l with the
// independent adaptive-quadrature oracle.
void criterion_5(Reporter& rep) {
  Timer timer;
  const auto table = fourier_legendre_coeffs<double>(WendlandOrder{1}, 50);
  double band_min = std::numeric_limits<double>::max(), band_max = 0;
  bool positive = true;
  for (int l = 5; l <= 50; ++l) {
    const double v = std::pow(l + 1.0, 5.0) * table.a[l];
    positive = positive && v > 0;
    band_min = std::min(band_min, v);
    band_max = std::max(band_max, v);
  }
  double worst_rel = 0;
  for (int l = 0; l <= 20; ++l) {
    const double ref = oracles::coefficient_oracle(1, l);
    worst_rel = std::max(worst_rel, std::abs(table.a[l] / ref - 1.0));
  }
  const bool pass = positive && band_max / band_min < 20.0 && worst_rel <= 1e-10;
  rep.criterion(5, pass,
                "band ratio " + fmt(band_max / band_min) + ", worst oracle rel err " +
                    fmt(worst_rel) + ", " + fmt(timer.seconds()) + " s");
}

// Criterion 6: interpolation and side-condition residuals of every converged
// solve recorded by criteria 1 and 4.
void criterion_6(Reporter& rep, const std::vector<SolveRecord>& solves) {
  bool pass = !solves.empty();
  double worst = 0;
  for (const auto& s : solves) {
    const double bound = 1e-6 * s.rhs_inf;
    pass = pass && s.interp_inf <= bound && s.side_inf <= bound;
    worst = std::max(worst, std::max(s.interp_inf, s.side_inf) / s.rhs_inf);
  }
  rep.criterion(6, pass,
                std::to_string(solves.size()) + " solves, worst residual / ||f||_inf = " +
                    fmt(worst) + " (bound 1e-6)");
}

// Criterion 7: polynomial reproduction; interpolating f = Y_{2,1} with
// N = 400, L = 3 yields alpha = 0 and p = f.
void criterion_7(Reporter& rep) {
  Timer timer;
  const auto points = generate_equal_area<double>(400);
  const auto kernel = ZonalKernel<double>::wendland(WendlandOrder{1});
  const HarmonicBasis basis(3);
  const HarmonicIndex target{2, 1};
  const auto sys = build_saddle_system(
      points, kernel, basis,
      [&](const Vector3<double>& p) { return eval_harmonic(target, p); });
  const auto pc = BlockDiagPreconditioner<double>::exact_block(sys.A, exact_schur(sys.A, sys.Q));
  const auto [x, report] = minres_solve<double>(
      [&](const Vector<double>& v) { return apply_saddle(sys, v); },
      [&](const Vector<double>& v) { return pc.apply(v); }, sys.rhs, 1e-12, 100);
  const auto sol = split_solution(sys, x);

  const double alpha_inf = sol.alpha.lpNorm<Eigen::Infinity>();
  double worst_query = 0;
  for (const auto& q : oracles::random_unit_vectors(50, 20240817)) {
    const double err =
        std::abs(evaluate_interpolant(sol, points, kernel, basis, q) - eval_harmonic(target, q));
    worst_query = std::max(worst_query, err);
  }
  const bool pass = report.converged && alpha_inf <= 1e-8 && worst_query <= 1e-8;
  rep.criterion(7, pass,
                "||alpha||_inf = " + fmt(alpha_inf) + ", worst query err " + fmt(worst_query) +
                    ", " + fmt(timer.seconds()) + " s");
}

// Criterion 8: oracle equivalences for native_norm, apply_schwarz and the
// addition theorem.
void criterion_8(Reporter& rep) {
  Timer timer;
  const auto kernel = ZonalKernel<double>::wendland(WendlandOrder{1});

  const auto p50 = generate_equal_area<double>(50);
  const auto a50 = assemble_A(p50, kernel);
  const Vector<double> alpha = oracles::random_vector(50, 1234);
  const double direct = native_norm(alpha, a50);
  const double brute = oracles::native_norm_bruteforce(alpha, p50, kernel);
  const double norm_err = std::abs(direct - brute) / std::max(1.0, brute);

  const auto p200 = generate_equal_area<double>(200);
  const auto a200 = assemble_A(p200, kernel);
  const double nu = default_nu(200);
  auto schwarz = build_subdomains(p200, select_centers(p200, nu), default_mu(nu));
  schwarz.nu = nu;
  factorize_subdomains(schwarz, a200);
  const Matrix<double> dense = oracles::dense_schwarz_matrix(schwarz, a200);
  const Vector<double> r = oracles::random_vector(200, 4321);
  const Vector<double> ref = dense * r;
  const double schwarz_err =
      (apply_schwarz(schwarz, r) - ref).lpNorm<Eigen::Infinity>() /
      std::max(1.0, ref.lpNorm<Eigen::Infinity>());

  double addition_err = 0;
  const auto dirs = oracles::random_unit_vectors(40, 999);
  for (int i = 0; i + 1 < static_cast<int>(dirs.size()); i += 2) {
    const auto& x = dirs[static_cast<std::size_t>(i)];
    const auto& y = dirs[static_cast<std::size_t>(i + 1)];
    for (int l = 0; l <= 30; ++l) {
      const double lhs = addition_theorem_sum(l, x, y);
      const double rhs = (2.0 * l + 1.0) / (4.0 * pi_v<double>)*legendre_P(l, x.dot(y));
      addition_err = std::max(addition_err, std::abs(lhs - rhs));
    }
  }

  const bool pass = norm_err <= 1e-12 && schwarz_err <= 1e-11 && addition_err <= 1e-11;
  rep.criterion(8, pass,
                "native-norm err " + fmt(norm_err) + ", schwarz err " + fmt(schwarz_err) +
                    ", addition-theorem err " + fmt(addition_err) + ", " + fmt(timer.seconds()) +
                    " s");
}

}  // namespace

bool run_all(std::ostream& os) {
  Reporter rep(os);
  std::vector<SolveRecord> solves;
  criterion_1(rep, solves);
  criterion_2(rep);
  criterion_3(rep);
  criterion_4(rep, solves);
  criterion_5(rep);
  criterion_6(rep, solves);
  criterion_7(rep);
  criterion_8(rep);
  os << (rep.all_pass() ? "acceptance: all criteria passed\n"
                        : "acceptance: FAILURES present\n");
  return rep.all_pass();
}

}  // namespace spherbf::acceptance
