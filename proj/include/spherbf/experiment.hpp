#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "spherbf/analysis.hpp"
#include "spherbf/assembly.hpp"
#include "spherbf/geometry.hpp"
#include "spherbf/harmonics.hpp"
#include "spherbf/kernels.hpp"
#include "spherbf/minres.hpp"
#include "spherbf/precond.hpp"

namespace spherbf {

/// One experiment grid; every referenced value is validated by the owning
/// module when the cell runs.
struct ExperimentConfig {
  std::vector<int> m_list{0};
  std::vector<Index> n_list{2000};
  std::vector<int> l_list{5};
  double cap_radius = 0.1;
  Vector3<double> cap_axis = Vector3<double>(0, 0, 1);
  Index n_cap = 1000;
  std::string precond = "schwarz";  // none | schwarz | exact
  std::string schur = "lambda";     // lambda | exact
  std::string field = "paper-f";
  double rtol = 1e-9;
  Index max_iter = 0;  // 0 selects 5 (N + M)
  double nu = 0;       // 0 selects default_nu(N)
  double mu = 0;       // 0 selects default_mu(nu)
  std::string output_dir = ".";
  bool deterministic = true;  // zeroes reported wall times so reruns are byte-identical
  int jobs = 1;
  std::string points_file;    // optional: overrides generation (single-N grids only)
  std::string residual_log;   // optional: per-cell "iteration,residual" CSV base path
  std::string debug_dump;     // optional: directory for per-cell A, Q, Lambda CSV dumps

  void validate() const {
    for (int m : m_list) WendlandOrder{m};
    if (n_list.empty() || m_list.empty() || l_list.empty())
      throw std::invalid_argument("config: m, n and l lists must be nonempty");
    for (Index n : n_list)
      if (n < 2) throw std::invalid_argument("config: every n must be >= 2");
    for (int l : l_list)
      if (l < 0) throw std::invalid_argument("config: every l must be >= 0");
    if (precond != "none" && precond != "schwarz" && precond != "exact")
      throw std::invalid_argument("config: precond must be none, schwarz or exact");
    if (schur != "lambda" && schur != "exact")
      throw std::invalid_argument("config: schur must be lambda or exact");
    if (!(rtol > 0)) throw std::invalid_argument("config: rtol must be positive");
    if (n_cap < 0) throw std::invalid_argument("config: n_cap must be >= 0");
    if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
    if (!points_file.empty() && n_list.size() != 1)
      throw std::invalid_argument("config: a points file fixes N, use a single-entry n list");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
std::vector<T> parse_list(const std::string& value) {
  std::vector<T> out;
  std::istringstream is(value);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    if constexpr (std::is_same_v<T, int>)
      out.push_back(std::stoi(cell));
    else
      out.push_back(static_cast<T>(std::stoll(cell)));
  }
  return out;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean \"" + v + "\"");
}

}  // namespace detail

/// Flat "key = value" config format; '#' starts a comment. Unknown keys are
/// rejected so typos fail fast.
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  if (key == "m")
    cfg.m_list = detail::parse_list<int>(value);
  else if (key == "n")
    cfg.n_list = detail::parse_list<Index>(value);
  else if (key == "l")
    cfg.l_list = detail::parse_list<int>(value);
  else if (key == "cap_radius")
    cfg.cap_radius = std::stod(value);
  else if (key == "cap_axis") {
    std::istringstream is(value);
    if (!(is >> cfg.cap_axis.x() >> cfg.cap_axis.y() >> cfg.cap_axis.z()))
      throw std::invalid_argument("config: cap_axis needs three components");
    cfg.cap_axis.normalize();
  } else if (key == "n_cap")
    cfg.n_cap = static_cast<Index>(std::stoll(value));
  else if (key == "precond")
    cfg.precond = value;
  else if (key == "schur")
    cfg.schur = value;
  else if (key == "field")
    cfg.field = value;
  else if (key == "rtol")
    cfg.rtol = std::stod(value);
  else if (key == "max_iter")
    cfg.max_iter = static_cast<Index>(std::stoll(value));
  else if (key == "nu")
    cfg.nu = std::stod(value);
  else if (key == "mu")
    cfg.mu = std::stod(value);
  else if (key == "output_dir")
    cfg.output_dir = value;
  else if (key == "deterministic")
    cfg.deterministic = detail::parse_bool(value);
  else if (key == "jobs")
    cfg.jobs = std::stoi(value);
  else if (key == "points")
    cfg.points_file = value;
  else if (key == "residual_log")
    cfg.residual_log = value;
  else if (key == "debug_dump")
    cfg.debug_dump = value;
  else
    throw std::invalid_argument("config: unknown key \"" + key + "\"");
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) + " is not key = value");
    apply_config_entry(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

struct CellId {
  int m = 0;
  Index n = 0;
  int l = 0;

  friend bool operator<(const CellId& a, const CellId& b) {
    return std::tie(a.m, a.n, a.l) < std::tie(b.m, b.n, b.l);
  }
};

inline std::vector<CellId> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<CellId> cells;
  for (int m : cfg.m_list)
    for (Index n : cfg.n_list)
      for (int l : cfg.l_list) cells.push_back({m, n, l});
  return cells;
}

/// Point layout for one grid cell: the experiment layout when a cap is
/// requested, a plain equal-area set when n_cap = 0.
inline PointSet<double> cell_points(const ExperimentConfig& cfg, Index n) {
  if (!cfg.points_file.empty()) {
    PointSet<double> p = read_points<double>(cfg.points_file);
    if (p.n() != n)
      throw std::runtime_error("config: points file has " + std::to_string(p.n()) +
                               " points, cell expects " + std::to_string(n));
    return p;
  }
  if (cfg.n_cap == 0) return generate_equal_area<double>(n);
  const CapSpec<double> cap{cfg.cap_axis, cfg.cap_radius};
  return generate_experiment_set<double>(n, cap, cfg.n_cap);
}

struct SolveRow {
  CellId cell;
  std::string precond_label;
  Index iterations = 0;
  bool converged = false;
  double residual = 0;  // final relative preconditioned residual
  double walltime_s = 0;
  double interp_residual_inf = 0;
  double side_condition_inf = 0;
  double rhs_inf = 0;  // ||f_X||_inf, kept for invariant checks, not a CSV column
};

namespace detail {

// Debug artifacts: the dense A block (small N only), Q, and the Lambda
// diagonal, one CSV per object.
inline void dump_cell_matrices(const ExperimentConfig& cfg, const CellId& cell,
                               const SaddleSystem<double>& sys,
                               const DiagonalSchur<double>& lambda) {
  const std::string base = cfg.debug_dump + "/debug-m" + std::to_string(cell.m) + "-n" +
                           std::to_string(cell.n) + "-l" + std::to_string(cell.l);
  const auto open = [](const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("debug dump: cannot open " + path);
    os << std::setprecision(17);
    return os;
  };
  if (sys.n() <= 1000) {
    auto os = open(base + "-A.csv");
    for (Index i = 0; i < sys.n(); ++i) {
      for (Index j = 0; j < sys.n(); ++j) os << (j ? "," : "") << sys.A.matrix(i, j);
      os << '\n';
    }
  } else {
    std::cerr << "spherbf: debug dump skips A at N = " << sys.n() << " (dense dump capped at 1000)\n";
  }
  {
    auto os = open(base + "-Q.csv");
    for (Index i = 0; i < sys.n(); ++i) {
      for (Index j = 0; j < sys.m(); ++j) os << (j ? "," : "") << sys.Q(i, j);
      os << '\n';
    }
  }
  {
    auto os = open(base + "-lambda.csv");
    for (Index i = 0; i < lambda.size(); ++i) os << lambda.diag[i] << '\n';
  }
}

}  // namespace detail

inline SolveRow run_solve_cell(const ExperimentConfig& cfg, const CellId& cell,
                               const PointSet<double>& points) {
  const auto kernel = ZonalKernel<double>::wendland(WendlandOrder{cell.m});
  const HarmonicBasis basis(cell.l);
  const auto sys = build_saddle_system(points, kernel, basis, field_by_name<double>(cfg.field));
  const auto coeffs = fourier_legendre_coeffs<double>(kernel.order, cell.l);
  const auto lambda = assemble_Lambda(coeffs, cell.l);
  if (!cfg.debug_dump.empty()) detail::dump_cell_matrices(cfg, cell, sys, lambda);

  BlockDiagPreconditioner<double> pc = BlockDiagPreconditioner<double>::identity(sys.n(), sys.m());
  std::string label = "none";
  if (cfg.precond != "none") {
    const double nu = cfg.nu > 0 ? cfg.nu : default_nu(sys.n());
    const double mu = cfg.mu > 0 ? cfg.mu : default_mu(nu);
    if (cfg.precond == "schwarz") {
      auto schwarz = build_subdomains(points, select_centers(points, nu), mu);
      schwarz.nu = nu;
      factorize_subdomains(schwarz, sys.A);
      pc = cfg.schur == "lambda"
               ? BlockDiagPreconditioner<double>::schwarz_lambda(std::move(schwarz), lambda)
               : BlockDiagPreconditioner<double>::schwarz_exact(std::move(schwarz),
                                                                exact_schur(sys.A, sys.Q));
    } else {
      pc = cfg.schur == "lambda"
               ? BlockDiagPreconditioner<double>::exact_lambda(sys.A, lambda)
               : BlockDiagPreconditioner<double>::exact_block(sys.A, exact_schur(sys.A, sys.Q));
    }
    label = cfg.precond + "+" + cfg.schur;
  }

  const Index max_iter = cfg.max_iter > 0 ? cfg.max_iter : 5 * sys.size();
  auto [x, report] = minres_solve<double>(
      [&](const Vector<double>& v) { return apply_saddle(sys, v); },
      [&](const Vector<double>& v) { return pc.apply(v); }, sys.rhs, cfg.rtol, max_iter);

  if (!cfg.residual_log.empty()) {
    std::string path = cfg.residual_log;
    const std::string tag = "-m" + std::to_string(cell.m) + "-n" + std::to_string(cell.n) + "-l" +
                            std::to_string(cell.l);
    const auto dot = path.find_last_of('.');
    path.insert(dot == std::string::npos ? path.size() : dot, tag);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("residual log: cannot open " + path);
    os << "iteration,residual\n" << std::setprecision(17);
    for (std::size_t i = 0; i < report.residual_history.size(); ++i)
      os << i << ',' << report.residual_history[i] << '\n';
  }

  const Vector<double> true_residual = sys.rhs - apply_saddle(sys, x);
  SolveRow row;
  row.cell = cell;
  row.precond_label = label;
  row.iterations = report.iterations;
  row.converged = report.converged;
  row.residual = report.residual_history.front() > 0
                     ? report.residual_history.back() / report.residual_history.front()
                     : 0.0;
  row.walltime_s = cfg.deterministic ? 0.0 : report.wall_time_s;
  row.interp_residual_inf = true_residual.head(sys.n()).template lpNorm<Eigen::Infinity>();
  row.side_condition_inf = true_residual.tail(sys.m()).template lpNorm<Eigen::Infinity>();
  row.rhs_inf = sys.rhs.head(sys.n()).template lpNorm<Eigen::Infinity>();
  return row;
}

/// Runs every (m, N, L) cell of the grid; cells are independent and run on
/// cfg.jobs threads, results are sorted by (m, N, L) before being returned.
inline std::vector<SolveRow> run_solve(const ExperimentConfig& cfg) {
  cfg.validate();
  for (Index n : cfg.n_list)
    if (n > 8000) throw std::invalid_argument("solve: dense desk-scale path limited to N <= 8000");
  const std::vector<CellId> cells = enumerate_cells(cfg);
  std::map<Index, PointSet<double>> points;
  for (const auto& c : cells)
    if (!points.count(c.n)) points.emplace(c.n, cell_points(cfg, c.n));

  std::vector<SolveRow> rows(cells.size());
  std::exception_ptr error;
  std::mutex mtx;
  std::size_t next = 0;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mtx);
        if (error || next >= cells.size()) return;
        i = next++;
      }
      try {
        rows[i] = run_solve_cell(cfg, cells[i], points.at(cells[i].n));
      } catch (...) {
        std::lock_guard lock(mtx);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (cfg.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  std::sort(rows.begin(), rows.end(),
            [](const SolveRow& a, const SolveRow& b) { return a.cell < b.cell; });
  return rows;
}

inline void write_solve_csv(std::ostream& os, const std::vector<SolveRow>& rows) {
  os << "m,N,L,precond,iterations,converged,residual,walltime_s,interp_residual_inf,"
        "side_condition_inf\n"
     << std::setprecision(17);
  for (const auto& r : rows)
    os << r.cell.m << ',' << r.cell.n << ',' << r.cell.l << ',' << r.precond_label << ','
       << r.iterations << ',' << (r.converged ? "true" : "false") << ',' << r.residual << ','
       << r.walltime_s << ',' << r.interp_residual_inf << ',' << r.side_condition_inf << '\n';
}

struct SpectrumRow {
  CellId cell;
  double lambda_min = 0;
  double lambda_max = 0;
  double infsup = 0;
  bool bounds_ok = false;
};

/// Runs the generalized-eigenvalue cells. Cells sharing (m, N) reuse one
/// factorization and one Schur complement at the largest requested L, whose
/// leading blocks give the smaller degrees. Full spectra are optionally
/// written as "index,eigenvalue" CSV files under cfg.output_dir.
inline std::vector<SpectrumRow> run_spectrum(const ExperimentConfig& cfg, bool write_full = false) {
  cfg.validate();
  for (Index n : cfg.n_list)
    if (n > 8000) throw std::invalid_argument("spectrum: dense exact Schur limited to N <= 8000");

  std::vector<SpectrumRow> rows;
  for (int m : cfg.m_list) {
    const auto kernel = ZonalKernel<double>::wendland(WendlandOrder{m});
    const int l_max = *std::max_element(cfg.l_list.begin(), cfg.l_list.end());
    const auto coeffs = fourier_legendre_coeffs<double>(kernel.order, l_max);
    for (Index n : cfg.n_list) {
      const PointSet<double> points = cell_points(cfg, n);
      const auto a = assemble_A(points, kernel);
      const auto llt = factorize(a);
      const Matrix<double> q = eval_matrix(points, HarmonicBasis(l_max));
      const Matrix<double> s_full = exact_schur(llt, q);
      for (int l : cfg.l_list) {
        const Index msize = dimension(l);
        const Matrix<double> s = s_full.topLeftCorner(msize, msize);
        const auto report = schur_spectrum(s, assemble_Lambda(coeffs, l));
        SpectrumRow row;
        row.cell = {m, n, l};
        row.lambda_min = report.lambda_min;
        row.lambda_max = report.lambda_max;
        row.infsup = report.infsup_estimate;
        row.bounds_ok = report.within_schur_bounds();
        rows.push_back(row);
        if (write_full) {
          const std::string path = cfg.output_dir + "/spectrum-m" + std::to_string(m) + "-n" +
                                   std::to_string(n) + "-l" + std::to_string(l) + ".csv";
          std::ofstream os(path);
          if (!os) throw std::runtime_error("spectrum: cannot open " + path);
          os << "index,eigenvalue\n" << std::setprecision(17);
          for (Index i = 0; i < report.eigenvalues.size(); ++i)
            os << i << ',' << report.eigenvalues[i] << '\n';
        }
      }
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const SpectrumRow& a, const SpectrumRow& b) { return a.cell < b.cell; });
  return rows;
}

inline void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
  os << "m,N,L,lambda_min,lambda_max,infsup_estimate\n" << std::setprecision(17);
  for (const auto& r : rows)
    os << r.cell.m << ',' << r.cell.n << ',' << r.cell.l << ',' << r.lambda_min << ','
       << r.lambda_max << ',' << r.infsup << '\n';
}

}  // namespace spherbf
