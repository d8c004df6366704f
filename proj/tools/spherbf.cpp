// Command-line driver: point generation, kernel coefficients, saddle-point
// solves, Schur spectra, and the verification suite.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "spherbf/experiment.hpp"
#include "spherbf_acceptance/acceptance.hpp"

namespace {

std::ofstream open_or_die(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file " + path);
  return os;
}

// Flags parsed on the command line; only the ones the user actually passed
// override the config-file values.
struct GridFlags {
  std::vector<int> m, l;
  std::vector<long long> n;
  long long n_cap = 0;
  double cap_radius = 0;
  std::vector<double> cap_axis;
  std::string points, output_dir, precond, schur, field, residual_log, debug_dump;
  double rtol = 0, nu = 0, mu = 0;
  long long max_iter = 0;
  int jobs = 1;
  bool no_deterministic = false;
};

void add_grid_flags(CLI::App* cmd, GridFlags& f, std::string& config_path, std::string& out_path,
                    bool with_solver) {
  cmd->add_option("--config", config_path, "key = value config file; flags override it");
  cmd->add_option("--m", f.m, "kernel orders (0, 1, 2)")->delimiter(',');
  cmd->add_option("--n", f.n, "point counts")->delimiter(',');
  cmd->add_option("--l", f.l, "maximum polynomial degrees")->delimiter(',');
  cmd->add_option("--n-cap", f.n_cap, "points placed inside the cap (0 disables the cap)");
  cmd->add_option("--cap-radius", f.cap_radius, "cap angular radius in radians");
  cmd->add_option("--cap-axis", f.cap_axis, "cap axis, three components")->expected(3);
  cmd->add_option("--points", f.points, "read the point set from a file instead of generating");
  cmd->add_option("--output-dir", f.output_dir, "directory for auxiliary outputs");
  cmd->add_option("-o,--out", out_path, "result CSV path (default: <output-dir>/<command>.csv)");
  cmd->add_flag("--no-deterministic", f.no_deterministic,
                "report real wall times (output is no longer byte-reproducible)");
  if (with_solver) {
    cmd->add_option("--precond", f.precond, "primal preconditioner: none, schwarz, exact");
    cmd->add_option("--schur", f.schur, "dual block: lambda or exact");
    cmd->add_option("--field", f.field, "right-hand-side field (built-in: paper-f)");
    cmd->add_option("--rtol", f.rtol, "relative preconditioned residual tolerance");
    cmd->add_option("--max-iter", f.max_iter, "iteration cap (0 selects 5(N+M))");
    cmd->add_option("--nu", f.nu, "Schwarz center separation (0 selects 4 sqrt(4pi/N))");
    cmd->add_option("--mu", f.mu, "Schwarz subdomain radius (0 selects min(1.25 nu, pi/3))");
    cmd->add_option("--residual-log", f.residual_log, "per-cell iteration,residual CSV base path");
    cmd->add_option("--debug-dump", f.debug_dump,
                    "directory for per-cell A (N <= 1000), Q and Lambda CSV dumps");
    cmd->add_option("--jobs", f.jobs, "number of concurrent grid cells");
  }
}

spherbf::ExperimentConfig merge_config(const CLI::App* cmd, const GridFlags& f,
                                       const std::string& config_path) {
  spherbf::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = spherbf::parse_config_file(config_path);
  const auto given = [&](const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--m")) cfg.m_list = f.m;
  if (given("--l")) cfg.l_list = f.l;
  if (given("--n")) {
    cfg.n_list.clear();
    for (long long n : f.n) cfg.n_list.push_back(static_cast<spherbf::Index>(n));
  }
  if (given("--n-cap")) cfg.n_cap = static_cast<spherbf::Index>(f.n_cap);
  if (given("--cap-radius")) cfg.cap_radius = f.cap_radius;
  if (given("--cap-axis"))
    cfg.cap_axis =
        spherbf::Vector3<double>(f.cap_axis[0], f.cap_axis[1], f.cap_axis[2]).normalized();
  if (given("--points")) cfg.points_file = f.points;
  if (given("--output-dir")) cfg.output_dir = f.output_dir;
  if (given("--no-deterministic")) cfg.deterministic = false;
  if (given("--precond")) cfg.precond = f.precond;
  if (given("--schur")) cfg.schur = f.schur;
  if (given("--field")) cfg.field = f.field;
  if (given("--rtol")) cfg.rtol = f.rtol;
  if (given("--max-iter")) cfg.max_iter = static_cast<spherbf::Index>(f.max_iter);
  if (given("--nu")) cfg.nu = f.nu;
  if (given("--mu")) cfg.mu = f.mu;
  if (given("--residual-log")) cfg.residual_log = f.residual_log;
  if (given("--debug-dump")) cfg.debug_dump = f.debug_dump;
  if (given("--jobs")) cfg.jobs = f.jobs;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid radial-basis-function / spherical-polynomial interpolation on S^2"};
  app.require_subcommand(1);

  GridFlags flags;
  std::string config_path, out_path;

  auto* gen = app.add_subcommand("gen-points", "write a reproducible point-set file");
  long long gen_n = 0, gen_ncap = 0;
  double gen_radius = 0.1;
  std::vector<double> gen_axis;
  std::string gen_out;
  gen->add_option("--n", gen_n, "total point count")->required();
  gen->add_option("--n-cap", gen_ncap, "points placed inside the cap (0 disables the cap)");
  gen->add_option("--cap-radius", gen_radius, "cap angular radius in radians");
  gen->add_option("--cap-axis", gen_axis, "cap axis, three components")->expected(3);
  gen->add_option("-o,--out", gen_out, "output path")->required();

  auto* coeffs = app.add_subcommand("coeffs", "Fourier-Legendre coefficient table as CSV");
  int coeffs_m = 0, coeffs_lmax = 0, coeffs_nodes = -1;
  std::string coeffs_out;
  coeffs->add_option("--m", coeffs_m, "kernel order")->required();
  coeffs->add_option("--l-max", coeffs_lmax, "largest degree")->required();
  coeffs->add_option("--n-nodes", coeffs_nodes, "quadrature nodes (default max(256, 2 l_max + 64))");
  coeffs->add_option("-o,--out", coeffs_out, "output path")->required();

  auto* solve = app.add_subcommand("solve", "MINRES solves over the (m, N, L) grid");
  add_grid_flags(solve, flags, config_path, out_path, /*with_solver=*/true);

  auto* spectrum = app.add_subcommand("spectrum", "generalized eigenvalues of (S, Lambda_L)");
  bool full_spectrum = false;
  add_grid_flags(spectrum, flags, config_path, out_path, /*with_solver=*/false);
  spectrum->add_flag("--full", full_spectrum, "also write per-cell index,eigenvalue files");

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      spherbf::Vector3<double> axis(0, 0, 1);
      if (gen_axis.size() == 3)
        axis = spherbf::Vector3<double>(gen_axis[0], gen_axis[1], gen_axis[2]).normalized();
      const spherbf::PointSet<double> points =
          gen_ncap == 0 ? spherbf::generate_equal_area<double>(gen_n)
                        : spherbf::generate_experiment_set<double>(
                              gen_n, spherbf::CapSpec<double>{axis, gen_radius}, gen_ncap);
      auto os = open_or_die(gen_out);
      os << "# " << points.n() << " points on S^2, one \"x y z\" per line\n";
      spherbf::write_points(os, points);
      return 0;
    }

    if (coeffs->parsed()) {
      const auto table = spherbf::fourier_legendre_coeffs<double>(
          spherbf::WendlandOrder{coeffs_m}, coeffs_lmax, coeffs_nodes);
      auto os = open_or_die(coeffs_out);
      spherbf::write_coeffs_csv(os, table, /*with_scaled_column=*/coeffs_m == 1);
      return 0;
    }

    if (solve->parsed()) {
      const auto cfg = merge_config(solve, flags, config_path);
      const auto rows = spherbf::run_solve(cfg);
      auto os = open_or_die(out_path.empty() ? cfg.output_dir + "/solve.csv" : out_path);
      spherbf::write_solve_csv(os, rows);
      for (const auto& r : rows)
        if (!r.converged)
          std::cerr << "spherbf: note: cell m=" << r.cell.m << " N=" << r.cell.n
                    << " L=" << r.cell.l << " did not converge within the iteration cap\n";
      return 0;
    }

    if (spectrum->parsed()) {
      const auto cfg = merge_config(spectrum, flags, config_path);
      const auto rows = spherbf::run_spectrum(cfg, full_spectrum);
      auto os = open_or_die(out_path.empty() ? cfg.output_dir + "/spectrum.csv" : out_path);
      spherbf::write_spectrum_csv(os, rows);
      bool bounds_ok = true;
      for (const auto& r : rows)
        if (!r.bounds_ok) {
          bounds_ok = false;
          std::cerr << "spherbf: hard invariant violated: eigenvalues of cell m=" << r.cell.m
                    << " N=" << r.cell.n << " L=" << r.cell.l << " leave (0, 1 + 1e-8]\n";
        }
      return bounds_ok ? 0 : 1;
    }

    if (verify->parsed()) {
      return spherbf::acceptance::run_all(std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "spherbf: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
