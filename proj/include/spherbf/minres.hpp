#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "spherbf/types.hpp"

namespace spherbf {

template <class Scalar>
struct SolveReport {
  Index iterations = 0;
  std::vector<Scalar> residual_history;  // preconditioned residual norms, entry 0 is initial
  bool converged = false;
  bool breakdown = false;
  double wall_time_s = 0.0;
};

/// Preconditioned MINRES (Paige-Saunders) for a symmetric operator and a
/// symmetric positive definite preconditioner action z = M^{-1} v.
///
/// Stops when the preconditioned residual norm has dropped by rtol relative
/// to its initial value, or at max_iter with converged = false. A negative
/// Lanczos inner product means the preconditioner is indefinite and aborts;
/// an exactly zero beta with the residual still above tolerance is flagged
/// as a breakdown in the report.
template <class Scalar, class Operator, class Preconditioner>
std::pair<Vector<Scalar>, SolveReport<Scalar>> minres_solve(Operator&& apply_operator,
                                                            Preconditioner&& apply_preconditioner,
                                                            const Vector<Scalar>& b, Scalar rtol,
                                                            Index max_iter) {
  if (!(rtol > Scalar(0))) throw std::invalid_argument("minres_solve: rtol must be positive");
  if (max_iter < 1) throw std::invalid_argument("minres_solve: max_iter must be >= 1");
  if (!b.allFinite()) throw std::invalid_argument("minres_solve: right-hand side is not finite");

  const auto t0 = std::chrono::steady_clock::now();
  const Index n = b.size();
  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  SolveReport<Scalar> report;

  Vector<Scalar> r1 = b;
  Vector<Scalar> y = apply_preconditioner(r1);
  Scalar beta1 = r1.dot(y);
  if (beta1 < Scalar(0))
    throw std::runtime_error("minres_solve: preconditioner is indefinite (negative inner product)");
  if (beta1 == Scalar(0)) {
    // b = 0 (or annihilated by the preconditioner): x = 0 is exact.
    report.converged = true;
    report.residual_history.push_back(Scalar(0));
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(x), std::move(report)};
  }
  beta1 = std::sqrt(beta1);
  Scalar phibar = beta1;
  report.residual_history.push_back(phibar);

  Scalar oldb = Scalar(0), beta = beta1;
  Scalar dbar = Scalar(0), epsln = Scalar(0);
  Scalar cs = Scalar(-1), sn = Scalar(0);
  Vector<Scalar> r2 = r1;
  Vector<Scalar> w = Vector<Scalar>::Zero(n);
  Vector<Scalar> w2 = Vector<Scalar>::Zero(n);
  Vector<Scalar> v(n), w1(n);

  for (Index it = 1; it <= max_iter; ++it) {
    v = y / beta;
    y = apply_operator(v);
    if (it >= 2) y -= (beta / oldb) * r1;
    const Scalar alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = apply_preconditioner(r2);
    oldb = beta;
    beta = r2.dot(y);
    if (beta < Scalar(0))
      throw std::runtime_error(
          "minres_solve: preconditioner is indefinite (negative inner product)");
    beta = std::sqrt(beta);

    // Givens QR update of the Lanczos tridiagonal.
    const Scalar oldeps = epsln;
    const Scalar delta = cs * dbar + sn * alfa;
    const Scalar gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    Scalar gamma = std::hypot(gbar, beta);
    gamma = std::max(gamma, std::numeric_limits<Scalar>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const Scalar phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    report.iterations = it;
    report.residual_history.push_back(std::abs(phibar));
    if (std::abs(phibar) <= rtol * beta1) {
      report.converged = true;
      break;
    }
    if (beta == Scalar(0)) {
      report.breakdown = true;  // invariant subspace hit with residual above tolerance
      break;
    }
  }
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(x), std::move(report)};
}

}  // namespace spherbf
