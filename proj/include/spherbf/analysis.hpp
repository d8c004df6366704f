#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spherbf/assembly.hpp"
#include "spherbf/precond.hpp"
#include "spherbf/types.hpp"

namespace spherbf {

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi sweeps, returned
/// in ascending order. Sweeps run until the off-diagonal Frobenius norm drops
/// below off_tol * ||T||_F.
template <class Scalar>
Vector<Scalar> jacobi_eigenvalues(Matrix<Scalar> t, Scalar off_tol = Scalar(1e-12),
                                  int max_sweeps = 60) {
  if (t.rows() != t.cols()) throw std::invalid_argument("jacobi_eigenvalues: matrix not square");
  const Index n = t.rows();
  if (n == 0) return Vector<Scalar>();
  const Scalar norm = t.norm();
  const Scalar target = off_tol * norm;

  const auto off_norm = [&]() {
    Scalar s = Scalar(0);
    for (Index q = 0; q < n; ++q)
      for (Index p = 0; p < q; ++p) s += t(p, q) * t(p, q) + t(q, p) * t(q, p);
    return std::sqrt(s);
  };

  bool done = norm == Scalar(0) || off_norm() <= target;
  for (int sweep = 0; sweep < max_sweeps && !done; ++sweep) {
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (t(p, q) == Scalar(0) && t(q, p) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(t, p, q);
        t.applyOnTheLeft(p, q, rot.adjoint());
        t.applyOnTheRight(p, q, rot);
      }
    }
    done = off_norm() <= target;
  }
  if (!done)
    throw std::runtime_error("jacobi_eigenvalues: no convergence within the sweep budget");

  Vector<Scalar> ev = t.diagonal();
  std::sort(ev.data(), ev.data() + n);
  return ev;
}

/// Generalized eigenvalues of the pencil (S, Lambda_L) with the inf-sup
/// estimate sqrt(lambda_min). The spectral-equivalence bound puts every
/// eigenvalue in (0, 1] up to round-off.
template <class Scalar>
struct SpectrumReport {
  Vector<Scalar> eigenvalues;  // ascending
  Scalar lambda_min = Scalar(0);
  Scalar lambda_max = Scalar(0);
  Scalar infsup_estimate = Scalar(0);

  bool within_schur_bounds(Scalar upper_slack = Scalar(1e-8)) const {
    return lambda_min > Scalar(0) && lambda_max <= Scalar(1) + upper_slack;
  }
};

/// Spectrum of the pencil (S, Lambda) computed as the ordinary symmetric
/// eigenproblem for D^{-1/2} S D^{-1/2}, D = Lambda; exact since Lambda is
/// positive diagonal.
template <class Scalar>
SpectrumReport<Scalar> schur_spectrum(const Matrix<Scalar>& s, const DiagonalSchur<Scalar>& lambda) {
  if (s.rows() != s.cols() || s.rows() != lambda.size())
    throw std::invalid_argument("schur_spectrum: size mismatch");
  if ((lambda.diag.array() <= Scalar(0)).any())
    throw std::invalid_argument("schur_spectrum: Lambda must be positive");
  const Vector<Scalar> dinv_sqrt = lambda.diag.cwiseSqrt().cwiseInverse();
  Matrix<Scalar> t = dinv_sqrt.asDiagonal() * s * dinv_sqrt.asDiagonal();
  t = ((t + t.transpose()) / Scalar(2)).eval();

  SpectrumReport<Scalar> report;
  report.eigenvalues = jacobi_eigenvalues(std::move(t));
  report.lambda_min = report.eigenvalues[0];
  report.lambda_max = report.eigenvalues[report.eigenvalues.size() - 1];
  report.infsup_estimate = std::sqrt(std::max(Scalar(0), report.lambda_min));
  return report;
}

/// Computable lower-bound certificate for the inf-sup constant gamma_1 on
/// this (X, L).
template <class Scalar>
Scalar infsup_estimate(const SpectrumReport<Scalar>& report) {
  return report.infsup_estimate;
}

template <class Scalar>
struct EigenvalueCluster {
  Scalar value = Scalar(0);  // mean of the cluster
  Index multiplicity = 0;
};

/// Spectrum of the saddle matrix preconditioned by the exact block diagonal
/// diag(A, S), computed in the congruent symmetric form C^{-1} K C^{-T} with
/// C C^T = diag(A, S), and clustered with gap threshold 1e-6. For the exact
/// preconditioner this yields the three clusters 1 and (1 +- sqrt(5))/2.
template <class Scalar>
std::vector<EigenvalueCluster<Scalar>> exact_precond_spectrum(const SaddleSystem<Scalar>& sys,
                                                              Scalar gap = Scalar(1e-6)) {
  const Index n = sys.n(), m = sys.m(), total = n + m;
  if (total > 600)
    throw std::invalid_argument("exact_precond_spectrum: dense path limited to N+M <= 600");

  const Eigen::LLT<Matrix<Scalar>> a_llt = factorize(sys.A);
  Matrix<Scalar> lower = Matrix<Scalar>::Zero(total, total);
  lower.topLeftCorner(n, n) = a_llt.matrixL();
  if (m > 0) {
    const Matrix<Scalar> s = exact_schur(a_llt, sys.Q);
    Eigen::LLT<Matrix<Scalar>> s_llt(s);
    if (s_llt.info() != Eigen::Success)
      throw std::runtime_error("exact_precond_spectrum: Schur complement is not positive definite");
    lower.bottomRightCorner(m, m) = s_llt.matrixL();
  }

  Matrix<Scalar> k = Matrix<Scalar>::Zero(total, total);
  k.topLeftCorner(n, n) = sys.A.matrix;
  if (m > 0) {
    k.topRightCorner(n, m) = sys.Q;
    k.bottomLeftCorner(m, n) = sys.Q.transpose();
  }

  const auto lt = lower.template triangularView<Eigen::Lower>();
  Matrix<Scalar> t = lt.solve(k);
  t = lt.solve(Matrix<Scalar>(t.transpose()));
  t = ((t + t.transpose()) / Scalar(2)).eval();

  const Vector<Scalar> ev = jacobi_eigenvalues(std::move(t));
  std::vector<EigenvalueCluster<Scalar>> clusters;
  for (Index i = 0; i < ev.size(); ++i) {
    if (clusters.empty() || ev[i] - ev[i - 1] > gap) {
      clusters.push_back({ev[i], 1});
    } else {
      auto& c = clusters.back();
      c.value = (c.value * Scalar(c.multiplicity) + ev[i]) / Scalar(c.multiplicity + 1);
      ++c.multiplicity;
    }
  }
  return clusters;
}

}  // namespace spherbf
