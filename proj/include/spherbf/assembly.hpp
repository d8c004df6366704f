#pragma once

#include <Eigen/Cholesky>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "spherbf/geometry.hpp"
#include "spherbf/harmonics.hpp"
#include "spherbf/kernels.hpp"
#include "spherbf/types.hpp"

namespace spherbf {

/// Dense symmetric kernel matrix A(i,j) = Phi(x_i . x_j). Positive definite
/// for distinct points; definiteness is established when a factorization is
/// first requested.
template <class Scalar>
struct InterpolationMatrix {
  Matrix<Scalar> matrix;
  ZonalKernel<Scalar> kernel;

  Index n() const { return matrix.rows(); }
};

template <class Scalar>
InterpolationMatrix<Scalar> assemble_A(const PointSet<Scalar>& points,
                                       const ZonalKernel<Scalar>& kernel) {
  const Index n = points.n();
  Matrix<Scalar> a = points.coords() * points.coords().transpose();
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const Scalar v = kernel_value(kernel, std::clamp(a(i, j), Scalar(-1), Scalar(1)));
      a(i, j) = v;
      a(j, i) = v;
    }
    a(j, j) = wendland_psi(kernel.order, Scalar(0));
  }
  return InterpolationMatrix<Scalar>{std::move(a), kernel};
}

/// Cholesky factorization of A; failure means the matrix is numerically
/// indefinite (typically duplicate or near-duplicate points).
template <class Scalar>
Eigen::LLT<Matrix<Scalar>> factorize(const InterpolationMatrix<Scalar>& a) {
  Eigen::LLT<Matrix<Scalar>> llt(a.matrix);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "InterpolationMatrix: positive-definiteness check failed (duplicate points?)");
  return llt;
}

/// Diagonal of Lambda_L in harmonic basis order: 1/a_l repeated 2l+1 times.
template <class Scalar>
struct DiagonalSchur {
  int L = 0;
  Vector<Scalar> diag;

  Index size() const { return diag.size(); }
};

template <class Scalar>
DiagonalSchur<Scalar> assemble_Lambda(const CoefficientTable<Scalar>& coeffs, int L) {
  coeffs.require_degree(L);
  DiagonalSchur<Scalar> lambda;
  lambda.L = L;
  lambda.diag.resize(dimension(L));
  Index pos = 0;
  for (int l = 0; l <= L; ++l)
    for (int k = 0; k < 2 * l + 1; ++k) lambda.diag[pos++] = Scalar(1) / coeffs.a[l];
  return lambda;
}

/// Scalar field on S^2 used for right-hand sides.
template <class Scalar>
using ScalarField = std::function<Scalar(const Vector3<Scalar>&)>;

/// The test function exp(x+y+z) + [0.01 - x^2 - y^2 - (z-1)^2]^2_+, a smooth
/// global term plus a bump supported on a cap of Euclidean radius 0.1 about
/// the north pole.
template <class Scalar>
Scalar paper_field(const Vector3<Scalar>& p) {
  const Scalar dz = p.z() - Scalar(1);
  const Scalar cap = Scalar(0.01) - p.x() * p.x() - p.y() * p.y() - dz * dz;
  const Scalar capp = std::max(Scalar(0), cap);
  return std::exp(p.x() + p.y() + p.z()) + capp * capp;
}

template <class Scalar>
ScalarField<Scalar> field_by_name(const std::string& name) {
  if (name == "paper-f") return [](const Vector3<Scalar>& p) { return paper_field<Scalar>(p); };
  throw std::invalid_argument("unknown field \"" + name + "\" (built-in: paper-f)");
}

/// Right-hand side (f(x_1), ..., f(x_N), 0, ..., 0) with m trailing zeros.
template <class Scalar, class Field>
Vector<Scalar> assemble_rhs(const PointSet<Scalar>& points, Field&& f, Index m) {
  const Index n = points.n();
  Vector<Scalar> rhs = Vector<Scalar>::Zero(n + m);
  for (Index i = 0; i < n; ++i) {
    rhs[i] = f(points.point(i));
    if (!std::isfinite(rhs[i]))
      throw std::runtime_error("assemble_rhs: field value at point " + std::to_string(i) +
                               " is not finite");
  }
  return rhs;
}

/// The saddle system [[A, Q], [Q^T, 0]] (alpha, beta)^T = (f_X, 0)^T.
/// The (N+M)^2 matrix is never formed; apply_saddle works blockwise.
template <class Scalar>
struct SaddleSystem {
  InterpolationMatrix<Scalar> A;
  Matrix<Scalar> Q;
  Vector<Scalar> rhs;

  Index n() const { return A.n(); }
  Index m() const { return Q.cols(); }
  Index size() const { return n() + m(); }
};

template <class Scalar, class Field>
SaddleSystem<Scalar> build_saddle_system(const PointSet<Scalar>& points,
                                         const ZonalKernel<Scalar>& kernel,
                                         const HarmonicBasis& basis, Field&& f) {
  SaddleSystem<Scalar> sys{assemble_A(points, kernel), eval_matrix(points, basis),
                           Vector<Scalar>()};
  sys.rhs = assemble_rhs(points, std::forward<Field>(f), sys.m());
  return sys;
}

template <class Scalar>
Vector<Scalar> apply_saddle(const SaddleSystem<Scalar>& sys, const Vector<Scalar>& v) {
  const Index n = sys.n(), m = sys.m();
  if (v.size() != n + m) throw std::invalid_argument("apply_saddle: size mismatch");
  Vector<Scalar> out(n + m);
  out.head(n).noalias() = sys.A.matrix * v.head(n);
  out.head(n).noalias() += sys.Q * v.tail(m);
  out.tail(m).noalias() = sys.Q.transpose() * v.head(n);
  return out;
}

/// Coefficients of the hybrid interpolant u + p: alpha against the kernel
/// translates, beta against the harmonics.
template <class Scalar>
struct HybridSolution {
  Vector<Scalar> alpha;
  Vector<Scalar> beta;
};

template <class Scalar>
HybridSolution<Scalar> split_solution(const SaddleSystem<Scalar>& sys, const Vector<Scalar>& x) {
  if (x.size() != sys.size()) throw std::invalid_argument("split_solution: size mismatch");
  return HybridSolution<Scalar>{x.head(sys.n()), x.tail(sys.m())};
}

/// Native-space norm sqrt(alpha^T A alpha) of the kernel part, clamped at
/// zero against round-off.
template <class Scalar>
Scalar native_norm(const Vector<Scalar>& alpha, const InterpolationMatrix<Scalar>& a) {
  if (alpha.size() != a.n()) throw std::invalid_argument("native_norm: size mismatch");
  const Scalar q = alpha.dot(a.matrix * alpha);
  return std::sqrt(std::max(Scalar(0), q));
}

/// u_{N,L}(query) + p_{N,L}(query).
template <class Scalar>
Scalar evaluate_interpolant(const HybridSolution<Scalar>& sol, const PointSet<Scalar>& points,
                            const ZonalKernel<Scalar>& kernel, const HarmonicBasis& basis,
                            const Vector3<Scalar>& query) {
  if (sol.alpha.size() != points.n() || sol.beta.size() != basis.size())
    throw std::invalid_argument("evaluate_interpolant: size mismatch");
  const Vector<Scalar> dots = points.coords() * query;
  Scalar u = Scalar(0);
  for (Index j = 0; j < points.n(); ++j)
    u += sol.alpha[j] * kernel_value(kernel, std::clamp(dots[j], Scalar(-1), Scalar(1)));
  return u + eval_harmonics(query, basis).dot(sol.beta);
}

}  // namespace spherbf
