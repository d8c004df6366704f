#pragma once

#include <Eigen/Cholesky>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spherbf/assembly.hpp"
#include "spherbf/geometry.hpp"
#include "spherbf/types.hpp"

namespace spherbf {

/// Additive Schwarz data: centers p_j with pairwise separation >= nu and
/// overlapping subdomains X_j = { x in X : dist(x, p_j) <= mu }, with the
/// local kernel blocks factorized once at build time.
template <class Scalar>
struct SchwarzPreconditioner {
  PointSet<Scalar> centers;
  std::vector<Index> center_indices;            // positions of the centers in X
  std::vector<std::vector<Index>> subdomains;   // X_j as index lists into X
  std::vector<Eigen::LLT<Matrix<Scalar>>> factors;
  Scalar nu = Scalar(0);
  Scalar mu = Scalar(0);
  bool coverage_repaired = false;
  Index n = 0;

  Index n_subdomains() const { return static_cast<Index>(subdomains.size()); }
};

/// Default Schwarz parameters: nu = 4 hbar with hbar = sqrt(4 pi / N) the
/// mean spacing, mu = 1.25 nu clamped below pi/3.
inline double default_nu(Index n) {
  return std::min(4.0 * std::sqrt(4.0 * pi_v<double> / static_cast<double>(n)),
                  pi_v<double> - 1e-9);
}

inline double default_mu(double nu) { return std::min(1.25 * nu, pi_v<double> / 3.0 - 1e-9); }

/// Greedy sweep in point order: a point becomes a center iff it is at
/// geodesic distance >= nu from every previously accepted center. The result
/// is maximal with respect to the sweep order.
template <class Scalar>
PointSet<Scalar> select_centers(const PointSet<Scalar>& points, Scalar nu) {
  if (!(nu > Scalar(0) && nu < pi_v<Scalar>))
    throw std::invalid_argument("select_centers: need 0 < nu < pi");
  std::vector<Index> chosen;
  for (Index i = 0; i < points.n(); ++i) {
    bool ok = true;
    for (const Index c : chosen) {
      if (geodesic_distance(points.point(i), points.point(c)) < nu) {
        ok = false;
        break;
      }
    }
    if (ok) chosen.push_back(i);
  }
  Coords<Scalar> c(static_cast<Index>(chosen.size()), 3);
  for (Index j = 0; j < c.rows(); ++j) c.row(j) = points.coords().row(chosen[static_cast<std::size_t>(j)]);
  return PointSet<Scalar>(std::move(c));
}

/// Builds the subdomain index lists (no factorizations). Any point left
/// uncovered by the <= mu rule is appended to its nearest center's subdomain
/// and the repair flag is set.
template <class Scalar>
SchwarzPreconditioner<Scalar> build_subdomains(const PointSet<Scalar>& points,
                                               const PointSet<Scalar>& centers, Scalar mu) {
  if (!(mu > Scalar(0) && mu < pi_v<Scalar> / Scalar(3)))
    throw std::invalid_argument("build_subdomains: need 0 < mu < pi/3");
  const Index n = points.n();
  const Index j_count = centers.n();
  SchwarzPreconditioner<Scalar> pc{centers, {}, {}, {}, Scalar(0), mu, false, n};
  pc.subdomains.resize(static_cast<std::size_t>(j_count));
  std::vector<bool> covered(static_cast<std::size_t>(n), false);
  for (Index j = 0; j < j_count; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (geodesic_distance(points.point(i), centers.point(j)) <= mu) {
        pc.subdomains[static_cast<std::size_t>(j)].push_back(i);
        covered[static_cast<std::size_t>(i)] = true;
      }
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (covered[static_cast<std::size_t>(i)]) continue;
    Index nearest = 0;
    Scalar best = std::numeric_limits<Scalar>::max();
    for (Index j = 0; j < j_count; ++j) {
      const Scalar d = geodesic_distance(points.point(i), centers.point(j));
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    pc.subdomains[static_cast<std::size_t>(nearest)].push_back(i);
    pc.coverage_repaired = true;
  }
  return pc;
}

/// Factorizes every local block A_j = A(X_j, X_j).
template <class Scalar>
void factorize_subdomains(SchwarzPreconditioner<Scalar>& pc, const InterpolationMatrix<Scalar>& a) {
  if (a.n() != pc.n) throw std::invalid_argument("factorize_subdomains: size mismatch");
  pc.factors.clear();
  pc.factors.reserve(pc.subdomains.size());
  for (std::size_t j = 0; j < pc.subdomains.size(); ++j) {
    const auto& idx = pc.subdomains[j];
    const Index nj = static_cast<Index>(idx.size());
    Matrix<Scalar> aj(nj, nj);
    for (Index col = 0; col < nj; ++col)
      for (Index row = 0; row < nj; ++row)
        aj(row, col) = a.matrix(idx[static_cast<std::size_t>(row)], idx[static_cast<std::size_t>(col)]);
    pc.factors.emplace_back(aj);
    if (pc.factors.back().info() != Eigen::Success)
      throw std::runtime_error("apply_schwarz: singular local block at center " +
                               std::to_string(j));
  }
}

/// Additive Schwarz action r -> sum_j R_j^T A_j^{-1} R_j r, accumulated in
/// subdomain order so results are reproducible.
template <class Scalar>
Vector<Scalar> apply_schwarz(const SchwarzPreconditioner<Scalar>& pc, const Vector<Scalar>& r) {
  if (pc.factors.size() != pc.subdomains.size())
    throw std::logic_error("apply_schwarz: factorizations not built");
  if (r.size() != pc.n) throw std::invalid_argument("apply_schwarz: size mismatch");
  Vector<Scalar> z = Vector<Scalar>::Zero(pc.n);
  for (std::size_t j = 0; j < pc.subdomains.size(); ++j) {
    const auto& idx = pc.subdomains[j];
    const Index nj = static_cast<Index>(idx.size());
    Vector<Scalar> rj(nj);
    for (Index i = 0; i < nj; ++i) rj[i] = r[idx[static_cast<std::size_t>(i)]];
    const Vector<Scalar> zj = pc.factors[j].solve(rj);
    for (Index i = 0; i < nj; ++i) z[idx[static_cast<std::size_t>(i)]] += zj[i];
  }
  return z;
}

/// Schur complement S = Q^T A^{-1} Q formed column by column from a Cholesky
/// factorization of A, symmetrized as (S + S^T)/2.
template <class Scalar>
Matrix<Scalar> exact_schur(const Eigen::LLT<Matrix<Scalar>>& a_llt, const Matrix<Scalar>& q) {
  const Matrix<Scalar> w = a_llt.solve(q);
  const Matrix<Scalar> s = q.transpose() * w;
  return Matrix<Scalar>((s + s.transpose()) / Scalar(2));
}

template <class Scalar>
Matrix<Scalar> exact_schur(const InterpolationMatrix<Scalar>& a, const Matrix<Scalar>& q) {
  if (q.rows() != a.n()) throw std::invalid_argument("exact_schur: size mismatch");
  return exact_schur(factorize(a), q);
}

/// Block-diagonal preconditioner diag(primal, dual). Unset parts act as the
/// identity, so the all-identity instance is the unpreconditioned MINRES run.
template <class Scalar>
class BlockDiagPreconditioner {
 public:
  static BlockDiagPreconditioner identity(Index n, Index m) {
    BlockDiagPreconditioner p;
    p.n_ = n;
    p.m_ = m;
    return p;
  }

  /// Exact primal solve A^{-1} together with the exact Schur complement
  /// S^{-1}; this is the three-eigenvalue preconditioner.
  static BlockDiagPreconditioner exact_block(const InterpolationMatrix<Scalar>& a,
                                             const Matrix<Scalar>& s) {
    BlockDiagPreconditioner p;
    p.n_ = a.n();
    p.m_ = s.rows();
    p.primal_exact_ = factorize(a);
    p.set_dual_exact(s);
    return p;
  }

  static BlockDiagPreconditioner schwarz_lambda(SchwarzPreconditioner<Scalar> schwarz,
                                                const DiagonalSchur<Scalar>& lambda) {
    BlockDiagPreconditioner p;
    p.n_ = schwarz.n;
    p.m_ = lambda.size();
    p.schwarz_ = std::move(schwarz);
    p.dual_scale_ = lambda.diag.cwiseInverse();
    return p;
  }

  static BlockDiagPreconditioner schwarz_exact(SchwarzPreconditioner<Scalar> schwarz,
                                               const Matrix<Scalar>& s) {
    BlockDiagPreconditioner p;
    p.n_ = schwarz.n;
    p.m_ = s.rows();
    p.schwarz_ = std::move(schwarz);
    p.set_dual_exact(s);
    return p;
  }

  static BlockDiagPreconditioner exact_lambda(const InterpolationMatrix<Scalar>& a,
                                              const DiagonalSchur<Scalar>& lambda) {
    BlockDiagPreconditioner p;
    p.n_ = a.n();
    p.m_ = lambda.size();
    p.primal_exact_ = factorize(a);
    p.dual_scale_ = lambda.diag.cwiseInverse();
    return p;
  }

  Index n() const { return n_; }
  Index m() const { return m_; }
  Index size() const { return n_ + m_; }

  std::pair<Vector<Scalar>, Vector<Scalar>> apply_block(const Vector<Scalar>& r1,
                                                        const Vector<Scalar>& r2) const {
    if (r1.size() != n_ || r2.size() != m_)
      throw std::invalid_argument("apply_block: size mismatch");
    Vector<Scalar> z1;
    if (schwarz_)
      z1 = apply_schwarz(*schwarz_, r1);
    else if (primal_exact_)
      z1 = primal_exact_->solve(r1);
    else
      z1 = r1;
    Vector<Scalar> z2;
    if (dual_scale_)
      z2 = dual_scale_->cwiseProduct(r2);
    else if (dual_exact_)
      z2 = dual_exact_->solve(r2);
    else
      z2 = r2;
    return {std::move(z1), std::move(z2)};
  }

  Vector<Scalar> apply(const Vector<Scalar>& r) const {
    if (r.size() != size()) throw std::invalid_argument("BlockDiagPreconditioner: size mismatch");
    auto [z1, z2] = apply_block(Vector<Scalar>(r.head(n_)), Vector<Scalar>(r.tail(m_)));
    Vector<Scalar> z(size());
    z.head(n_) = z1;
    z.tail(m_) = z2;
    return z;
  }

 private:
  void set_dual_exact(const Matrix<Scalar>& s) {
    dual_exact_.emplace(s);
    if (dual_exact_->info() != Eigen::Success)
      throw std::runtime_error("BlockDiagPreconditioner: Schur block is not positive definite");
  }

  Index n_ = 0, m_ = 0;
  std::optional<SchwarzPreconditioner<Scalar>> schwarz_;
  std::optional<Eigen::LLT<Matrix<Scalar>>> primal_exact_;
  std::optional<Vector<Scalar>> dual_scale_;  // entrywise a_l, the inverse of Lambda_L
  std::optional<Eigen::LLT<Matrix<Scalar>>> dual_exact_;
};

}  // namespace spherbf
