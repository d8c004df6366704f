#pragma once

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

#include "spherbf/geometry.hpp"
#include "spherbf/types.hpp"

namespace spherbf {

/// Returns (L+1)^2, the dimension of the spherical polynomials of degree <= L
/// on S^2.
inline Index dimension(int L) {
  if (L < 0) throw std::invalid_argument("dimension: degree must be >= 0");
  return static_cast<Index>(L + 1) * (L + 1);
}

/// Within-degree index k in 1..2l+1: k = 1 is the zonal harmonic, k = 2j and
/// k = 2j+1 are the cos(j phi) and sin(j phi) harmonics of order j.
struct HarmonicIndex {
  int l = 0;
  int k = 1;

  void validate() const {
    if (l < 0 || k < 1 || k > 2 * l + 1)
      throw std::invalid_argument("HarmonicIndex: need l >= 0 and 1 <= k <= 2l+1");
  }
};

/// Flat column order: degree l ascending, k ascending within each degree.
/// The diagonal of Lambda_L repeats 1/a_l over each degree block, so this
/// ordering is fixed to keep files bit-reproducible.
struct HarmonicBasis {
  int L = 0;

  explicit HarmonicBasis(int max_degree) : L(max_degree) {
    if (L < 0) throw std::invalid_argument("HarmonicBasis: degree must be >= 0");
  }

  Index size() const { return dimension(L); }

  static Index column(HarmonicIndex idx) {
    idx.validate();
    return static_cast<Index>(idx.l) * idx.l + (idx.k - 1);
  }

  HarmonicIndex index_at(Index column) const {
    const int l = static_cast<int>(std::sqrt(static_cast<double>(column)));
    return HarmonicIndex{l, static_cast<int>(column - static_cast<Index>(l) * l) + 1};
  }
};

namespace detail {

// Fills row[l^2 .. (L+1)^2 - 1] with all real orthonormal harmonics at p.
// Fully normalized associated Legendre recurrence with sin(theta)^m folded in
// (values stay O(1) up to high degree); no Condon-Shortley phase.
template <class Scalar, class Row>
void harmonic_row(const Vector3<Scalar>& p, int L, Row&& row) {
  const Scalar z = p.z();
  const Scalar s = std::sqrt(std::max(Scalar(0), p.x() * p.x() + p.y() * p.y()));
  const Scalar cphi = s > Scalar(0) ? p.x() / s : Scalar(1);
  const Scalar sphi = s > Scalar(0) ? p.y() / s : Scalar(0);
  const Scalar sqrt2 = std::sqrt(Scalar(2));

  Scalar pmm = Scalar(1) / std::sqrt(Scalar(4) * pi_v<Scalar>);
  Scalar cm = Scalar(1), sm = Scalar(0);  // cos(m phi), sin(m phi)
  for (int m = 0; m <= L; ++m) {
    if (m > 0) {
      pmm *= s * std::sqrt(Scalar(2 * m + 1) / Scalar(2 * m));
      const Scalar cnext = cm * cphi - sm * sphi;
      sm = sm * cphi + cm * sphi;
      cm = cnext;
    }
    const auto put = [&](int l, Scalar plm) {
      const Index base = static_cast<Index>(l) * l;
      if (m == 0) {
        row[base] = plm;
      } else {
        row[base + 2 * m - 1] = sqrt2 * plm * cm;
        row[base + 2 * m] = sqrt2 * plm * sm;
      }
    };
    Scalar plm2 = pmm;
    put(m, plm2);
    if (m == L) break;
    Scalar plm1 = z * std::sqrt(Scalar(2 * m + 3)) * pmm;
    put(m + 1, plm1);
    for (int l = m + 2; l <= L; ++l) {
      const Scalar a = std::sqrt(Scalar(4 * l * l - 1) / Scalar(l * l - m * m));
      const Scalar b =
          std::sqrt((Scalar((l - 1) * (l - 1)) - Scalar(m * m)) / Scalar(4 * (l - 1) * (l - 1) - 1));
      const Scalar pl = a * (z * plm1 - b * plm2);
      plm2 = plm1;
      plm1 = pl;
      put(l, pl);
    }
  }
}

}  // namespace detail

/// Single real orthonormal spherical harmonic Y_{l,k}(p).
template <class Scalar>
Scalar eval_harmonic(HarmonicIndex idx, const Vector3<Scalar>& p) {
  idx.validate();
  Vector<Scalar> row(dimension(idx.l));
  detail::harmonic_row<Scalar>(p, idx.l, row);
  return row[HarmonicBasis::column(idx)];
}

/// All harmonics of degree <= L at one point, in basis column order.
template <class Scalar>
Vector<Scalar> eval_harmonics(const Vector3<Scalar>& p, const HarmonicBasis& basis) {
  Vector<Scalar> row(basis.size());
  detail::harmonic_row<Scalar>(p, basis.L, row);
  return row;
}

/// The N x M matrix Q with Q(i, col(l,k)) = Y_{l,k}(x_i).
template <class Scalar>
Matrix<Scalar> eval_matrix(const PointSet<Scalar>& points, const HarmonicBasis& basis) {
  const Index n = points.n();
  const Index m = basis.size();
  if (n < m)
    std::cerr << "spherbf: warning: harmonic matrix has more columns (" << m << ") than points ("
              << n << "); the saddle system cannot have full rank\n";
  Matrix<Scalar> q(n, m);
  for (Index i = 0; i < n; ++i) detail::harmonic_row<Scalar>(points.point(i), basis.L, q.row(i));
  return q;
}

/// Sum_k Y_{l,k}(x) Y_{l,k}(y); equals (2l+1)/(4 pi) P_l(x . y) by the
/// addition theorem.
template <class Scalar>
Scalar addition_theorem_sum(int l, const Vector3<Scalar>& x, const Vector3<Scalar>& y) {
  const HarmonicBasis basis(l);
  const Vector<Scalar> rx = eval_harmonics(x, basis);
  const Vector<Scalar> ry = eval_harmonics(y, basis);
  const Index base = static_cast<Index>(l) * l;
  return rx.segment(base, 2 * l + 1).dot(ry.segment(base, 2 * l + 1));
}

}  // namespace spherbf
