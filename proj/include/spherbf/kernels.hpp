#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "spherbf/types.hpp"

namespace spherbf {

/// Smoothness index of the Wendland family; only orders 0, 1, 2 are defined.
class WendlandOrder {
 public:
  explicit WendlandOrder(int m) : m_(m) {
    if (m < 0 || m > 2) throw std::invalid_argument("WendlandOrder: m must be 0, 1 or 2");
  }
  int value() const { return m_; }

 private:
  int m_;
};

/// psi_0(r) = (1-r)^2_+, psi_1(r) = (1-r)^4_+ (4r+1),
/// psi_2(r) = (1-r)^6_+ (35r^2 + 18r + 3).
template <class Scalar>
Scalar wendland_psi(WendlandOrder order, Scalar r) {
  if (!(r >= Scalar(0))) throw std::invalid_argument("wendland_psi: r must be >= 0");
  if (r >= Scalar(1)) return Scalar(0);
  const Scalar u = Scalar(1) - r;
  switch (order.value()) {
    case 0:
      return u * u;
    case 1:
      return u * u * u * u * (Scalar(4) * r + Scalar(1));
    default: {
      const Scalar u2 = u * u;
      return u2 * u2 * u2 * (Scalar(35) * r * r + Scalar(18) * r + Scalar(3));
    }
  }
}

/// Zonal kernel Phi(x . y) = psi(|x - y|) = psi(sqrt(2 - 2 x.y)) on S^2.
/// decay_exponent records the 2s in a_l ~ (l+1)^{-2s}; metadata only, all
/// runtime paths use the numerically computed coefficients.
template <class Scalar>
struct ZonalKernel {
  WendlandOrder order;
  Scalar decay_exponent;

  static ZonalKernel wendland(WendlandOrder m) {
    return ZonalKernel{m, Scalar(2 * m.value() + 3)};
  }
};

/// Phi(t) = psi(sqrt(2 - 2t)) for t in [-1, 1]; identically zero for t <= 1/2.
template <class Scalar>
Scalar kernel_value(const ZonalKernel<Scalar>& kernel, Scalar t) {
  const Scalar r = std::sqrt(std::max(Scalar(0), Scalar(2) - Scalar(2) * t));
  return wendland_psi(kernel.order, r);
}

/// Classical Legendre polynomial P_l(t), normalized to P_l(1) = 1,
/// via the three-term recurrence.
template <class Scalar>
Scalar legendre_P(int l, Scalar t) {
  if (l < 0) throw std::invalid_argument("legendre_P: degree must be >= 0");
  Scalar pkm1 = Scalar(1);
  if (l == 0) return pkm1;
  Scalar pk = t;
  for (int k = 1; k < l; ++k) {
    const Scalar pkp1 = (Scalar(2 * k + 1) * t * pk - Scalar(k) * pkm1) / Scalar(k + 1);
    pkm1 = pk;
    pk = pkp1;
  }
  return pk;
}

template <class Scalar>
struct GaussLegendreRule {
  Vector<Scalar> nodes;    // ascending in (-1, 1)
  Vector<Scalar> weights;  // positive, sum to 2
};

/// Gauss-Legendre nodes and weights by Newton iteration on the Legendre
/// recurrence; no tabulated values.
template <class Scalar>
GaussLegendreRule<Scalar> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  GaussLegendreRule<Scalar> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Scalar tol = Scalar(4) * std::numeric_limits<Scalar>::epsilon();
  for (int i = 1; i <= n; ++i) {
    Scalar x = std::cos(pi_v<Scalar> * (Scalar(i) - Scalar(0.25)) / (Scalar(n) + Scalar(0.5)));
    Scalar pn = 0, pnm1 = 0;
    for (int iter = 0; iter < 100; ++iter) {
      pnm1 = Scalar(1);
      pn = x;
      for (int k = 1; k < n; ++k) {
        const Scalar pnp1 = (Scalar(2 * k + 1) * x * pn - Scalar(k) * pnm1) / Scalar(k + 1);
        pnm1 = pn;
        pn = pnp1;
      }
      const Scalar dpn = Scalar(n) * (x * pn - pnm1) / (x * x - Scalar(1));
      const Scalar dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) <= tol) break;
    }
    pnm1 = Scalar(1);
    pn = x;
    for (int k = 1; k < n; ++k) {
      const Scalar pnp1 = (Scalar(2 * k + 1) * x * pn - Scalar(k) * pnm1) / Scalar(k + 1);
      pnm1 = pn;
      pn = pnp1;
    }
    const Scalar dpn = Scalar(n) * (x * pn - pnm1) / (x * x - Scalar(1));
    rule.nodes[n - i] = x;
    rule.weights[n - i] = Scalar(2) / ((Scalar(1) - x * x) * dpn * dpn);
  }
  return rule;
}

/// Fourier-Legendre coefficients a_l = 2 pi Int_{-1}^{1} Phi(t) P_l(t) dt of a
/// zonal Wendland kernel, all strictly positive.
template <class Scalar>
struct CoefficientTable {
  int l_max = 0;
  Vector<Scalar> a;  // a[l], l = 0..l_max

  void require_degree(int L) const {
    if (L > l_max) throw std::invalid_argument("CoefficientTable: degree exceeds stored l_max");
  }
};

inline int default_quadrature_nodes(int l_max) { return std::max(256, 2 * l_max + 64); }

/// Computes the coefficient table by Gauss-Legendre quadrature. Phi vanishes
/// on [-1, 1/2]; on the support the substitution t = 1 - r^2/2 turns the
/// integrand into the polynomial psi(r) P_l(1 - r^2/2) r on r in [0, 1], so
/// the rule is exact once n_nodes exceeds half the integrand degree.
/// Accumulation runs in extended precision to keep the small high-degree
/// coefficients to full relative accuracy.
template <class Scalar>
CoefficientTable<Scalar> fourier_legendre_coeffs(WendlandOrder order, int l_max,
                                                 int n_nodes = -1) {
  if (l_max < 0) throw std::invalid_argument("fourier_legendre_coeffs: l_max must be >= 0");
  if (n_nodes < 0) n_nodes = default_quadrature_nodes(l_max);
  if (n_nodes < 2 * l_max + 32)
    throw std::invalid_argument("fourier_legendre_coeffs: need n_nodes >= 2*l_max + 32");

  using Wide = long double;
  const GaussLegendreRule<Wide> rule = gauss_legendre<Wide>(n_nodes);
  Vector<Wide> acc = Vector<Wide>::Zero(l_max + 1);
  for (int q = 0; q < n_nodes; ++q) {
    const Wide r = (rule.nodes[q] + Wide(1)) / Wide(2);
    const Wide w = rule.weights[q] / Wide(2);
    const Wide f = wendland_psi<Wide>(order, r) * r * w;
    const Wide t = Wide(1) - r * r / Wide(2);
    Wide pkm1 = Wide(1);
    Wide pk = t;
    acc[0] += f;
    if (l_max >= 1) acc[1] += f * t;
    for (int l = 1; l < l_max; ++l) {
      const Wide pkp1 = (Wide(2 * l + 1) * t * pk - Wide(l) * pkm1) / Wide(l + 1);
      pkm1 = pk;
      pk = pkp1;
      acc[l + 1] += f * pk;
    }
  }

  CoefficientTable<Scalar> table;
  table.l_max = l_max;
  table.a.resize(l_max + 1);
  for (int l = 0; l <= l_max; ++l) {
    const Wide al = Wide(2) * pi_v<Wide> * acc[l];
    if (!std::isfinite(al) || al <= Wide(0))
      throw std::runtime_error("fourier_legendre_coeffs: quadrature failure at l = " +
                               std::to_string(l) + " (a_l <= 0 or non-finite)");
    table.a[l] = static_cast<Scalar>(al);
  }
  return table;
}

// --- coefficient CSV: header "l,a_l"; extra columns are ignored on read ---

template <class Scalar>
void write_coeffs_csv(std::ostream& os, const CoefficientTable<Scalar>& table,
                      bool with_scaled_column = false) {
  os << (with_scaled_column ? "l,a_l,(l+1)^5*a_l" : "l,a_l") << '\n';
  os << std::scientific << std::setprecision(16);
  for (int l = 0; l <= table.l_max; ++l) {
    os << l << ',' << table.a[l];
    if (with_scaled_column) os << ',' << std::pow(Scalar(l + 1), Scalar(5)) * table.a[l];
    os << '\n';
  }
}

template <class Scalar>
CoefficientTable<Scalar> read_coeffs_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("l,a_l", 0) != 0)
    throw std::runtime_error("read_coeffs_csv: missing 'l,a_l' header");
  std::vector<Scalar> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    const int l = std::stoi(cell);
    if (l != static_cast<int>(values.size()))
      throw std::runtime_error("read_coeffs_csv: degrees must be contiguous from 0");
    std::getline(ls, cell, ',');
    values.push_back(static_cast<Scalar>(std::stod(cell)));
  }
  if (values.empty()) throw std::runtime_error("read_coeffs_csv: no rows");
  CoefficientTable<Scalar> table;
  table.l_max = static_cast<int>(values.size()) - 1;
  table.a = Eigen::Map<const Vector<Scalar>>(values.data(), static_cast<Index>(values.size()));
  return table;
}

template <class Scalar>
CoefficientTable<Scalar> read_coeffs_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_coeffs_csv: cannot open " + path);
  return read_coeffs_csv<Scalar>(is);
}

}  // namespace spherbf
