#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include "spherbf/types.hpp"

namespace spherbf {

/// Geodesic distance on the unit sphere; the dot product is clamped to
/// [-1, 1] so coincident and antipodal inputs are safe.
template <class DerivedA, class DerivedB>
typename DerivedA::Scalar geodesic_distance(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using S = typename DerivedA::Scalar;
  const S d = a.derived().dot(b.derived());
  return std::acos(std::clamp(d, S(-1), S(1)));
}

template <class Scalar>
struct CapSpec {
  Vector3<Scalar> axis = Vector3<Scalar>(0, 0, 1);
  Scalar radius = Scalar(0.1);  // angular radius, radians

  void validate() const {
    if (!(radius > Scalar(0) && radius < pi_v<Scalar>))
      throw std::invalid_argument("CapSpec: radius must lie in (0, pi)");
    if (std::abs(axis.squaredNorm() - Scalar(1)) > Scalar(1e-12))
      throw std::invalid_argument("CapSpec: axis must be a unit vector");
  }
};

/// An ordered set of distinct unit vectors on S^2, stored one per row.
template <class Scalar>
class PointSet {
 public:
  explicit PointSet(Coords<Scalar> coords) : coords_(std::move(coords)) { validate(); }

  Index n() const { return coords_.rows(); }
  const Coords<Scalar>& coords() const { return coords_; }
  Vector3<Scalar> point(Index i) const { return coords_.row(i).transpose(); }

  /// First k points, preserving order.
  PointSet head(Index k) const { return PointSet(Coords<Scalar>(coords_.topRows(k))); }

 private:
  void validate() const {
    const Index n = coords_.rows();
    if (n < 1) throw std::invalid_argument("PointSet: need at least one point");
    for (Index i = 0; i < n; ++i)
      if (std::abs(coords_.row(i).squaredNorm() - Scalar(1)) > Scalar(1e-12))
        throw std::invalid_argument("PointSet: point " + std::to_string(i) + " is not unit length");
    // Distinctness at geodesic separation 1e-10 is decided on squared chord
    // length (2 sin(g/2))^2; dot products cannot resolve that scale.
    const Scalar chord2_min = Scalar(1e-20);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if ((coords_.row(i) - coords_.row(j)).squaredNorm() <= chord2_min)
          throw std::invalid_argument("PointSet: points " + std::to_string(i) + " and " +
                                      std::to_string(j) + " coincide");
  }

  Coords<Scalar> coords_;
};

namespace detail {

// Generalized spiral with prescribed heights h (ascending) and the
// Saff-Kuijlaars longitude increment 3.6 / sqrt(n (1 - h^2)); the first and
// last longitudes are pinned to zero.
template <class Scalar>
Coords<Scalar> spiral_from_heights(const Vector<Scalar>& h) {
  const Index n = h.size();
  Coords<Scalar> c(n, 3);
  Scalar phi = Scalar(0);
  for (Index k = 0; k < n; ++k) {
    const Scalar hk = std::clamp(h[k], Scalar(-1), Scalar(1));
    const Scalar s = std::sqrt(std::max(Scalar(0), Scalar(1) - hk * hk));
    if (k == 0 || k == n - 1) {
      phi = Scalar(0);
    } else {
      phi = std::fmod(phi + Scalar(3.6) / std::sqrt(Scalar(n) * (Scalar(1) - hk * hk)),
                      Scalar(2) * pi_v<Scalar>);
    }
    c(k, 0) = s * std::cos(phi);
    c(k, 1) = s * std::sin(phi);
    c(k, 2) = hk;
  }
  return c;
}

template <class Scalar>
Coords<Scalar> equal_area_coords(Index n) {
  Vector<Scalar> h(n);
  for (Index k = 0; k < n; ++k) h[k] = Scalar(-1) + Scalar(2) * Scalar(k) / Scalar(n - 1);
  return spiral_from_heights(h);
}

// Spiral restricted to the cap about +z of the given angular radius,
// heights spanning [cos(radius), 1].
template <class Scalar>
Coords<Scalar> cap_coords(Index n, Scalar radius) {
  if (n == 1) {
    Coords<Scalar> c(1, 3);
    c << Scalar(0), Scalar(0), Scalar(1);
    return c;
  }
  const Scalar c0 = std::cos(radius);
  Vector<Scalar> h(n);
  for (Index k = 0; k < n; ++k) h[k] = c0 + (Scalar(1) - c0) * Scalar(k) / Scalar(n - 1);
  return spiral_from_heights(h);
}

template <class Scalar>
Eigen::Matrix<Scalar, 3, 3> rotation_z_to(const Vector3<Scalar>& axis) {
  return Eigen::Quaternion<Scalar>::FromTwoVectors(Vector3<Scalar>(0, 0, 1), axis)
      .toRotationMatrix();
}

}  // namespace detail

/// Equal-area generalized spiral of n >= 2 points; n = 2 yields the poles.
template <class Scalar>
PointSet<Scalar> generate_equal_area(Index n) {
  if (n < 2) throw std::invalid_argument("generate_equal_area: need n >= 2");
  return PointSet<Scalar>(detail::equal_area_coords<Scalar>(n));
}

/// Experiment layout: a whole-sphere spiral with the cap interior discarded
/// (membership by distance <= radius), deterministically oversampled and
/// trimmed to n_total - n_cap survivors, plus an n_cap-point spiral inside
/// the cap. Cap points are appended after the survivors.
template <class Scalar>
PointSet<Scalar> generate_experiment_set(Index n_total, const CapSpec<Scalar>& cap, Index n_cap) {
  cap.validate();
  if (n_cap < 0 || n_cap >= n_total)
    throw std::invalid_argument("generate_experiment_set: need 0 <= n_cap < n_total");
  const Index n_out = n_total - n_cap;

  Index n_sphere = std::max<Index>(n_out, 2);
  Coords<Scalar> sphere;
  Index survivors = 0;
  while (true) {
    sphere = detail::equal_area_coords<Scalar>(n_sphere);
    survivors = 0;
    for (Index i = 0; i < n_sphere; ++i)
      if (geodesic_distance(sphere.row(i).transpose(), cap.axis) > cap.radius) ++survivors;
    if (survivors >= n_out) break;
    if (n_sphere > 100 * n_total)
      throw std::invalid_argument("generate_experiment_set: infeasible sizes");
    n_sphere += std::max<Index>(1, n_out - survivors);
  }

  Coords<Scalar> out(n_total, 3);
  Index kept = 0;
  for (Index i = 0; i < n_sphere && kept < n_out; ++i) {
    if (geodesic_distance(sphere.row(i).transpose(), cap.axis) > cap.radius)
      out.row(kept++) = sphere.row(i);
  }
  if (n_cap > 0) {
    Coords<Scalar> inside = detail::cap_coords<Scalar>(n_cap, cap.radius);
    const Eigen::Matrix<Scalar, 3, 3> rot = detail::rotation_z_to(cap.axis);
    out.bottomRows(n_cap) = inside * rot.transpose();
  }
  return PointSet<Scalar>(std::move(out));
}

/// Probe-grid estimate (from below) of the mesh norm
/// h_X = sup_x min_j dist(x, x_j), using an equal-area probe set.
template <class Scalar>
Scalar mesh_norm(const PointSet<Scalar>& points, Index probe_density) {
  if (probe_density < points.n())
    throw std::invalid_argument("mesh_norm: probe_density must be >= point count");
  const Coords<Scalar> probes = detail::equal_area_coords<Scalar>(std::max<Index>(probe_density, 2));
  const Index chunk = 512;
  Scalar min_best_dot = Scalar(1);
  for (Index s = 0; s < probes.rows(); s += chunk) {
    const Index len = std::min(chunk, probes.rows() - s);
    const Matrix<Scalar> dots = probes.middleRows(s, len) * points.coords().transpose();
    const Scalar worst = dots.rowwise().maxCoeff().minCoeff();
    min_best_dot = std::min(min_best_dot, worst);
  }
  return std::acos(std::clamp(min_best_dot, Scalar(-1), Scalar(1)));
}

inline Index default_probe_density(Index n) { return 20 * n; }

/// Minimum pairwise geodesic distance; requires n >= 2.
template <class Scalar>
Scalar min_separation(const PointSet<Scalar>& points) {
  const Index n = points.n();
  if (n < 2) throw std::invalid_argument("min_separation: need n >= 2");
  const Coords<Scalar>& c = points.coords();
  Scalar max_dot = Scalar(-1);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      max_dot = std::max(max_dot, Scalar(c.row(i).dot(c.row(j))));
  return std::acos(std::clamp(max_dot, Scalar(-1), Scalar(1)));
}

/// Count of points within (<=) the cap radius of the cap axis.
template <class Scalar>
Index cap_count(const PointSet<Scalar>& points, const CapSpec<Scalar>& cap) {
  Index c = 0;
  for (Index i = 0; i < points.n(); ++i)
    if (geodesic_distance(points.point(i), cap.axis) <= cap.radius) ++c;
  return c;
}

// --- point-set file format: one "x y z" line per point, '#' comments ---

template <class Scalar>
void write_points(std::ostream& os, const PointSet<Scalar>& points) {
  os << std::setprecision(17);
  const Coords<Scalar>& c = points.coords();
  for (Index i = 0; i < c.rows(); ++i)
    os << c(i, 0) << ' ' << c(i, 1) << ' ' << c(i, 2) << '\n';
}

template <class Scalar>
void write_points(const std::string& path, const PointSet<Scalar>& points) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_points: cannot open " + path);
  write_points(os, points);
}

template <class Scalar>
PointSet<Scalar> read_points(std::istream& is) {
  std::vector<Vector3<Scalar>> pts;
  std::string line;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Vector3<Scalar> p;
    if (!(ls >> p.x() >> p.y() >> p.z()))
      throw std::runtime_error("read_points: malformed line: " + line);
    pts.push_back(p);
  }
  Coords<Scalar> c(static_cast<Index>(pts.size()), 3);
  for (Index i = 0; i < c.rows(); ++i) c.row(i) = pts[static_cast<std::size_t>(i)].transpose();
  return PointSet<Scalar>(std::move(c));
}

template <class Scalar>
PointSet<Scalar> read_points(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_points: cannot open " + path);
  return read_points<Scalar>(is);
}

}  // namespace spherbf
