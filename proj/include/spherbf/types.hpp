#pragma once

#include <Eigen/Core>

#include <numbers>

namespace spherbf {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/** Point coordinates, one unit row vector per point. */
template <class Scalar>
using Coords = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

using Index = Eigen::Index;

template <class Scalar>
inline constexpr Scalar pi_v = std::numbers::pi_v<Scalar>;

}  // namespace spherbf
