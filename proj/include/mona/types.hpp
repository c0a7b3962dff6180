#pragma once

#include <Eigen/Dense>

namespace mona {

/// Default scalar for all simulation code.
using Real = double;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<Real>;
using Vector = VectorX<Real>;
using IntMatrix = MatrixX<int>;

using Index = Eigen::Index;

}  // namespace mona
