#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <utility>

#include "mona/types.hpp"

namespace mona {

/// Relative singular-value threshold below which directions count as null.
inline constexpr Real kRankTolerance = 1e-10;

template <typename Scalar>
struct NullSpace {
    Index dimension = 0;
    MatrixX<Scalar> basis;  // orthonormal columns spanning the null space
    Index rank = 0;
};

/// Null space of a dense matrix via SVD. Singular values at or below
/// tol·σ_max count as zero (every direction, if σ_max = 0). The basis
/// columns are orthonormal and satisfy ‖M b‖ ≤ tol·σ_max up to roundoff.
template <typename Derived>
NullSpace<typename Derived::Scalar> null_space_dim(const Eigen::MatrixBase<Derived>& m,
                                                   typename Derived::Scalar tol = kRankTolerance) {
    using Scalar = typename Derived::Scalar;
    using Mat = MatrixX<Scalar>;

    NullSpace<Scalar> result;
    const Index cols = m.cols();
    if (cols == 0) {
        result.basis = Mat(0, 0);
        return result;
    }
    if (m.rows() == 0) {
        // The map from R^cols into R^0 annihilates everything.
        result.dimension = cols;
        result.basis = Mat::Identity(cols, cols);
        return result;
    }

    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const Scalar threshold = tol * sigma(0);
    Index rank = 0;
    for (Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > threshold) ++rank;

    result.rank = rank;
    result.dimension = cols - rank;
    result.basis = svd.matrixV().rightCols(result.dimension);
    return result;
}

/// Numerical rank under the same threshold rule as null_space_dim.
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& m,
                     typename Derived::Scalar tol = kRankTolerance) {
    return null_space_dim(m, tol).rank;
}

/// Horizontal concatenation [a, b, ...] of same-height blocks (any block may
/// have zero columns).
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> hcat(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b) {
    MatrixX<typename DerivedA::Scalar> out(a.rows(), a.cols() + b.cols());
    out.leftCols(a.cols()) = a;
    out.rightCols(b.cols()) = b;
    return out;
}

template <typename DerivedA, typename DerivedB, typename... Rest>
MatrixX<typename DerivedA::Scalar> hcat(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b,
                                        const Rest&... rest) {
    return hcat(hcat(a, b), rest...);
}

/// Least-squares solution of M y = r with the same rank threshold as
/// null_space_dim; returns the minimum-norm minimizer.
template <typename Scalar>
VectorX<Scalar> least_squares_solve(const MatrixX<Scalar>& m, const VectorX<Scalar>& r,
                                    Scalar tol = kRankTolerance) {
    if (m.cols() == 0) return VectorX<Scalar>(0);
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(tol);
    return svd.solve(r);
}

}  // namespace mona
