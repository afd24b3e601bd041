#pragma once

// Dense linear algebra kernels shared by the alignment and refinement code.
// Everything here is templated on the Eigen expression type so callers can
// pass blocks, maps or plain matrices without copies.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace xling {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ColVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Embedding matrices are row-per-token.
using Matrix = RowMatrix<double>;
using Square = SquareMatrix<double>;
using Vector = ColVector<double>;

template <typename Derived>
typename Derived::Scalar max_abs_orthogonality_error(const Eigen::MatrixBase<Derived>& w) {
    using Scalar = typename Derived::Scalar;
    const auto gram = (w.transpose() * w).eval();
    return (gram - SquareMatrix<Scalar>::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

// Flip paired singular vectors so that the largest-magnitude entry of every
// column of `u` is non-negative. The product u * diag(s) * v^T is unchanged.
template <typename DerivedU, typename DerivedV>
void canonicalize_svd_signs(Eigen::MatrixBase<DerivedU>& u, Eigen::MatrixBase<DerivedV>& v) {
    for (Index c = 0; c < u.cols(); ++c) {
        Index arg = 0;
        u.col(c).cwiseAbs().maxCoeff(&arg);
        if (u(arg, c) < 0) {
            u.col(c) = -u.col(c);
            if (c < v.cols()) v.col(c) = -v.col(c);
        }
    }
}

template <typename Scalar>
struct CrossCovarianceSvd {
    SquareMatrix<Scalar> u;
    ColVector<Scalar> sigma;
    SquareMatrix<Scalar> v;
};

/// SVD of x^T y with canonical signs. Throws std::runtime_error when the
/// solver reports failure or the input is not finite.
template <typename DerivedX, typename DerivedY>
CrossCovarianceSvd<typename DerivedX::Scalar> cross_covariance_svd(const Eigen::MatrixBase<DerivedX>& x,
                                                                   const Eigen::MatrixBase<DerivedY>& y) {
    using Scalar = typename DerivedX::Scalar;
    const SquareMatrix<Scalar> m = x.transpose() * y;
    if (!m.allFinite()) throw std::runtime_error("cross-covariance matrix has non-finite entries");
    Eigen::JacobiSVD<SquareMatrix<Scalar>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) {
        const auto& s = svd.singularValues();
        throw std::runtime_error("SVD did not converge (largest singular value " + std::to_string(s(0)) +
                                 ", smallest " + std::to_string(s(s.size() - 1)) + ")");
    }
    CrossCovarianceSvd<Scalar> out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    canonicalize_svd_signs(out.u, out.v);
    return out;
}

/// Orthogonal W minimizing ||x W - y||_F (rows of x and y are paired).
template <typename DerivedX, typename DerivedY>
SquareMatrix<typename DerivedX::Scalar> orthogonal_procrustes(const Eigen::MatrixBase<DerivedX>& x,
                                                              const Eigen::MatrixBase<DerivedY>& y) {
    const auto svd = cross_covariance_svd(x, y);
    return svd.u * svd.v.transpose();
}

template <typename Derived>
RowMatrix<typename Derived::Scalar> unit_rows(const Eigen::MatrixBase<Derived>& m) {
    RowMatrix<typename Derived::Scalar> out = m;
    for (Index i = 0; i < out.rows(); ++i) {
        const auto n = out.row(i).norm();
        if (n > 0) out.row(i) /= n;
    }
    return out;
}

template <typename Derived>
RowMatrix<typename Derived::Scalar> center_columns(const Eigen::MatrixBase<Derived>& m) {
    RowMatrix<typename Derived::Scalar> out = m;
    if (out.rows() == 0) return out;
    const auto mean = out.colwise().mean().eval();
    out.rowwise() -= mean;
    return out;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    const auto na = a.norm();
    const auto nb = b.norm();
    if (na == 0 || nb == 0) return 0;
    return a.dot(b) / (na * nb);
}

template <typename Scalar>
struct LinearFit {
    SquareMatrix<Scalar> map;
    bool ridge = false;
    Scalar condition = 0;
};

/// Least-squares M minimizing ||x M - t||_F. Falls back to ridge regression
/// with the given lambda when x has fewer rows than columns or its condition
/// number exceeds max_condition.
template <typename DerivedX, typename DerivedT>
LinearFit<typename DerivedX::Scalar> fit_linear_map(const Eigen::MatrixBase<DerivedX>& x,
                                                    const Eigen::MatrixBase<DerivedT>& t,
                                                    typename DerivedX::Scalar ridge_lambda = 1e-3,
                                                    typename DerivedX::Scalar max_condition = 1e10) {
    using Scalar = typename DerivedX::Scalar;
    using Dense = SquareMatrix<Scalar>;
    const Dense xd = x;
    const Dense td = t;
    LinearFit<Scalar> fit;
    fit.condition = std::numeric_limits<Scalar>::infinity();
    bool degenerate = xd.rows() < xd.cols();
    Eigen::JacobiSVD<Dense> svd;
    if (!degenerate) {
        svd.compute(xd, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        const Scalar smin = s(s.size() - 1);
        fit.condition = smin > 0 ? s(0) / smin : std::numeric_limits<Scalar>::infinity();
        degenerate = !(fit.condition <= max_condition);
    }
    if (degenerate) {
        const Dense gram = xd.transpose() * xd + ridge_lambda * Dense::Identity(xd.cols(), xd.cols());
        fit.map = gram.ldlt().solve(xd.transpose() * td);
        fit.ridge = true;
    } else {
        fit.map = svd.solve(td);
    }
    return fit;
}

}  // namespace xling
