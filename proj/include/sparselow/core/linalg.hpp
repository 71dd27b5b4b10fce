#pragma once
//
// Small dense kernels: deterministic thin SVD with a fixed sign
// convention, thin QR, and the "truncate an embedded row block" routine
// every projection is built from.
//

#include <sparselow/core/types.hpp>

#include <limits>
#include <sstream>

namespace sparselow {

struct ThinSvd {
    Matrix U;
    Vector sigma;
    Matrix V;
};

namespace detail {

// Flip column pairs so that the first nonzero entry of each U column is
// nonnegative.
inline void canonicalize_signs(Matrix& U, Matrix& V)
{
    constexpr double tiny = 1e-12;
    for (Index j = 0; j < U.cols(); ++j) {
        for (Index i = 0; i < U.rows(); ++i) {
            const double u = U(i, j);
            if (std::abs(u) > tiny) {
                if (u < 0.0) {
                    U.col(j) *= -1.0;
                    V.col(j) *= -1.0;
                }
                break;
            }
        }
    }
}

} // namespace detail

/// Thin SVD with singular values in nonincreasing order.
inline ThinSvd thin_svd(const Matrix& A)
{
    ThinSvd out;
    const Index p = std::min(A.rows(), A.cols());
    if (p == 0) {
        out.U     = Matrix(A.rows(), 0);
        out.sigma = Vector(0);
        out.V     = Matrix(A.cols(), 0);
        return out;
    }
    if (!A.allFinite()) {
        std::ostringstream msg;
        msg << "SVD input of size " << A.rows() << "x" << A.cols() << " contains non-finite entries";
        throw NumericalError(msg.str());
    }

    // JacobiSVD is the accurate choice for the small blocks the solvers
    // produce; BDCSVD takes over for large dense inputs.
    if (p <= 32) {
        Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success)
            throw NumericalError("JacobiSVD failed on " + std::to_string(A.rows()) + "x" +
                                 std::to_string(A.cols()) + " input");
        out.U     = svd.matrixU();
        out.sigma = svd.singularValues();
        out.V     = svd.matrixV();
    }
    else {
        Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success)
            throw NumericalError("BDCSVD failed on " + std::to_string(A.rows()) + "x" +
                                 std::to_string(A.cols()) + " input");
        out.U     = svd.matrixU();
        out.sigma = svd.singularValues();
        out.V     = svd.matrixV();
    }
    detail::canonicalize_signs(out.U, out.V);
    return out;
}

/// Number of singular values above the usual rank-revealing threshold.
inline Index numerical_rank(const Vector& sigma, Index rows, Index cols)
{
    if (sigma.size() == 0 || !(sigma[0] > 0.0))
        return 0;
    const double tol = sigma[0] * double(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
    Index r = 0;
    while (r < sigma.size() && sigma[r] > tol)
        ++r;
    return r;
}

struct ThinQr {
    Matrix Q; // rows x p, orthonormal, p = min(rows, cols)
    Matrix R; // p x cols
};

inline ThinQr thin_qr(const Matrix& A)
{
    const Index p = std::min(A.rows(), A.cols());
    Eigen::HouseholderQR<Matrix> qr(A);
    ThinQr out;
    out.Q = qr.householderQ() * Matrix::Identity(A.rows(), p);
    out.R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    return out;
}

/// Rows with nonzero Euclidean norm.
inline SupportSet nonzero_rows(const Matrix& X)
{
    SupportSet out;
    for (Index i = 0; i < X.rows(); ++i)
        if (X.row(i).squaredNorm() > 0.0)
            out.indices.push_back(i);
    return out;
}

inline Matrix gather_rows(const Matrix& X, const SupportSet& rows)
{
    Matrix out(rows.size(), X.cols());
    for (Index i = 0; i < rows.size(); ++i)
        out.row(i) = X.row(rows.indices[static_cast<std::size_t>(i)]);
    return out;
}

inline Matrix scatter_rows(const Matrix& block, const SupportSet& rows, Index total_rows)
{
    Matrix out = Matrix::Zero(total_rows, block.cols());
    for (Index i = 0; i < rows.size(); ++i)
        out.row(rows.indices[static_cast<std::size_t>(i)]) = block.row(i);
    return out;
}

//
// Best rank-k approximation of the M x N matrix whose rows in `rows` are
// block * right^T and whose other rows vanish. `right` must have
// orthonormal columns; pass nullptr for the identity.
//
inline FactoredMatrix truncate_embedded(const Matrix& block, const SupportSet& rows, Index total_rows,
                                        const Matrix* right, Index k)
{
    const Index cols = right ? right->rows() : block.cols();
    if (block.rows() == 0)
        return FactoredMatrix::zero(total_rows, cols);

    const ThinSvd svd = thin_svd(block);
    const Index   r   = std::min(k, numerical_rank(svd.sigma, block.rows(), block.cols()));

    Matrix U = scatter_rows(svd.U.leftCols(r), rows, total_rows);
    Matrix V = right ? Matrix(*right * svd.V.leftCols(r)) : Matrix(svd.V.leftCols(r));
    return FactoredMatrix(std::move(U), svd.sigma.head(r), std::move(V), rows);
}

} // namespace sparselow
