#pragma once
//
// Tangent-space calculus on the fixed-rank manifold: orthogonal projection
// onto the tangent space at a factored point and the compact rank-2r
// factorization of a step X - alpha * xi.
//

#include <sparselow/core/linalg.hpp>

namespace sparselow {

/// P(Z) = U U^T Z + Z V V^T - U U^T Z V V^T at base = U S V^T. A base of
/// rank r < k simply uses its r factors.
inline TangentVector tangent_project(const FactoredMatrix& base, const Matrix& Z)
{
    if (Z.rows() != base.rows() || Z.cols() != base.cols())
        throw ParameterError("tangent_project: Z has shape " + std::to_string(Z.rows()) + "x" +
                             std::to_string(Z.cols()) + ", base has " + std::to_string(base.rows()) + "x" +
                             std::to_string(base.cols()));
    const Matrix& U  = base.U();
    const Matrix& V  = base.V();
    const Matrix  ZV = Z * V;
    const Matrix  UtZ = U.transpose() * Z;

    TangentVector out{base, Matrix(), Matrix(), Matrix()};
    out.core       = UtZ * V;
    out.row_update = ZV - U * out.core;
    out.col_update = UtZ.transpose() - V * out.core.transpose();
    return out;
}

/// Assembles a tangent vector from the three partial contractions
/// U^T G (r x N), G V (M x r) and U^T G V (r x r) of some ambient G.
inline TangentVector tangent_from_contractions(const FactoredMatrix& base, const Matrix& UtG, const Matrix& GV,
                                               const Matrix& UtGV)
{
    TangentVector out{base, UtGV, Matrix(), Matrix()};
    out.row_update = GV - base.U() * UtGV;
    out.col_update = UtG.transpose() - base.V() * UtGV.transpose();
    return out;
}

inline TangentVector zero_tangent(const FactoredMatrix& base)
{
    const Index r = base.rank();
    return TangentVector{base, Matrix::Zero(r, r), Matrix::Zero(base.rows(), r), Matrix::Zero(base.cols(), r)};
}

//
// Orthonormal bases for span[U, row_update] and span[V, col_update]
// computed once per search direction, so that
//
//   base - alpha * direction = left * core(alpha) * right^T
//
// costs only a small matrix product for each trial step.
//
class RetractionFrame {
public:
    RetractionFrame(const FactoredMatrix& base, const TangentVector& direction)
        : sigma_(base.sigma()), direction_core_(direction.core)
    {
        const Index r = base.rank();
        Matrix      left_blocks(base.rows(), 2 * r);
        left_blocks << base.U(), direction.row_update;
        Matrix right_blocks(base.cols(), 2 * r);
        right_blocks << base.V(), direction.col_update;

        ThinQr ql = thin_qr(left_blocks);
        ThinQr qr = thin_qr(right_blocks);
        left_   = std::move(ql.Q);
        right_  = std::move(qr.Q);
        left_r_  = std::move(ql.R);
        right_r_ = std::move(qr.R);
    }

    /// [[S - alpha*K, -alpha*I], [-alpha*I, 0]] mapped through the R factors.
    CompactFactorization at(double alpha) const
    {
        const Index r = sigma_.size();
        Matrix      inner = Matrix::Zero(2 * r, 2 * r);
        inner.topLeftCorner(r, r)     = Matrix(sigma_.asDiagonal()) - alpha * direction_core_;
        inner.topRightCorner(r, r)    = -alpha * Matrix::Identity(r, r);
        inner.bottomLeftCorner(r, r)  = -alpha * Matrix::Identity(r, r);
        return CompactFactorization{left_, left_r_ * inner * right_r_.transpose(), right_};
    }

    const Matrix& left() const { return left_; }
    const Matrix& right() const { return right_; }

private:
    Vector sigma_;
    Matrix direction_core_;
    Matrix left_, right_;
    Matrix left_r_, right_r_;
};

/// base - alpha * direction in compact form (left, core, right).
inline CompactFactorization tangent_retract_combine(const FactoredMatrix& base, const TangentVector& direction,
                                                    double alpha)
{
    if (direction.base.rank() != base.rank() || direction.base.rows() != base.rows() ||
        direction.base.cols() != base.cols())
        throw ParameterError("tangent_retract_combine: direction is attached to a different base point");
    return RetractionFrame(base, direction).at(alpha);
}

/// Compact form of a tangent vector on its own (rank <= 2r).
inline CompactFactorization to_compact(const TangentVector& xi)
{
    const FactoredMatrix zero_sigma(xi.base.U(), Vector::Zero(xi.base.rank()), xi.base.V(), xi.base.support());
    return RetractionFrame(zero_sigma, xi).at(-1.0);
}

} // namespace sparselow
