#pragma once

#include <sparselow/core/random.hpp>
#include <sparselow/operators/operator.hpp>

namespace sparselow {

//
// General measurement operator given by m explicit M x N matrices A_p,
// stored as the rows of an m x (M*N) matrix (column-major vectorization).
//
class DenseOperator {
public:
    DenseOperator(Index rows, Index cols, Matrix measurement_rows)
        : rows_(rows), cols_(cols), A_(std::move(measurement_rows))
    {
        if (A_.cols() != rows_ * cols_)
            throw ParameterError("DenseOperator: measurement rows must have length M*N");
        if (!A_.allFinite())
            throw ParameterError("DenseOperator: measurement matrices must be finite");
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index measurement_count() const { return A_.rows(); }
    Index measurement_size() const { return A_.rows(); }

    /// The p-th measurement matrix A_p.
    Matrix measurement_matrix(Index p) const { return A_.row(p).reshaped(rows_, cols_); }

    const Matrix& measurement_rows() const { return A_; }

    Vector apply(const Matrix& X) const
    {
        detail::check_input_shape(*this, X.rows(), X.cols(), "apply");
        return A_ * X.reshaped();
    }

    Vector apply(const FactoredMatrix& X) const
    {
        detail::check_input_shape(*this, X.rows(), X.cols(), "apply");
        const Matrix dense = X.densify();
        return A_ * dense.reshaped();
    }

    Matrix adjoint(const Vector& z) const
    {
        detail::check_measurement_length(*this, z.size(), "adjoint");
        const Vector flat = A_.transpose() * z;
        return flat.reshaped(rows_, cols_);
    }

    TangentVector projected_adjoint(const FactoredMatrix& base, const Vector& z) const
    {
        detail::check_input_shape(*this, base.rows(), base.cols(), "projected_adjoint");
        return tangent_project(base, adjoint(z));
    }

private:
    Index  rows_;
    Index  cols_;
    Matrix A_;
};

/// Gaussian operator with i.i.d. N(0, 1/m) entries (standard deviation
/// 1/sqrt(m)), so that ||A(X)|| ~ ||X||_F.
inline DenseOperator make_gaussian(Index rows, Index cols, Index m, std::uint64_t seed)
{
    if (rows < 1 || cols < 1 || m < 1)
        throw ParameterError("make_gaussian: dimensions must be positive");
    Rng rng(seed);
    return DenseOperator(rows, cols, gaussian_matrix(rng, m, rows * cols, 1.0 / std::sqrt(double(m))));
}

} // namespace sparselow
