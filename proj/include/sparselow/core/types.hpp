#pragma once
//
// Domain types shared by every part of the library: problem dimensions,
// row supports, factored iterates and tangent vectors of the fixed-rank
// manifold.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparselow {

using Index  = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Structural tolerance used by property checks (projector identities,
/// fast/slow path agreement).
inline constexpr double kStructuralTol = 1e-10;

/// Tolerance for orthonormality of factor columns.
inline constexpr double kOrthonormalityTol = 1e-12;

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

//
// M x N matrices of rank <= k with <= s nonzero rows, observed through m
// linear measurements.
//
struct ProblemDims {
    Index M = 0;
    Index N = 0;
    Index k = 0;
    Index s = 0;
    Index m = 0;

    void validate() const
    {
        if (M < 1 || N < 1)
            throw ParameterError("matrix dimensions must be positive (M=" + std::to_string(M) +
                                 ", N=" + std::to_string(N) + ")");
        if (k < 1)
            throw ParameterError("rank k must be at least 1");
        if (k >= s)
            throw ParameterError("rank must be strictly smaller than the row sparsity (k < s), got k=" +
                                 std::to_string(k) + ", s=" + std::to_string(s));
        if (s > M)
            throw ParameterError("row sparsity s=" + std::to_string(s) + " exceeds row count M=" +
                                 std::to_string(M));
        if (k > N)
            throw ParameterError("rank k=" + std::to_string(k) + " exceeds column count N=" +
                                 std::to_string(N));
        if (m < 1)
            throw ParameterError("measurement count m must be at least 1");
    }

    bool operator==(const ProblemDims&) const = default;
};

/// Sorted set of distinct row indices (0-based).
struct SupportSet {
    std::vector<Index> indices;

    Index size() const { return static_cast<Index>(indices.size()); }
    bool  empty() const { return indices.empty(); }

    bool contains(Index i) const { return std::binary_search(indices.begin(), indices.end(), i); }

    static SupportSet all(Index rows)
    {
        SupportSet out;
        out.indices.resize(static_cast<std::size_t>(rows));
        for (Index i = 0; i < rows; ++i)
            out.indices[static_cast<std::size_t>(i)] = i;
        return out;
    }

    bool operator==(const SupportSet&) const = default;
};

/// Relative Frobenius defect ||Q^T Q - I||_F / sqrt(r).
inline double orthonormality_defect(const Matrix& Q)
{
    if (Q.cols() == 0)
        return 0.0;
    const Matrix gram = Q.transpose() * Q;
    return (gram - Matrix::Identity(Q.cols(), Q.cols())).norm() / std::sqrt(double(Q.cols()));
}

//
// Rank-r matrix U diag(sigma) V^T with orthonormal U, V, nonincreasing
// sigma and an explicit row support containing every nonzero row of U.
//
class FactoredMatrix {
public:
    FactoredMatrix() = default;

    FactoredMatrix(Matrix U, Vector sigma, Matrix V, SupportSet support)
        : U_(std::move(U)), sigma_(std::move(sigma)), V_(std::move(V)), support_(std::move(support))
    {
        if (U_.cols() != sigma_.size() || V_.cols() != sigma_.size())
            throw ParameterError("factor shapes disagree with the number of singular values");
    }

    static FactoredMatrix zero(Index rows, Index cols)
    {
        return FactoredMatrix(Matrix(rows, 0), Vector(0), Matrix(cols, 0), SupportSet{});
    }

    Index rows() const { return U_.rows(); }
    Index cols() const { return V_.rows(); }
    Index rank() const { return sigma_.size(); }

    const Matrix&     U() const { return U_; }
    const Vector&     sigma() const { return sigma_; }
    const Matrix&     V() const { return V_; }
    const SupportSet& support() const { return support_; }

    Matrix densify() const { return U_ * sigma_.asDiagonal() * V_.transpose(); }

    /// U diag(sigma), whose row norms equal the row norms of the matrix.
    Matrix scaled_left() const { return U_ * sigma_.asDiagonal(); }

    double frobenius_norm() const { return sigma_.norm(); }

    /// Checks orthonormality, ordering and the support invariant.
    bool is_valid(double tol = kOrthonormalityTol) const
    {
        if (orthonormality_defect(U_) > tol * 1e2 || orthonormality_defect(V_) > tol * 1e2)
            return false;
        for (Index i = 0; i < sigma_.size(); ++i) {
            if (!(sigma_[i] >= 0.0))
                return false;
            if (i > 0 && sigma_[i] > sigma_[i - 1])
                return false;
        }
        for (Index i = 0; i < U_.rows(); ++i)
            if (!support_.contains(i) && U_.row(i).squaredNorm() != 0.0)
                return false;
        return true;
    }

private:
    Matrix     U_;
    Vector     sigma_;
    Matrix     V_;
    SupportSet support_;
};

//
// Element of the tangent space of the rank-r manifold at `base` =
// U S V^T, stored as
//
//   U * core * V^T + row_update * V^T + U * col_update^T
//
// with U^T row_update = 0 and V^T col_update = 0.
//
struct TangentVector {
    FactoredMatrix base;
    Matrix         core;
    Matrix         row_update;
    Matrix         col_update;

    Matrix densify() const
    {
        const Matrix& U = base.U();
        const Matrix& V = base.V();
        return U * core * V.transpose() + row_update * V.transpose() + U * col_update.transpose();
    }

    /// The three blocks are mutually orthogonal in the Frobenius inner product.
    double squared_norm() const
    {
        return core.squaredNorm() + row_update.squaredNorm() + col_update.squaredNorm();
    }
};

/// left * core * right^T with orthonormal left and right.
struct CompactFactorization {
    Matrix left;
    Matrix core;
    Matrix right;

    Matrix densify() const { return left * core * right.transpose(); }
};

inline bool all_finite(const Matrix& X) { return X.allFinite(); }

} // namespace sparselow
