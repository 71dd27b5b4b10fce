#pragma once
//
// Row hard thresholding H_s, rank truncation T_k, the two composite
// quasi-projections onto rank-k / row-s-sparse matrices, and row-wise
// soft thresholding.
//

#include <sparselow/core/tangent.hpp>

#include <numeric>

namespace sparselow {

/// Euclidean norm of every row.
inline Vector row_norms(const Matrix& X) { return X.rowwise().norm(); }

/// Indices of the s largest entries of `norms`, ties resolved toward the
/// smaller index, returned in ascending order.
inline SupportSet select_largest_rows(const Vector& norms, Index s)
{
    const Index M = norms.size();
    if (s < 1 || s > M)
        throw ParameterError("row sparsity s=" + std::to_string(s) + " must lie in [1, " + std::to_string(M) + "]");

    std::vector<Index> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), Index{0});
    const auto larger = [&norms](Index a, Index b) {
        return norms[a] > norms[b] || (norms[a] == norms[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + s, order.end(), larger);
    order.resize(static_cast<std::size_t>(s));
    std::sort(order.begin(), order.end());
    return SupportSet{std::move(order)};
}

/// Keeps the s rows of largest norm and zeroes the rest.
inline std::pair<Matrix, SupportSet> hard_threshold_rows(const Matrix& X, Index s)
{
    SupportSet support = select_largest_rows(row_norms(X), s);
    Matrix     out     = scatter_rows(gather_rows(X, support), support, X.rows());
    return {std::move(out), std::move(support)};
}

inline void check_rank(Index k, Index rows, Index cols)
{
    if (k < 1 || k > std::min(rows, cols))
        throw ParameterError("rank k=" + std::to_string(k) + " must lie in [1, min(" + std::to_string(rows) + ", " +
                             std::to_string(cols) + ")]");
}

/// Best rank-k approximation; the support of the result is the set of
/// nonzero rows of X.
inline FactoredMatrix truncate_rank(const Matrix& X, Index k)
{
    check_rank(k, X.rows(), X.cols());
    const SupportSet rows = nonzero_rows(X);
    return truncate_embedded(gather_rows(X, rows), rows, X.rows(), nullptr, k);
}

/// Best rank-k approximation of left * core * right^T.
inline FactoredMatrix truncate_rank(const CompactFactorization& X, Index k)
{
    const ThinSvd svd = thin_svd(X.core);
    const Index   r   = std::min(k, numerical_rank(svd.sigma, X.core.rows(), X.core.cols()));
    Matrix        U   = X.left * svd.U.leftCols(r);
    Matrix        V   = X.right * svd.V.leftCols(r);
    // Sign convention is re-established on the ambient factor.
    detail::canonicalize_signs(U, V);
    SupportSet support = nonzero_rows(U);
    return FactoredMatrix(std::move(U), svd.sigma.head(r), std::move(V), std::move(support));
}

/// P_{k,s} = T_k o H_s on a dense matrix.
inline FactoredMatrix quasi_proj_ks(const Matrix& X, Index k, Index s)
{
    check_rank(k, s, X.cols());
    const SupportSet support = select_largest_rows(row_norms(X), s);
    return truncate_embedded(gather_rows(X, support), support, X.rows(), nullptr, k);
}

/// P_{k,s} on left * core * right^T: the s largest rows of left * core are
/// selected and only an s x rank(core) SVD is computed.
inline FactoredMatrix quasi_proj_ks(const CompactFactorization& X, Index k, Index s)
{
    check_rank(k, s, X.right.rows());
    const Matrix     scaled  = X.left * X.core;
    const SupportSet support = select_largest_rows(row_norms(scaled), s);
    return truncate_embedded(gather_rows(scaled, support), support, X.left.rows(), &X.right, k);
}

/// P_{k,s} on a factored matrix (rows of U diag(sigma)).
inline FactoredMatrix quasi_proj_ks(const FactoredMatrix& X, Index k, Index s)
{
    check_rank(k, s, X.cols());
    const Matrix     scaled  = X.scaled_left();
    const SupportSet support = select_largest_rows(row_norms(scaled), s);
    return truncate_embedded(gather_rows(scaled, support), support, X.rows(), &X.V(), k);
}

namespace detail {

// H_s applied to U diag(sigma) V^T followed by re-compaction of the
// surviving rows.
inline FactoredMatrix threshold_factored(const FactoredMatrix& T, Index k, Index s)
{
    const Matrix     scaled  = T.scaled_left();
    const SupportSet support = select_largest_rows(row_norms(scaled), s);
    return truncate_embedded(gather_rows(scaled, support), support, T.rows(), &T.V(), k);
}

} // namespace detail

/// \hat P_{k,s} = H_s o T_k on a dense matrix.
inline FactoredMatrix quasi_proj_hat_ks(const Matrix& X, Index k, Index s)
{
    check_rank(k, X.rows(), X.cols());
    if (s < 1 || s > X.rows())
        throw ParameterError("row sparsity s=" + std::to_string(s) + " out of range");
    return detail::threshold_factored(truncate_rank(X, k), k, s);
}

/// \hat P_{k,s} on a compact factorization; never forms the M x N matrix.
inline FactoredMatrix quasi_proj_hat_ks(const CompactFactorization& X, Index k, Index s)
{
    if (s < 1 || s > X.left.rows())
        throw ParameterError("row sparsity s=" + std::to_string(s) + " out of range");
    return detail::threshold_factored(truncate_rank(X, k), k, s);
}

inline FactoredMatrix quasi_proj_hat_ks(const TangentVector& xi, Index k, Index s)
{
    return quasi_proj_hat_ks(to_compact(xi), k, s);
}

/// Row scaling factors of S^mu: (||y_i|| - mu) / ||y_i|| if ||y_i|| > mu,
/// zero otherwise.
inline Vector soft_threshold_factors(const Vector& norms, double mu)
{
    if (!(mu >= 0.0))
        throw ParameterError("soft threshold mu must be nonnegative, got " + std::to_string(mu));
    Vector d(norms.size());
    for (Index i = 0; i < norms.size(); ++i)
        d[i] = norms[i] > mu ? (norms[i] - mu) / norms[i] : 0.0;
    return d;
}

/// Row-wise soft thresholding of a dense matrix.
inline Matrix soft_threshold_rows(const Matrix& X, double mu)
{
    const Vector d = soft_threshold_factors(row_norms(X), mu);
    return d.asDiagonal() * X;
}

/// Row-wise soft thresholding of U diag(sigma) V^T. The result is
/// re-compacted; its rank never exceeds the input rank.
inline FactoredMatrix soft_threshold_rows(const FactoredMatrix& X, double mu)
{
    const Matrix scaled = X.scaled_left();
    const Vector d      = soft_threshold_factors(row_norms(scaled), mu);
    SupportSet   keep;
    for (Index i = 0; i < d.size(); ++i)
        if (d[i] > 0.0)
            keep.indices.push_back(i);
    Matrix block = gather_rows(scaled, keep);
    for (Index i = 0; i < keep.size(); ++i)
        block.row(i) *= d[keep.indices[static_cast<std::size_t>(i)]];
    return truncate_embedded(block, keep, X.rows(), &X.V(), std::max<Index>(X.rank(), 1));
}

} // namespace sparselow
