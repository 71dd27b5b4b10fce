#pragma once
//
// Brute-force references. These are deliberately slow: they exist so the
// optimality claims behind the fast projections can be checked on small
// instances.
//

#include <sparselow/core/projections.hpp>
#include <sparselow/operators/dense_operator.hpp>
#include <sparselow/solvers/config.hpp>

namespace sparselow::oracle {

class BudgetExceeded : public ParameterError {
public:
    using ParameterError::ParameterError;
};

struct OracleBudget {
    std::uint64_t max_support_enumeration = 200'000;
};

/// C(n, r), saturating at UINT64_MAX.
inline std::uint64_t binomial(Index n, Index r)
{
    if (r < 0 || r > n)
        return 0;
    r = std::min(r, n - r);
    unsigned __int128 acc = 1;
    for (Index i = 1; i <= r; ++i) {
        acc = acc * static_cast<unsigned __int128>(n - r + i) / static_cast<unsigned __int128>(i);
        if (acc > std::numeric_limits<std::uint64_t>::max())
            return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(acc);
}

/// Calls visit(support) for every s-subset of {0..M-1} in lexicographic order.
template <class Visit>
void for_each_support(Index M, Index s, Visit&& visit)
{
    SupportSet S;
    S.indices.resize(static_cast<std::size_t>(s));
    for (Index i = 0; i < s; ++i)
        S.indices[static_cast<std::size_t>(i)] = i;
    while (true) {
        visit(static_cast<const SupportSet&>(S));
        Index i = s - 1;
        while (i >= 0 && S.indices[static_cast<std::size_t>(i)] == M - s + i)
            --i;
        if (i < 0)
            return;
        ++S.indices[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < s; ++j)
            S.indices[static_cast<std::size_t>(j)] = S.indices[static_cast<std::size_t>(j - 1)] + 1;
    }
}

struct ExactProjection {
    FactoredMatrix projection;
    SupportSet     support;
    /// sigma_1^2 + ... + sigma_k^2 of the selected row block.
    double         captured_energy = 0.0;
    std::uint64_t  candidates      = 0;
};

//
// Metric projection onto {rank <= k, <= s nonzero rows}: the rank-k
// truncation of the s-row block maximizing the sum of its k largest
// squared singular values. Ties keep the lexicographically first support.
//
inline ExactProjection exact_projection(const Matrix& X, Index k, Index s, const OracleBudget& budget = {})
{
    const Index M = X.rows();
    if (s < 1 || s > M)
        throw ParameterError("exact_projection: s out of range");
    check_rank(k, s, X.cols());
    const std::uint64_t count = binomial(M, s);
    if (count > budget.max_support_enumeration)
        throw BudgetExceeded("exact_projection: C(" + std::to_string(M) + ", " + std::to_string(s) + ") = " +
                             std::to_string(count) + " supports exceed the budget of " +
                             std::to_string(budget.max_support_enumeration));

    ExactProjection best;
    best.captured_energy = -1.0;
    for_each_support(M, s, [&](const SupportSet& S) {
        const Vector sv = thin_svd(gather_rows(X, S)).sigma;
        const double e  = sv.head(std::min<Index>(k, sv.size())).squaredNorm();
        ++best.candidates;
        if (e > best.captured_energy) {
            best.captured_energy = e;
            best.support         = S;
        }
    });
    best.projection = truncate_embedded(gather_rows(X, best.support), best.support, M, nullptr, k);

    // Internal consistency: no enumerated candidate may be closer.
    const double d_best = (X - best.projection.densify()).norm();
    for_each_support(M, s, [&](const SupportSet& S) {
        const double d = (X - truncate_embedded(gather_rows(X, S), S, M, nullptr, k).densify()).norm();
        if (d < d_best * (1.0 - 1e-12) - 1e-14)
            throw NumericalError("exact_projection: a candidate support is closer than the selected one");
    });
    return best;
}

/// Distance from X to the rank-k, row-s-sparse set.
inline double distance_to_set(const Matrix& X, Index k, Index s, const OracleBudget& budget = {})
{
    return (X - exact_projection(X, k, s, budget).projection.densify()).norm();
}

//
// argmin_x mu ||x|| + 1/2 ||x - y||^2 by nested grid search over the
// scaling x = t y, t in [0, 1] (the minimizer is collinear with y). Each
// level refines a 1001-point grid around the previous best until the step
// in t falls below 1e-12. The cost is flat to second order at the
// minimizer, so the result is accurate to about sqrt(eps) * ||y||.
//
inline Vector exact_prox_rowwise(const Vector& y, double mu)
{
    if (!(mu >= 0.0))
        throw ParameterError("exact_prox_rowwise: mu must be nonnegative");
    const double ny = y.norm();
    if (ny == 0.0)
        return Vector::Zero(y.size());
    const auto cost = [&](double t) { return mu * t * ny + 0.5 * (1.0 - t) * (1.0 - t) * ny * ny; };

    double lo = 0.0, hi = 1.0, best = 0.0;
    constexpr int points = 1000;
    while (hi - lo > 1e-12) {
        const double h      = (hi - lo) / points;
        double       best_c = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= points; ++i) {
            const double t = lo + h * i;
            const double c = cost(t);
            if (c < best_c) {
                best_c = c;
                best   = t;
            }
        }
        lo = std::max(0.0, best - h);
        hi = std::min(1.0, best + h);
    }
    return best * y;
}

enum class Variant { iht, riht, rpg };

struct ReferenceStepParams {
    Index  k   = 1;
    Index  s   = 1;
    /// rpg only: mu = tau^iteration * (k-th largest row norm).
    double tau       = 0.99;
    int    iteration = 1;
};

//
// One update of the chosen method at step size alpha, in plain dense
// arithmetic: dense gradient, dense tangent projection formula, dense
// projections.
//
inline Matrix dense_reference_step(const DenseOperator& op, const Vector& y, const FactoredMatrix& X,
                                   Variant variant, double alpha, const ReferenceStepParams& params)
{
    const Matrix Xd = X.densify();
    const Vector r  = op.measurement_rows() * Xd.reshaped() - y;
    const Matrix G  = Matrix((op.measurement_rows().transpose() * r).reshaped(Xd.rows(), Xd.cols()));

    if (variant == Variant::iht)
        return quasi_proj_ks(Matrix(Xd - alpha * G), params.k, params.s).densify();

    const Matrix& U  = X.U();
    const Matrix& V  = X.V();
    const Matrix  PU = U * U.transpose();
    const Matrix  PV = V * V.transpose();
    const Matrix  PG = PU * G + G * PV - PU * G * PV;
    const Matrix  Y  = Xd - alpha * PG;

    if (variant == Variant::riht)
        return quasi_proj_ks(Y, params.k, params.s).densify();

    const Matrix Tk     = truncate_rank(Y, params.k).densify();
    Vector       norms  = Tk.rowwise().norm();
    std::sort(norms.data(), norms.data() + norms.size(), std::greater<double>());
    const double mu = std::pow(params.tau, double(params.iteration)) * norms[params.k - 1];
    return soft_threshold_rows(Tk, mu);
}

} // namespace sparselow::oracle
