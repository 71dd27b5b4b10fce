#pragma once

#include <sparselow/core/random.hpp>
#include <sparselow/operators/operator.hpp>

namespace sparselow {

/// D_S o P_T at `base`: tangent projection followed by restriction to the
/// support rows of `base`.
inline Matrix restricted_tangent_project(const FactoredMatrix& base, const Matrix& Z)
{
    Matrix       P    = tangent_project(base, Z).densify();
    const auto&  rows = base.support();
    for (Index i = 0; i < P.rows(); ++i)
        if (!rows.contains(i))
            P.row(i).setZero();
    return P;
}

//
// Power-iteration estimate of || P (I - A^*A) P || where P projects onto
// the tangent space of the rank-k, fixed-support variety at `base`. Each
// iterate ||B v|| (unit v) is a lower bound of the norm; the running
// maximum is returned, so the estimate never decreases with `iterations`.
//
template <MeasurementOperator Op>
double estimate_restricted_spectral_norm(const Op& op, const FactoredMatrix& base, int iterations,
                                         std::uint64_t seed = 0x5eed)
{
    Rng    rng(seed);
    Matrix v = restricted_tangent_project(base, gaussian_matrix(rng, base.rows(), base.cols()));
    double n = v.norm();
    if (n == 0.0)
        return 0.0;
    v /= n;

    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Matrix Bv = restricted_tangent_project(base, v - op.adjoint(op.apply(v)));
        const double nb = Bv.norm();
        estimate        = std::max(estimate, nb);
        if (nb == 0.0)
            break;
        v = Bv / nb;
    }
    return estimate;
}

} // namespace sparselow
