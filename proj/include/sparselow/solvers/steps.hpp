#pragma once
//
// Single updates of the three methods. Each step takes the current iterate
// together with its residual A(X) - y and returns the next iterate with
// its own residual, so that a run never re-measures a point.
//

#include <sparselow/operators/operator.hpp>
#include <sparselow/solvers/armijo.hpp>

namespace sparselow {

struct TrialPoint {
    FactoredMatrix X;
    Vector         residual;
    double         objective = 0.0;
};

struct StepOutcome {
    TrialPoint next;
    double     alpha             = 1.0;
    bool       fallback          = false;
    int        backtracks        = 0;
    double     direction_norm_sq = 0.0;
    double     trial_objective   = 0.0;
    double     mu                = std::numeric_limits<double>::quiet_NaN();
    double     mu_reference      = std::numeric_limits<double>::quiet_NaN();
};

template <MeasurementOperator Op>
TrialPoint measure(const Op& op, const Vector& y, FactoredMatrix X)
{
    Vector r = op.apply(X) - y;
    double f = 0.5 * r.squaredNorm();
    return TrialPoint{std::move(X), std::move(r), f};
}

namespace detail {

//
// Runs the step rule over trial points produced by `trial_at(alpha)`,
// which must return the measured, projected trial point. The alpha = 1
// trial (p = 0) is kept, since the Armijo fallback returns to it.
//
template <class TrialAt>
StepOutcome search(double f_current, double direction_norm_sq, TrialAt&& trial_at, const StepRule& rule)
{
    StepOutcome out;
    out.direction_norm_sq = direction_norm_sq;

    if (rule.kind == StepRule::Kind::constant) {
        out.alpha           = rule.alpha;
        out.next            = trial_at(rule.alpha);
        out.trial_objective = out.next.objective;
        return out;
    }

    std::optional<TrialPoint> unit_trial;
    std::optional<TrialPoint> last;
    const auto objective_at = [&](double alpha) {
        last = trial_at(alpha);
        if (alpha == 1.0)
            unit_trial = *last;
        return last->objective;
    };
    const ArmijoResult res = armijo_search(f_current, direction_norm_sq, objective_at, rule);
    out.alpha           = res.alpha;
    out.fallback        = res.fallback;
    out.backtracks      = res.backtracks;
    out.next            = res.fallback ? std::move(*unit_trial) : std::move(*last);
    out.trial_objective = out.next.objective;
    return out;
}

} // namespace detail

inline FactoredMatrix scaled(const FactoredMatrix& X, double alpha)
{
    return FactoredMatrix(X.U(), alpha * X.sigma(), X.V(), X.support());
}

//
// First step from X0 = 0: (T_k o H_s)(alpha0 A^* y). The projection is
// positively homogeneous, so it is computed once and only rescaled inside
// the line search.
//
template <MeasurementOperator Op>
StepOutcome initial_step(const Op& op, const Vector& y, Index k, Index s, const StepRule& rule)
{
    const Matrix         D  = gradient_adjoint(op, y);
    const FactoredMatrix P  = quasi_proj_ks(D, k, s);
    const Vector         AP = op.apply(P);

    auto trial_at = [&](double alpha) {
        Vector r = alpha * AP - y;
        double f = 0.5 * r.squaredNorm();
        return TrialPoint{scaled(P, alpha), std::move(r), f};
    };
    return detail::search(0.5 * y.squaredNorm(), D.squaredNorm(), trial_at, rule);
}

/// X+ = (T_k o H_s)(X - alpha A^*(A(X) - y)) with a dense gradient.
template <MeasurementOperator Op>
StepOutcome iht_step(const Op& op, const Vector& y, const TrialPoint& current, Index k, Index s,
                     const StepRule& rule)
{
    const Matrix G  = gradient_adjoint(op, current.residual);
    const Matrix Xd = current.X.densify();
    auto trial_at = [&](double alpha) { return measure(op, y, quasi_proj_ks(Matrix(Xd - alpha * G), k, s)); };
    return detail::search(current.objective, G.squaredNorm(), trial_at, rule);
}

/// X+ = (T_k o H_s)(X - alpha P_T A^*(A(X) - y)), entirely in factored form.
template <MeasurementOperator Op>
StepOutcome riht_step(const Op& op, const Vector& y, const TrialPoint& current, Index k, Index s,
                      const StepRule& rule)
{
    const TangentVector   xi = gradient_projected_adjoint(op, current.X, current.residual);
    const RetractionFrame frame(current.X, xi);
    auto trial_at = [&](double alpha) { return measure(op, y, quasi_proj_ks(frame.at(alpha), k, s)); };
    return detail::search(current.objective, xi.squared_norm(), trial_at, rule);
}

/// k-th largest row norm of a factored matrix (0 if it has fewer rows).
inline double kth_largest_row_norm(const FactoredMatrix& X, Index k)
{
    Vector norms = row_norms(X.scaled_left());
    if (k > norms.size() || k < 1)
        return 0.0;
    std::nth_element(norms.data(), norms.data() + (k - 1), norms.data() + norms.size(), std::greater<double>());
    return norms[k - 1];
}

//
// X+ = (S^mu o T_k)(X - alpha P_T A^*(A(X) - y)); the line search runs on
// the retracted gradient step alone and mu = tau^l times the k-th largest
// row norm of the accepted trial point.
//
template <MeasurementOperator Op>
StepOutcome rpg_step(const Op& op, const Vector& y, const TrialPoint& current, Index k, int iteration, double tau,
                     const StepRule& rule)
{
    const TangentVector   xi = gradient_projected_adjoint(op, current.X, current.residual);
    const RetractionFrame frame(current.X, xi);
    auto trial_at = [&](double alpha) { return measure(op, y, truncate_rank(frame.at(alpha), k)); };
    StepOutcome out = detail::search(current.objective, xi.squared_norm(), trial_at, rule);

    out.mu_reference = kth_largest_row_norm(out.next.X, k);
    out.mu           = std::pow(tau, double(iteration)) * out.mu_reference;
    out.next         = measure(op, y, soft_threshold_rows(out.next.X, out.mu));
    return out;
}

} // namespace sparselow
