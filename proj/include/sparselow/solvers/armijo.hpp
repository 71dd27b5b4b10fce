#pragma once

#include <sparselow/solvers/config.hpp>

#include <cmath>

namespace sparselow {

struct ArmijoResult {
    double alpha      = 1.0;
    bool   fallback   = false;
    int    backtracks = 0;
};

//
// Backtracking on alpha = beta^p, p = 0, 1, ..., p_max: accept the first p
// with
//
//   f_current - objective_at(beta^p) >= gamma * beta^p * direction_norm_sq.
//
// objective_at must evaluate f at the *projected* trial point. If no p
// qualifies, alpha = 1 is returned with fallback set.
//
template <class ObjectiveAt>
ArmijoResult armijo_search(double f_current, double direction_norm_sq, ObjectiveAt&& objective_at,
                           const StepRule& rule)
{
    double alpha = 1.0;
    for (int p = 0; p <= rule.p_max; ++p) {
        const double f_trial = objective_at(alpha);
        if (f_current - f_trial >= rule.gamma * alpha * direction_norm_sq)
            return ArmijoResult{alpha, false, p};
        alpha *= rule.beta;
    }
    return ArmijoResult{1.0, true, rule.p_max + 1};
}

} // namespace sparselow
