#pragma once

#include <sparselow/core/types.hpp>

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sparselow {

enum class Algorithm { iht, riht, rpg };

inline std::string to_string(Algorithm a)
{
    switch (a) {
        case Algorithm::iht:  return "iht";
        case Algorithm::riht: return "riht";
        case Algorithm::rpg:  return "rpg";
    }
    return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name)
{
    if (name == "iht")
        return Algorithm::iht;
    if (name == "riht")
        return Algorithm::riht;
    if (name == "rpg")
        return Algorithm::rpg;
    throw ParameterError("unknown algorithm '" + std::string(name) + "' (expected iht, riht or rpg)");
}

/// Constant step alpha, or Armijo backtracking alpha = beta^p, p <= p_max.
struct StepRule {
    enum class Kind { constant, armijo };

    Kind   kind  = Kind::armijo;
    double alpha = 1.0;
    double beta  = 0.5;
    double gamma = 1e-4;
    int    p_max = 50;

    static StepRule constant(double a = 1.0) { return StepRule{Kind::constant, a, 0.5, 1e-4, 50}; }
    static StepRule armijo(double b = 0.5, double g = 1e-4, int p = 50) { return StepRule{Kind::armijo, 1.0, b, g, p}; }

    void validate() const
    {
        if (kind == Kind::constant && !(alpha > 0.0))
            throw ParameterError("constant step size must be positive");
        if (kind == Kind::armijo) {
            if (!(beta > 0.0 && beta < 1.0))
                throw ParameterError("Armijo beta must lie in (0, 1)");
            if (!(gamma > 0.0))
                throw ParameterError("Armijo gamma must be positive");
            if (p_max < 1)
                throw ParameterError("Armijo p_max must be at least 1");
        }
    }
};

inline constexpr int kDefaultMaxIter    = 5000;
inline constexpr int kDefaultRpgMaxIter = 20000;

struct SolverConfig {
    Algorithm   algorithm = Algorithm::riht;
    ProblemDims dims;
    StepRule    step;
    int         max_iter     = kDefaultMaxIter;
    double      residual_tol = 1e-6;
    /// Stop once ||X - X*||_F / ||X*||_F drops below this (needs `truth`).
    std::optional<double> error_tol;
    std::optional<FactoredMatrix> truth;

    /// Threshold decay factor of the proximal gradient method.
    double tau = 0.99;
    /// Row count of the initial hard thresholding for rpg; defaults to
    /// min(M, (m + k(k - N)) / k).
    std::optional<Index> rpg_initial_sparsity;
    /// Consecutive iterations with an unchanged support rpg needs before
    /// it reports convergence.
    int support_stable_iters = 25;

    /// Overrides the algorithm's start point.
    std::optional<FactoredMatrix> initial;

    void validate() const
    {
        dims.validate();
        step.validate();
        if (max_iter < 0)
            throw ParameterError("max_iter must be nonnegative");
        if (!(residual_tol >= 0.0))
            throw ParameterError("residual tolerance must be nonnegative");
        if (!(tau > 0.0 && tau < 1.0))
            throw ParameterError("rpg decay tau must lie in (0, 1)");
        if (rpg_initial_sparsity && (*rpg_initial_sparsity < 1 || *rpg_initial_sparsity > dims.M))
            throw ParameterError("rpg initial sparsity must lie in [1, M]");
        if (error_tol && !truth)
            throw ParameterError("an error tolerance requires the ground truth");
    }
};

enum class Termination { converged, max_iter, numerical_error };

inline std::string to_string(Termination t)
{
    switch (t) {
        case Termination::converged:       return "converged";
        case Termination::max_iter:        return "maxIter";
        case Termination::numerical_error: return "numericalError";
    }
    return "unknown";
}

struct IterationRecord {
    int        iteration = 0;
    double     objective = 0.0;
    double     residual  = 0.0;
    double     step      = 0.0;
    bool       fallback  = false;
    int        backtracks = 0;
    /// Squared norm of the search direction used by the line search.
    double     direction_norm_sq = 0.0;
    /// Objective at the line-search trial point (differs from `objective`
    /// only for rpg, where soft thresholding follows the search).
    double     trial_objective = 0.0;
    SupportSet support;
    Index      rank = 0;
    bool       rank_deficient = false;
    double     rel_error = std::numeric_limits<double>::quiet_NaN();
    double     mu = std::numeric_limits<double>::quiet_NaN();
    /// k-th largest row norm the rpg threshold was scaled from.
    double     mu_reference = std::numeric_limits<double>::quiet_NaN();
    double     elapsed_seconds = 0.0;
};

struct RunRecord {
    Algorithm                    algorithm = Algorithm::riht;
    std::vector<IterationRecord> trace;
    FactoredMatrix         final_iterate;
    Termination                  termination = Termination::max_iter;
    std::string                  message;

    /// Number of updates performed (the start point is entry 0).
    int iterations() const { return trace.empty() ? 0 : trace.back().iteration; }

    double final_rel_error() const
    {
        return trace.empty() ? std::numeric_limits<double>::quiet_NaN() : trace.back().rel_error;
    }

    /// First iteration whose relative error is at most `threshold`, or -1.
    int iterations_to(double threshold) const
    {
        for (const auto& e : trace)
            if (e.rel_error <= threshold)
                return e.iteration;
        return -1;
    }
};

} // namespace sparselow
