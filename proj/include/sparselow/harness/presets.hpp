#pragma once
//
// Built-in experiment presets. "gaussian-200" and "fourier-150" run on a
// laptop in minutes; "gaussian-1000" is the large Gaussian grid.
//

#include <sparselow/harness/experiment.hpp>

namespace sparselow::harness {

inline SolverSpec adaptive(Algorithm a, int max_iter = 0, double tau = 0.99)
{
    SolverSpec s;
    s.algorithm = a;
    s.step      = StepRule::armijo();
    s.max_iter  = max_iter;
    s.tau       = tau;
    return s;
}

/// Gaussian measurements, M = 200, k = 2, N = s.
inline ExperimentSpec preset_gaussian_200()
{
    ExperimentSpec spec;
    spec.name       = "gaussian-200";
    spec.backend    = Backend::gaussian;
    spec.M          = 200;
    spec.k          = 2;
    spec.m_values   = {60, 90, 135, 200, 300, 450, 675};
    spec.s_values   = {8, 16, 32};
    spec.n_equals_s = true;
    spec.trials     = 10;
    spec.solvers    = {adaptive(Algorithm::iht), adaptive(Algorithm::riht)};
    return spec;
}

/// Gaussian measurements at the original row dimension M = 1000, k = 3.
inline ExperimentSpec preset_gaussian_1000()
{
    ExperimentSpec spec;
    spec.name       = "gaussian-1000";
    spec.backend    = Backend::gaussian;
    spec.M          = 1000;
    spec.k          = 3;
    spec.m_values   = {100, 150, 225, 340, 510, 765, 1150};
    spec.s_values   = {10, 20, 40};
    spec.n_equals_s = true;
    spec.trials     = 10;
    spec.solvers    = {adaptive(Algorithm::iht), adaptive(Algorithm::riht)};
    return spec;
}

/// Fourier blind deconvolution, M = 150, N = 50, k = 1.
inline ExperimentSpec preset_fourier_150()
{
    ExperimentSpec spec;
    spec.name     = "fourier-150";
    spec.backend  = Backend::fourier;
    spec.M        = 150;
    spec.k        = 1;
    spec.m_values = {100, 150, 200, 300};
    spec.s_values = {2, 4, 8};
    spec.N_values = {50};
    spec.trials   = 10;
    spec.solvers  = {adaptive(Algorithm::iht), adaptive(Algorithm::riht), adaptive(Algorithm::rpg, 5000, 0.999)};
    return spec;
}

/// The Table 2 setting: M = 150, N = 50, k = 1, s = 3, m = 200.
inline TraceSpec preset_trace(Backend backend)
{
    TraceSpec spec;
    spec.name    = backend == Backend::fourier ? "trace-fourier" : "trace-rankone";
    spec.backend = backend;
    spec.solvers = {adaptive(Algorithm::iht, 5000), adaptive(Algorithm::riht, 5000),
                    adaptive(Algorithm::rpg, 40000, 0.999)};
    return spec;
}

inline std::vector<std::string> phase_preset_names() { return {"gaussian-200", "gaussian-1000", "fourier-150"}; }
inline std::vector<std::string> trace_preset_names() { return {"trace-fourier", "trace-rankone"}; }

inline ExperimentSpec phase_preset(std::string_view name)
{
    if (name == "gaussian-200")
        return preset_gaussian_200();
    if (name == "gaussian-1000")
        return preset_gaussian_1000();
    if (name == "fourier-150")
        return preset_fourier_150();
    throw ParameterError("unknown phase preset '" + std::string(name) + "'");
}

inline TraceSpec trace_preset(std::string_view name)
{
    if (name == "trace-fourier")
        return preset_trace(Backend::fourier);
    if (name == "trace-rankone")
        return preset_trace(Backend::rank_one);
    throw ParameterError("unknown trace preset '" + std::string(name) + "'");
}

} // namespace sparselow::harness
