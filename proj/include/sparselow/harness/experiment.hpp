#pragma once
//
// Phase-transition grids and convergence traces.
//

#include <sparselow/harness/instance.hpp>
#include <sparselow/harness/spec.hpp>
#include <sparselow/solvers/solvers.hpp>

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace sparselow::harness {

/// Runs task(i) for i in [0, count) on up to `jobs` threads (0 = hardware
/// concurrency). The first exception thrown by a task is rethrown.
template <class Task>
void parallel_for(std::size_t count, unsigned jobs, Task&& task)
{
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(count, 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr       error;
    std::mutex               error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                task(i);
            }
            catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = count;
            }
        }
    };
    if (jobs == 1) {
        worker();
    }
    else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
}

inline SolverConfig make_solver_config(const SolverSpec& solver, const ProblemDims& dims,
                                       const FactoredMatrix& truth)
{
    SolverConfig cfg;
    cfg.algorithm = solver.algorithm;
    cfg.dims      = dims;
    cfg.step      = solver.step;
    cfg.max_iter  = solver.effective_max_iter();
    cfg.tau       = solver.tau;
    cfg.truth     = truth;
    return cfg;
}

struct TrialResult {
    std::string label;
    Index       m = 0, s = 0, N = 0, k = 0, M = 0;
    Backend     backend = Backend::gaussian;
    int         trial   = 0;
    int         iterations = 0;
    double      final_rel_error = std::numeric_limits<double>::quiet_NaN();
    bool        success = false;
    double      wall_clock_ms = 0.0;
    Termination termination   = Termination::max_iter;
};

struct CellResult {
    std::string label;
    Index       m = 0, s = 0, N = 0;
    int         successes = 0;
    int         trials    = 0;
    double      mean_iterations    = 0.0;
    double      mean_wall_clock_ms = 0.0;

    double rate() const { return trials > 0 ? double(successes) / trials : 0.0; }
};

struct PhaseResult {
    ExperimentSpec           spec;
    /// Ordered by (cell, solver, trial), independent of scheduling.
    std::vector<TrialResult> trials;
    /// Ordered by (cell, solver).
    std::vector<CellResult>  cells;
};

/// One trial of one solver on the seeded instance of (cell, trial).
inline TrialResult run_trial(const ExperimentSpec& spec, const ExperimentSpec::Cell& cell, const SolverSpec& solver,
                             int trial)
{
    const TrialSeeds seeds = trial_seeds(spec.seed, cell.m, cell.s, cell.N, trial);
    const Instance   inst  = make_instance(OperatorSpec{spec.backend, spec.M, cell.N, cell.m, seeds.op}, spec.k,
                                           cell.s, seeds.truth);
    const SolverConfig cfg = make_solver_config(solver, ProblemDims{spec.M, cell.N, spec.k, cell.s, cell.m},
                                                inst.data.truth);

    const auto      start = std::chrono::steady_clock::now();
    const RunRecord run   = std::visit([&](const auto& op) { return run_solver(op, inst.data.y, cfg); }, inst.op);
    const double    ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    TrialResult r;
    r.label           = solver.label();
    r.m               = cell.m;
    r.s               = cell.s;
    r.N               = cell.N;
    r.k               = spec.k;
    r.M               = spec.M;
    r.backend         = spec.backend;
    r.trial           = trial;
    r.iterations      = run.iterations();
    r.final_rel_error = relative_error(run.final_iterate, inst.data.truth);
    r.termination     = run.termination;
    r.success         = r.termination != Termination::numerical_error && r.final_rel_error <= spec.success_threshold;
    r.wall_clock_ms   = spec.record_timing ? ms : 0.0;
    return r;
}

/// Trials of one (cell, solver), in order, honoring stop_below_rate.
inline std::vector<TrialResult> run_cell(const ExperimentSpec& spec, const ExperimentSpec::Cell& cell,
                                         const SolverSpec& solver)
{
    std::vector<TrialResult> out;
    int                      failures = 0;
    const int allowed = spec.stop_below_rate
                            ? static_cast<int>(std::floor(spec.trials * (1.0 - *spec.stop_below_rate) + 1e-9))
                            : spec.trials;
    for (int t = 0; t < spec.trials; ++t) {
        out.push_back(run_trial(spec, cell, solver, t));
        if (!out.back().success && ++failures > allowed)
            break;
    }
    return out;
}

inline CellResult summarize(const std::vector<TrialResult>& trials, const std::string& label,
                            const ExperimentSpec::Cell& cell)
{
    CellResult c;
    c.label = label;
    c.m     = cell.m;
    c.s     = cell.s;
    c.N     = cell.N;
    for (const auto& t : trials) {
        ++c.trials;
        c.successes += t.success ? 1 : 0;
        c.mean_iterations += t.iterations;
        c.mean_wall_clock_ms += t.wall_clock_ms;
    }
    if (c.trials > 0) {
        c.mean_iterations /= c.trials;
        c.mean_wall_clock_ms /= c.trials;
    }
    return c;
}

//
// Runs every (cell, solver) pair of the grid. Pairs are the unit of
// parallelism; each writes only its own slot, so the result does not
// depend on `jobs` or on scheduling.
//
inline PhaseResult run_phase_transition(const ExperimentSpec& spec, unsigned jobs = 1)
{
    spec.validate();
    const auto        cells = spec.cells();
    const std::size_t units = cells.size() * spec.solvers.size();

    std::vector<std::vector<TrialResult>> slots(units);
    parallel_for(units, jobs, [&](std::size_t u) {
        const auto& cell   = cells[u / spec.solvers.size()];
        const auto& solver = spec.solvers[u % spec.solvers.size()];
        slots[u]           = run_cell(spec, cell, solver);
    });

    PhaseResult result;
    result.spec = spec;
    for (std::size_t u = 0; u < units; ++u) {
        const auto& cell = cells[u / spec.solvers.size()];
        result.cells.push_back(summarize(slots[u], spec.solvers[u % spec.solvers.size()].label(), cell));
        for (auto& t : slots[u])
            result.trials.push_back(std::move(t));
    }
    return result;
}

// --- convergence traces ----------------------------------------------------

struct TraceSpec {
    std::string             name    = "trace";
    Backend                 backend = Backend::fourier;
    Index                   M = 150, N = 50, k = 1, s = 3, m = 200;
    std::vector<SolverSpec> solvers;
    std::vector<double>     thresholds = {1e-1, 1e-3, 1e-5};
    /// Number of seeded instances; instance i uses trial_seeds(seed, m, s, N, i).
    int                     instances = 1;
    std::uint64_t           seed      = 1;

    void validate() const
    {
        ProblemDims{M, N, k, s, m}.validate();
        if (solvers.empty())
            throw SpecError("trace spec: at least one solver is required");
        if (thresholds.empty())
            throw SpecError("trace spec: at least one threshold is required");
        if (instances < 1)
            throw SpecError("trace spec: instances must be at least 1");
    }
};

inline Json to_json(const TraceSpec& spec)
{
    Json solvers = Json::array();
    for (const auto& s : spec.solvers)
        solvers.push_back(to_json(s));
    return Json{{"name", spec.name},           {"backend", to_string(spec.backend)},
                {"M", spec.M},                 {"N", spec.N},
                {"k", spec.k},                 {"s", spec.s},
                {"m", spec.m},                 {"solvers", solvers},
                {"thresholds", spec.thresholds}, {"instances", spec.instances},
                {"seed", spec.seed}};
}

inline TraceSpec trace_from_json(const Json& root)
{
    const Json& j = root.contains("spec") && root.at("spec").is_object() ? root.at("spec") : root;
    detail::reject_unknown_keys(j, {"name", "backend", "M", "N", "k", "s", "m", "solvers", "thresholds", "instances", "seed"},
                                "trace spec");
    TraceSpec spec;
    spec.name = detail::get_or<std::string>(j, "name", spec.name);
    try {
        spec.backend = parse_backend(detail::get_or<std::string>(j, "backend", "fourier"));
    }
    catch (const ParameterError& e) {
        throw SpecError(e.what());
    }
    spec.M          = detail::get_or<Index>(j, "M", spec.M);
    spec.N          = detail::get_or<Index>(j, "N", spec.N);
    spec.k          = detail::get_or<Index>(j, "k", spec.k);
    spec.s          = detail::get_or<Index>(j, "s", spec.s);
    spec.m          = detail::get_or<Index>(j, "m", spec.m);
    spec.thresholds = detail::get_or<std::vector<double>>(j, "thresholds", spec.thresholds);
    spec.instances  = detail::get_or<int>(j, "instances", spec.instances);
    spec.seed       = detail::get_or<std::uint64_t>(j, "seed", spec.seed);
    if (j.contains("solvers"))
        for (const auto& s : j.at("solvers"))
            spec.solvers.push_back(solver_from_json(s));
    spec.validate();
    return spec;
}

struct TraceRun {
    std::string label;
    int         instance = 0;
    RunRecord   record;
    double      wall_clock_seconds = 0.0;
};

struct TraceResult {
    TraceSpec             spec;
    /// Ordered by (instance, solver).
    std::vector<TraceRun> runs;
};

//
// Runs all solvers on each seeded instance until the relative error drops
// below the smallest threshold (or the iteration cap).
//
inline TraceResult run_convergence_trace(const TraceSpec& spec, unsigned jobs = 1)
{
    spec.validate();
    const double      target = *std::min_element(spec.thresholds.begin(), spec.thresholds.end());
    const std::size_t units  = std::size_t(spec.instances) * spec.solvers.size();

    TraceResult result;
    result.spec = spec;
    result.runs.resize(units);
    parallel_for(units, jobs, [&](std::size_t u) {
        const int         i      = static_cast<int>(u / spec.solvers.size());
        const SolverSpec& solver = spec.solvers[u % spec.solvers.size()];
        const TrialSeeds  seeds  = trial_seeds(spec.seed, spec.m, spec.s, spec.N, i);
        const Instance    inst =
            make_instance(OperatorSpec{spec.backend, spec.M, spec.N, spec.m, seeds.op}, spec.k, spec.s, seeds.truth);
        SolverConfig cfg = make_solver_config(solver, ProblemDims{spec.M, spec.N, spec.k, spec.s, spec.m},
                                              inst.data.truth);
        cfg.error_tol    = target;
        cfg.residual_tol = 0.0;

        const auto start = std::chrono::steady_clock::now();
        RunRecord  rec   = std::visit([&](const auto& op) { return run_solver(op, inst.data.y, cfg); }, inst.op);
        result.runs[u]   = TraceRun{solver.label(), i, std::move(rec),
                                  std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    });
    return result;
}

/// Elapsed seconds at the first iterate with relative error <= threshold.
inline double seconds_to(const RunRecord& run, double threshold)
{
    for (const auto& e : run.trace)
        if (e.rel_error <= threshold)
            return e.elapsed_seconds;
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace sparselow::harness
