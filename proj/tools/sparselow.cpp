// sparselow command line: solve, phase, trace, bench, verify.
//
// Exit status: 0 success (solve: converged), 2 solve stopped at the
// iteration cap, 1 any error. Errors go to stderr as one JSON object per
// line.

#include <sparselow/harness/bench.hpp>
#include <sparselow/harness/output.hpp>
#include <sparselow/harness/presets.hpp>
#include <sparselow/harness/verify.hpp>

#include <CLI11/CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace sparselow;
using namespace sparselow::harness;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk      = 0;
constexpr int kExitError   = 1;
constexpr int kExitMaxIter = 2;

void report_error(const std::string& kind, const std::string& message)
{
    std::cerr << Json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

/// SPARSELOW_SEED, when set, wins over --seed.
std::uint64_t effective_seed(std::uint64_t flag_value)
{
    const char* env = std::getenv("SPARSELOW_SEED");
    if (!env || !*env)
        return flag_value;
    char*                    end = nullptr;
    const unsigned long long v   = std::strtoull(env, &end, 10);
    if (!end || *end != '\0')
        throw ParameterError(std::string("SPARSELOW_SEED is not an unsigned integer: '") + env + "'");
    return v;
}

std::string exact(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string dense_text(const Matrix& X)
{
    std::string out;
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) {
            if (j)
                out += ' ';
            out += exact(X(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string factored_text(const FactoredMatrix& X)
{
    std::string out = "# rows " + std::to_string(X.rows()) + " cols " + std::to_string(X.cols()) + " rank " +
                      std::to_string(X.rank()) + "\n";
    out += "support " + join_indices(X.support()) + "\n";
    out += "sigma";
    for (Index j = 0; j < X.rank(); ++j)
        out += ' ' + exact(X.sigma()[j]);
    out += "\nU\n" + dense_text(X.U()) + "V\n" + dense_text(X.V());
    return out;
}

// --- solve -------------------------------------------------------------------

struct SolveOptions {
    std::string   algo    = "riht";
    std::string   backend = "gaussian";
    Index         M = 0, N = 0, k = 0, s = 0, m = 0;
    std::uint64_t seed     = 1;
    std::string   step     = "armijo";
    double        alpha    = 1.0;
    double        tol      = 1e-6;
    int           max_iter = 0;
    double        tau      = 0.99;
    std::string   out      = "sparselow-solve";
    std::string   instance;
    bool          timing = false;
};

Json solve_spec_json(const SolveOptions& o)
{
    return Json{{"algo", o.algo}, {"backend", o.backend}, {"M", o.M},     {"N", o.N},
                {"k", o.k},       {"s", o.s},             {"m", o.m},     {"seed", o.seed},
                {"step", o.step}, {"alpha", o.alpha},     {"tol", o.tol}, {"max_iter", o.max_iter},
                {"tau", o.tau}};
}

void solve_spec_from_json(const Json& j, SolveOptions& o)
{
    harness::detail::reject_unknown_keys(j, {"algo", "backend", "M", "N", "k", "s", "m", "seed", "step", "alpha", "tol", "max_iter", "tau"},
                                "solve spec");
    o.algo     = j.at("algo").get<std::string>();
    o.backend  = j.at("backend").get<std::string>();
    o.M        = j.at("M").get<Index>();
    o.N        = j.at("N").get<Index>();
    o.k        = j.at("k").get<Index>();
    o.s        = j.at("s").get<Index>();
    o.m        = j.at("m").get<Index>();
    o.seed     = j.at("seed").get<std::uint64_t>();
    o.step     = j.at("step").get<std::string>();
    o.alpha    = j.at("alpha").get<double>();
    o.tol      = j.at("tol").get<double>();
    o.max_iter = j.at("max_iter").get<int>();
    o.tau      = j.at("tau").get<double>();
}

int cmd_solve(SolveOptions o)
{
    std::optional<Vector> stored_y;
    if (!o.instance.empty()) {
        const Json j = parse_json(read_text_file(o.instance), o.instance);
        if (!j.contains("spec") || !j.contains("instance") || j.value("command", "") != "solve")
            throw SpecError(o.instance + ": not a solve manifest");
        try {
            solve_spec_from_json(j.at("spec"), o);
            const auto y = j.at("instance").at("y").get<std::vector<double>>();
            stored_y     = Eigen::Map<const Vector>(y.data(), Index(y.size()));
        }
        catch (const nlohmann::json::exception& e) {
            throw SpecError(o.instance + ": " + e.what());
        }
    }
    else {
        o.seed = effective_seed(o.seed);
    }

    const ProblemDims dims{o.M, o.N, o.k, o.s, o.m};
    dims.validate();
    SolverSpec solver;
    solver.algorithm = parse_algorithm(o.algo);
    if (o.step == "const")
        solver.step = StepRule::constant(o.alpha);
    else if (o.step == "armijo")
        solver.step = StepRule::armijo();
    else
        throw ParameterError("unknown step rule '" + o.step + "' (expected const or armijo)");
    solver.max_iter = o.max_iter;
    solver.tau      = o.tau;

    const std::uint64_t op_seed    = derive_seed(o.seed, {1});
    const std::uint64_t truth_seed = derive_seed(o.seed, {2});
    const Instance inst = make_instance(OperatorSpec{parse_backend(o.backend), o.M, o.N, o.m, op_seed}, o.k, o.s,
                                        truth_seed);
    const Vector& y = stored_y ? *stored_y : inst.data.y;

    SolverConfig cfg = make_solver_config(solver, dims, inst.data.truth);
    cfg.residual_tol = o.tol;
    const RunRecord run = std::visit([&](const auto& op) { return run_solver(op, y, cfg); }, inst.op);

    const fs::path dir(o.out);
    write_file(dir / "trace.csv", run_record_csv(run, o.timing));
    write_file(dir / "iterate.txt", dense_text(run.final_iterate.densify()));
    write_file(dir / "iterate_factors.txt", factored_text(run.final_iterate));
    const Json extra = {{"seeds", {{"base", o.seed}, {"operator", op_seed}, {"truth", truth_seed}}},
                        {"instance", {{"y", std::vector<double>(y.data(), y.data() + y.size())}}},
                        {"result",
                         {{"termination", to_string(run.termination)},
                          {"iterations", run.iterations()},
                          {"finalRelError", format_double(run.final_rel_error())}}}};
    write_file(dir / "manifest.json", manifest("solve", solve_spec_json(o), extra).dump(2) + "\n");

    std::cout << solver.label() << " " << to_string(run.termination) << " after " << run.iterations()
              << " iterations, relative error " << format_double(run.final_rel_error()) << "\n";
    if (run.termination == Termination::numerical_error) {
        report_error("numericalError", run.message);
        return kExitError;
    }
    return run.termination == Termination::converged ? kExitOk : kExitMaxIter;
}

// --- phase / trace -----------------------------------------------------------

struct ExperimentOptions {
    std::string                  preset;
    std::string                  spec;
    std::string                  out;
    unsigned                     jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<int>           count;
};

std::optional<std::uint64_t> seed_override(const std::optional<std::uint64_t>& flag)
{
    if (std::getenv("SPARSELOW_SEED") && *std::getenv("SPARSELOW_SEED"))
        return effective_seed(flag.value_or(0));
    return flag;
}

int cmd_phase(const ExperimentOptions& o)
{
    if (o.preset.empty() == o.spec.empty())
        throw ParameterError("phase: give exactly one of --preset or --spec");
    ExperimentSpec spec = o.preset.empty() ? load_experiment_spec(o.spec) : phase_preset(o.preset);
    if (const auto seed = seed_override(o.seed))
        spec.seed = *seed;
    if (o.count)
        spec.trials = *o.count;
    const PhaseResult result = run_phase_transition(spec, o.jobs);
    const fs::path    dir(o.out.empty() ? spec.name : o.out);
    emit_outputs(result, dir);

    for (const auto& c : result.cells)
        std::cout << c.label << " m=" << c.m << " s=" << c.s << " N=" << c.N << " success " << c.successes << "/"
                  << c.trials << "\n";
    std::cout << "wrote " << (dir / "results.csv").string() << "\n";
    return kExitOk;
}

int cmd_trace(const ExperimentOptions& o)
{
    if (o.preset.empty() == o.spec.empty())
        throw ParameterError("trace: give exactly one of --preset or --spec");
    TraceSpec spec = o.preset.empty() ? [&] {
        const Json j = parse_json(read_text_file(o.spec), o.spec);
        try {
            return trace_from_json(j);
        }
        catch (const SpecError& e) {
            throw SpecError(o.spec + ": " + e.what());
        }
    }()
                                      : trace_preset(o.preset);
    if (const auto seed = seed_override(o.seed))
        spec.seed = *seed;
    if (o.count)
        spec.instances = *o.count;
    const TraceResult result = run_convergence_trace(spec, o.jobs);
    const fs::path    dir(o.out.empty() ? spec.name : o.out);
    emit_outputs(result, dir);

    std::cout << "threshold";
    for (const auto& s : spec.solvers)
        std::cout << "  " << s.label();
    std::cout << "\n";
    for (double th : spec.thresholds) {
        std::cout << format_double(th);
        for (const auto& s : spec.solvers) {
            std::vector<int> its;
            for (const auto& r : result.runs)
                if (r.label == s.label())
                    its.push_back(r.record.iterations_to(th));
            std::sort(its.begin(), its.end(), [](int a, int b) {
                return (a < 0 ? std::numeric_limits<int>::max() : a) < (b < 0 ? std::numeric_limits<int>::max() : b);
            });
            const int med = its[its.size() / 2];
            std::cout << "  " << (med < 0 ? std::string("-") : std::to_string(med));
        }
        std::cout << "\n";
    }
    std::cout << "wrote " << (dir / "table.csv").string() << "\n";
    return kExitOk;
}

// --- bench / verify ----------------------------------------------------------

struct BenchOptions {
    std::string        op      = "projected-adjoint";
    std::string        backend = "rankone";
    Index              k       = 2;
    Index              m       = 400;
    std::vector<Index> sizes   = {500, 1000, 2000};
    double             min_seconds = 0.05;
    int                rounds      = 5;
    bool               no_dense    = false;
    std::uint64_t      seed        = 1;
    std::string        out;
};

int cmd_bench(const BenchOptions& o)
{
    BenchSpec spec;
    spec.op          = parse_bench_op(o.op);
    spec.backend     = parse_backend(o.backend);
    spec.k           = o.k;
    spec.m           = o.m;
    spec.sizes       = o.sizes;
    spec.min_seconds = o.min_seconds;
    spec.rounds      = o.rounds;
    spec.dense       = !o.no_dense;
    spec.seed        = effective_seed(o.seed);
    const BenchResult r = run_bench(spec);

    std::cout << bench_csv(r);
    std::cout << "fitted exponent (fast) " << format_double(r.fast_exponent) << "\n";
    if (std::isfinite(r.dense_exponent))
        std::cout << "fitted exponent (dense) " << format_double(r.dense_exponent) << "\n";
    if (!o.out.empty()) {
        const fs::path dir(o.out);
        write_file(dir / "bench.csv", bench_csv(r));
        write_file(dir / "manifest.json",
                   manifest("bench", to_json(spec),
                            Json{{"fastExponent", r.fast_exponent},
                                 {"denseExponent", std::isfinite(r.dense_exponent) ? Json(r.dense_exponent) : Json()}})
                           .dump(2) +
                       "\n");
    }
    return kExitOk;
}

int cmd_verify(int instances, std::uint64_t seed)
{
    bool all = true;
    for (const auto& p : run_verify(VerifyOptions{effective_seed(seed), instances})) {
        std::cout << (p.passed ? "PASS " : "FAIL ") << p.name << " (" << p.cases << " cases, " << p.detail << ")\n";
        all = all && p.passed;
    }
    return all ? kExitOk : kExitError;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Recovery of low-rank, row-sparse matrices"};
    app.set_version_flag("--version", std::string(SPARSELOW_VERSION));
    app.require_subcommand(1, 1);

    SolveOptions so;
    auto*        solve = app.add_subcommand("solve", "Recover one generated instance");
    solve->add_option("--algo", so.algo, "iht, riht or rpg")->check(CLI::IsMember({"iht", "riht", "rpg"}));
    solve->add_option("--backend", so.backend, "gaussian, rankone or fourier")
        ->check(CLI::IsMember({"gaussian", "rankone", "fourier"}));
    solve->add_option("--M", so.M, "Rows");
    solve->add_option("--N", so.N, "Columns");
    solve->add_option("--k", so.k, "Rank");
    solve->add_option("--s", so.s, "Row sparsity");
    solve->add_option("--m", so.m, "Number of measurements");
    solve->add_option("--seed", so.seed, "Seed (SPARSELOW_SEED overrides)");
    solve->add_option("--step", so.step, "const or armijo")->check(CLI::IsMember({"const", "armijo"}));
    solve->add_option("--alpha", so.alpha, "Step size for --step const");
    solve->add_option("--tol", so.tol, "Relative residual tolerance");
    solve->add_option("--max-iter", so.max_iter, "Iteration cap (0: algorithm default)");
    solve->add_option("--tau", so.tau, "rpg threshold decay");
    solve->add_option("--out", so.out, "Output directory");
    solve->add_option("--instance", so.instance, "Replay a solve manifest");
    solve->add_flag("--timing", so.timing, "Add elapsed seconds to trace.csv");

    ExperimentOptions po;
    auto*             phase = app.add_subcommand("phase", "Phase-transition grid");
    phase->add_option("--preset", po.preset, "gaussian-200, gaussian-1000 or fourier-150");
    phase->add_option("--spec", po.spec, "Experiment spec or manifest (JSON)");
    phase->add_option("--out", po.out, "Output directory (default: spec name)");
    phase->add_option("--jobs", po.jobs, "Parallel trials (0: all cores)");
    phase->add_option("--seed", po.seed, "Seed base override");
    phase->add_option("--trials", po.count, "Trials per cell override");

    ExperimentOptions to;
    auto*             trace = app.add_subcommand("trace", "Convergence traces on shared instances");
    trace->add_option("--preset", to.preset, "trace-fourier or trace-rankone");
    trace->add_option("--spec", to.spec, "Trace spec or manifest (JSON)");
    trace->add_option("--out", to.out, "Output directory (default: spec name)");
    trace->add_option("--jobs", to.jobs, "Parallel runs (0: all cores)");
    trace->add_option("--seed", to.seed, "Seed override");
    trace->add_option("--instances", to.count, "Number of seeded instances");

    BenchOptions bo;
    auto*        bench = app.add_subcommand("bench", "Kernel micro-benchmarks");
    bench->add_option("--op", bo.op, "apply, adjoint or projected-adjoint")
        ->check(CLI::IsMember({"apply", "adjoint", "projected-adjoint"}));
    bench->add_option("--backend", bo.backend, "gaussian, rankone or fourier")
        ->check(CLI::IsMember({"gaussian", "rankone", "fourier"}));
    bench->add_option("--k", bo.k, "Rank");
    bench->add_option("--m", bo.m, "Number of measurements");
    bench->add_option("--sizes", bo.sizes, "Square sizes M = N")->delimiter(',');
    bench->add_option("--min-seconds", bo.min_seconds, "Minimum time per batch");
    bench->add_option("--rounds", bo.rounds, "Passes over all sizes; the best time per size is kept");
    bench->add_flag("--no-dense", bo.no_dense, "Skip the dense path");
    bench->add_option("--seed", bo.seed, "Seed");
    bench->add_option("--out", bo.out, "Also write bench.csv and manifest.json here");

    int           verify_instances = 200;
    std::uint64_t verify_seed      = 1;
    auto*         verify = app.add_subcommand("verify", "Run the property checks");
    verify->add_option("--instances", verify_instances, "Random instances per property");
    verify->add_option("--seed", verify_seed, "Seed");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::Success& e) {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        return kExitError;
    }

    try {
        if (*solve)
            return cmd_solve(so);
        if (*phase)
            return cmd_phase(po);
        if (*trace)
            return cmd_trace(to);
        if (*bench)
            return cmd_bench(bo);
        if (*verify)
            return cmd_verify(verify_instances, verify_seed);
    }
    catch (const SpecError& e) {
        report_error("spec", e.what());
    }
    catch (const ParameterError& e) {
        report_error("parameter", e.what());
    }
    catch (const NumericalError& e) {
        report_error("numerical", e.what());
    }
    catch (const OutputError& e) {
        report_error("io", e.what());
    }
    catch (const std::exception& e) {
        report_error("internal", e.what());
    }
    return kExitError;
}
