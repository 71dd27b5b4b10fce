#pragma once
//
// Micro-benchmarks of the measurement kernels: each operation on a factored
// rank-k point is timed through the backend's fast path and through the
// dense path (full M x N matrix), for square sizes M = N.
//

#include <sparselow/harness/output.hpp>

namespace sparselow::harness {

enum class BenchOp { apply, adjoint, projected_adjoint };

inline std::string to_string(BenchOp op)
{
    switch (op) {
        case BenchOp::apply:             return "apply";
        case BenchOp::adjoint:           return "adjoint";
        case BenchOp::projected_adjoint: return "projected-adjoint";
    }
    return "unknown";
}

inline BenchOp parse_bench_op(std::string_view name)
{
    if (name == "apply")
        return BenchOp::apply;
    if (name == "adjoint")
        return BenchOp::adjoint;
    if (name == "projected-adjoint")
        return BenchOp::projected_adjoint;
    throw ParameterError("unknown benchmark operation '" + std::string(name) +
                         "' (expected apply, adjoint or projected-adjoint)");
}

struct BenchSpec {
    Backend            backend = Backend::rank_one;
    BenchOp            op      = BenchOp::projected_adjoint;
    Index              k       = 2;
    Index              m       = 400;
    std::vector<Index> sizes   = {500, 1000, 2000};
    std::uint64_t      seed    = 1;
    /// Minimum measured time per batch.
    double             min_seconds = 0.05;
    bool               dense       = true;
    /// Sizes are timed in turn this many times and the best time is kept,
    /// so a slow phase of the machine does not bias one size only.
    int                rounds = 5;
};

struct BenchRow {
    Index  size          = 0;
    double fast_seconds  = 0.0;
    double dense_seconds = std::numeric_limits<double>::quiet_NaN();
};

struct BenchResult {
    BenchSpec             spec;
    std::vector<BenchRow> rows;
    double                fast_exponent  = std::numeric_limits<double>::quiet_NaN();
    double                dense_exponent = std::numeric_limits<double>::quiet_NaN();
};

/// Least-squares slope of log(y) against log(x).
inline double fit_exponent(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    if (n < 2)
        return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Seconds per call of f: the best of three batches, each at least
/// min_seconds long.
template <class F>
double time_per_call(F&& f, double min_seconds)
{
    using clock = std::chrono::steady_clock;
    f();
    int reps = 1;
    while (true) {
        const auto t0 = clock::now();
        for (int i = 0; i < reps; ++i)
            f();
        const double dt = std::chrono::duration<double>(clock::now() - t0).count();
        if (dt >= min_seconds || reps >= (1 << 20))
            break;
        reps *= 2;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int b = 0; b < 3; ++b) {
        const auto t0 = clock::now();
        for (int i = 0; i < reps; ++i)
            f();
        best = std::min(best, std::chrono::duration<double>(clock::now() - t0).count() / reps);
    }
    return best;
}

inline volatile double bench_sink = 0.0;

inline BenchResult run_bench(const BenchSpec& spec)
{
    if (spec.sizes.empty())
        throw ParameterError("bench: at least one size is required");
    if (spec.rounds < 1)
        throw ParameterError("bench: rounds must be at least 1");

    struct Case {
        AnyOperator    op;
        FactoredMatrix X;
        Matrix         Xd;
        Vector         z;
    };
    std::vector<Case> cases;
    for (Index n : spec.sizes) {
        ProblemDims{n, n, spec.k, spec.k + 1, spec.m}.validate();
        if (spec.backend == Backend::gaussian && double(spec.m) * double(n) * double(n) > 5e7)
            throw ParameterError("bench: the gaussian backend stores m x M N entries; size " + std::to_string(n) +
                                 " is too large");
        Case c{make_operator(OperatorSpec{spec.backend, n, n, spec.m, derive_seed(spec.seed, {1})}), {}, {}, {}};
        Rng  rng(derive_seed(spec.seed, {2, std::uint64_t(n)}));
        c.X  = truncate_rank(Matrix(gaussian_matrix(rng, n, spec.k) * gaussian_matrix(rng, spec.k, n)), spec.k);
        c.Xd = c.X.densify();
        c.z  = std::visit([&](const auto& op) { return op.apply(c.X); }, c.op);
        cases.push_back(std::move(c));
    }

    BenchResult result;
    result.spec = spec;
    for (Index n : spec.sizes) {
        BenchRow row;
        row.size          = n;
        row.fast_seconds  = std::numeric_limits<double>::infinity();
        row.dense_seconds = spec.dense && spec.op != BenchOp::adjoint ? std::numeric_limits<double>::infinity()
                                                                      : std::numeric_limits<double>::quiet_NaN();
        result.rows.push_back(row);
    }
    for (int round = 0; round < spec.rounds; ++round) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const Case& c   = cases[i];
            BenchRow&   row = result.rows[i];
            std::visit(
                [&](const auto& op) {
                    auto keep = [](double& best, double t) { best = std::min(best, t); };
                    switch (spec.op) {
                        case BenchOp::apply:
                            keep(row.fast_seconds,
                                 time_per_call([&] { bench_sink = op.apply(c.X)[0]; }, spec.min_seconds));
                            if (spec.dense)
                                keep(row.dense_seconds,
                                     time_per_call([&] { bench_sink = op.apply(c.Xd)[0]; }, spec.min_seconds));
                            break;
                        case BenchOp::adjoint:
                            keep(row.fast_seconds,
                                 time_per_call([&] { bench_sink = op.adjoint(c.z)(0, 0); }, spec.min_seconds));
                            break;
                        case BenchOp::projected_adjoint:
                            keep(row.fast_seconds,
                                 time_per_call([&] { bench_sink = op.projected_adjoint(c.X, c.z).core(0, 0); },
                                               spec.min_seconds));
                            if (spec.dense)
                                keep(row.dense_seconds,
                                     time_per_call(
                                         [&] { bench_sink = tangent_project(c.X, op.adjoint(c.z)).core(0, 0); },
                                         spec.min_seconds));
                            break;
                    }
                },
                c.op);
        }
    }

    std::vector<double> x, fast, dense;
    for (const auto& r : result.rows) {
        x.push_back(double(r.size));
        fast.push_back(r.fast_seconds);
        dense.push_back(r.dense_seconds);
    }
    result.fast_exponent = fit_exponent(x, fast);
    if (std::all_of(dense.begin(), dense.end(), [](double d) { return std::isfinite(d); }))
        result.dense_exponent = fit_exponent(x, dense);
    return result;
}

inline std::string bench_csv(const BenchResult& r)
{
    std::string out = "op,backend,k,m,M,N,fastSeconds,denseSeconds,speedup\n";
    for (const auto& row : r.rows) {
        out += to_string(r.spec.op) + ',' + to_string(r.spec.backend) + ',' + std::to_string(r.spec.k) + ',' +
               std::to_string(r.spec.m) + ',' + std::to_string(row.size) + ',' + std::to_string(row.size) + ',' +
               format_double(row.fast_seconds) + ',' + format_double(row.dense_seconds) + ',' +
               format_double(row.dense_seconds / row.fast_seconds) + '\n';
    }
    return out;
}

inline Json to_json(const BenchSpec& s)
{
    return Json{{"backend", to_string(s.backend)}, {"op", to_string(s.op)}, {"k", s.k},
                {"m", s.m},   {"sizes", s.sizes},   {"seed", s.seed},  {"min_seconds", s.min_seconds},
                {"dense", s.dense}, {"rounds", s.rounds}};
}

} // namespace sparselow::harness
