#pragma once
//
// Result files: CSV tables, the JSON run manifest and a gnuplot script.
// Number formatting is fixed so that reruns produce byte-identical files.
//

#include <sparselow/harness/experiment.hpp>

#include <cstdio>
#include <filesystem>

#ifndef SPARSELOW_VERSION
#define SPARSELOW_VERSION "unknown"
#endif

namespace sparselow::harness {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string join_indices(const SupportSet& s, char sep = ' ')
{
    std::string out;
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        if (i)
            out += sep;
        out += std::to_string(s.indices[i]);
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
        throw OutputError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw OutputError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out)
        throw OutputError("write to '" + path.string() + "' failed");
}

inline const char* results_header()
{
    return "solver,m,s,N,k,M,backend,trial,iterations,finalRelError,success,wallClockMs,termination\n";
}

inline std::string results_csv(const std::vector<TrialResult>& trials)
{
    std::string out = results_header();
    for (const auto& t : trials) {
        out += t.label + ',' + std::to_string(t.m) + ',' + std::to_string(t.s) + ',' + std::to_string(t.N) + ',' +
               std::to_string(t.k) + ',' + std::to_string(t.M) + ',' + to_string(t.backend) + ',' +
               std::to_string(t.trial) + ',' + std::to_string(t.iterations) + ',' +
               format_double(t.final_rel_error) + ',' + (t.success ? "1" : "0") + ',' +
               format_double(t.wall_clock_ms) + ',' + to_string(t.termination) + '\n';
    }
    return out;
}

inline std::string summary_csv(const std::vector<CellResult>& cells)
{
    std::string out = "solver,m,s,N,successes,trials,rate,meanIterations,meanWallClockMs\n";
    for (const auto& c : cells) {
        out += c.label + ',' + std::to_string(c.m) + ',' + std::to_string(c.s) + ',' + std::to_string(c.N) + ',' +
               std::to_string(c.successes) + ',' + std::to_string(c.trials) + ',' + format_double(c.rate()) + ',' +
               format_double(c.mean_iterations) + ',' + format_double(c.mean_wall_clock_ms) + '\n';
    }
    return out;
}

/// Per-iteration trace of one run.
inline std::string run_record_csv(const RunRecord& run, bool with_timing = false)
{
    std::string out = "iteration,objective,residual,relError,step,fallback,backtracks,rank,supportSize,mu,support";
    out += with_timing ? ",elapsedSeconds\n" : "\n";
    for (const auto& e : run.trace) {
        out += std::to_string(e.iteration) + ',' + format_double(e.objective) + ',' + format_double(e.residual) +
               ',' + format_double(e.rel_error) + ',' + format_double(e.step) + ',' + (e.fallback ? "1" : "0") +
               ',' + std::to_string(e.backtracks) + ',' + std::to_string(e.rank) + ',' +
               std::to_string(e.support.size()) + ',' + format_double(e.mu) + ',' + join_indices(e.support);
        if (with_timing)
            out += ',' + format_double(e.elapsed_seconds);
        out += '\n';
    }
    return out;
}

/// Iterations to each threshold, one row per (threshold, instance, solver).
inline std::string trace_table_csv(const TraceResult& result)
{
    std::string out = "threshold,instance,solver,iterations\n";
    for (double th : result.spec.thresholds)
        for (const auto& r : result.runs)
            out += format_double(th) + ',' + std::to_string(r.instance) + ',' + r.label + ',' +
                   std::to_string(r.record.iterations_to(th)) + '\n';
    return out;
}

inline std::string trace_timing_csv(const TraceResult& result)
{
    std::string out = "threshold,instance,solver,seconds\n";
    for (double th : result.spec.thresholds)
        for (const auto& r : result.runs)
            out += format_double(th) + ',' + std::to_string(r.instance) + ',' + r.label + ',' +
                   format_double(seconds_to(r.record, th)) + '\n';
    return out;
}

inline Json manifest(const std::string& command, Json spec, Json extra = Json::object())
{
    Json j = {{"tool", "sparselow"}, {"version", SPARSELOW_VERSION}, {"command", command}, {"spec", std::move(spec)}};
    for (auto it = extra.begin(); it != extra.end(); ++it)
        j[it.key()] = it.value();
    return j;
}

//
// gnuplot script for a phase diagram: success rate over (s + N, m) on
// log-log axes, one panel per solver, with a slope-one guide line.
//
inline std::string phase_plot_script(const ExperimentSpec& spec)
{
    std::string out;
    out += "# gnuplot script; run from the output directory: gnuplot plot.script\n";
    out += "set datafile separator ','\n";
    out += "set terminal pngcairo size " + std::to_string(420 * spec.solvers.size()) + ",400\n";
    out += "set output '" + spec.name + ".png'\n";
    out += "set logscale xy\n";
    out += "set xlabel 's + N'\nset ylabel 'm'\n";
    out += "set cbrange [0:1]\nset palette gray\n";
    out += "set multiplot layout 1," + std::to_string(spec.solvers.size()) + "\n";
    // Guide through the smallest grid point.
    const Index x0 = *std::min_element(spec.s_values.begin(), spec.s_values.end()) +
                     (spec.n_equals_s ? *std::min_element(spec.s_values.begin(), spec.s_values.end())
                                      : *std::min_element(spec.N_values.begin(), spec.N_values.end()));
    const Index y0 = *std::min_element(spec.m_values.begin(), spec.m_values.end());
    out += "guide(x) = " + std::to_string(y0) + ".0 * x / " + std::to_string(x0) + ".0\n";
    for (const auto& s : spec.solvers) {
        const std::string label = s.label();
        out += "set title '" + label + "'\n";
        out += "plot 'summary.csv' using ($3+$4):(strcol(1) eq '" + label +
               "' ? $2 : 1/0):7 with points pt 5 ps 2 palette notitle, guide(x) with lines lc rgb 'red' notitle\n";
    }
    out += "unset multiplot\n";
    return out;
}

inline std::string trace_plot_script(const TraceSpec& spec)
{
    std::string out;
    out += "# gnuplot script; run from the output directory: gnuplot plot.script\n";
    out += "set datafile separator ','\n";
    out += "set terminal pngcairo size 640,400\n";
    out += "set output '" + spec.name + ".png'\n";
    out += "set logscale y\n";
    out += "set xlabel 'iteration'\nset ylabel 'relative error'\n";
    out += "plot ";
    for (std::size_t i = 0; i < spec.solvers.size(); ++i) {
        const std::string label = spec.solvers[i].label();
        out += std::string(i ? ", \\\n     " : "") + "'trace_0_" + label + ".csv' using 1:4 with lines title '" +
               label + "'";
    }
    out += "\n";
    return out;
}

/// results.csv, summary.csv, manifest.json and plot.script for a grid.
inline void emit_outputs(const PhaseResult& result, const std::filesystem::path& dir)
{
    write_file(dir / "results.csv", results_csv(result.trials));
    write_file(dir / "summary.csv", summary_csv(result.cells));
    write_file(dir / "manifest.json",
               manifest("phase", to_json(result.spec), Json{{"seeds", {{"base", result.spec.seed}}}}).dump(2) + "\n");
    write_file(dir / "plot.script", phase_plot_script(result.spec));
}

inline void emit_outputs(const TraceResult& result, const std::filesystem::path& dir)
{
    for (const auto& r : result.runs)
        write_file(dir / ("trace_" + std::to_string(r.instance) + "_" + r.label + ".csv"), run_record_csv(r.record));
    write_file(dir / "table.csv", trace_table_csv(result));
    write_file(dir / "timing.csv", trace_timing_csv(result));
    write_file(dir / "manifest.json",
               manifest("trace", to_json(result.spec), Json{{"seeds", {{"base", result.spec.seed}}}}).dump(2) + "\n");
    write_file(dir / "plot.script", trace_plot_script(result.spec));
}

} // namespace sparselow::harness
