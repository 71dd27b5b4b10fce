#pragma once
//
// Experiment specifications and their JSON form.
//
// A phase-transition spec looks like
//
//   {
//     "name": "gaussian-200",
//     "backend": "gaussian",
//     "M": 200, "k": 2,
//     "m": [60, 120, 240], "s": [8, 16], "N": [8, 16],
//     "n_equals_s": false,
//     "trials": 10,
//     "solvers": [{"algorithm": "riht", "step": "armijo"}],
//     "success_threshold": 1e-4,
//     "seed": 1
//   }
//
// A run manifest (which embeds the spec under "spec") is accepted as well.
//

#include <sparselow/operators/factory.hpp>
#include <sparselow/solvers/config.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace sparselow::harness {

using Json = nlohmann::ordered_json;

class SpecError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

struct SolverSpec {
    Algorithm algorithm = Algorithm::riht;
    StepRule  step;
    /// 0 selects the default cap of the algorithm.
    int       max_iter = 0;
    double    tau      = 0.99;

    int effective_max_iter() const
    {
        if (max_iter > 0)
            return max_iter;
        return algorithm == Algorithm::rpg ? 20000 : 3000;
    }

    /// Name used in result files: "riht", or "riht-const0.5" for a fixed step.
    std::string label() const
    {
        std::string out = to_string(algorithm);
        if (step.kind == StepRule::Kind::constant) {
            std::ostringstream os;
            os << "-const" << step.alpha;
            out += os.str();
        }
        return out;
    }
};

struct ExperimentSpec {
    std::string             name    = "experiment";
    Backend                 backend = Backend::gaussian;
    Index                   M       = 200;
    Index                   k       = 2;
    std::vector<Index>      m_values;
    std::vector<Index>      s_values;
    /// Ignored when n_equals_s is set.
    std::vector<Index>      N_values;
    bool                    n_equals_s = false;
    int                     trials     = 10;
    std::vector<SolverSpec> solvers;
    double                  success_threshold = 1e-4;
    std::uint64_t           seed              = 1;
    /// Stop a (cell, solver) once this success rate has become unreachable.
    std::optional<double>   stop_below_rate;
    /// Record wall-clock times in the results (makes them run dependent).
    bool                    record_timing = false;

    void validate() const
    {
        if (m_values.empty() || s_values.empty() || (!n_equals_s && N_values.empty()))
            throw SpecError("experiment spec: grid axes must be nonempty");
        if (trials < 1)
            throw SpecError("experiment spec: trials must be at least 1");
        if (solvers.empty())
            throw SpecError("experiment spec: at least one solver is required");
        if (!(success_threshold > 0.0))
            throw SpecError("experiment spec: success_threshold must be positive");
        if (stop_below_rate && !(*stop_below_rate > 0.0 && *stop_below_rate <= 1.0))
            throw SpecError("experiment spec: stop_below_rate must lie in (0, 1]");
        for (const auto& cell : cells())
            ProblemDims{M, cell.N, k, cell.s, cell.m}.validate();
        for (const auto& sv : solvers) {
            sv.step.validate();
            if (!(sv.tau > 0.0 && sv.tau < 1.0))
                throw SpecError("experiment spec: tau must lie in (0, 1)");
        }
    }

    struct Cell {
        Index m = 0, s = 0, N = 0;
    };

    /// Grid cells in (m, s, N) lexicographic order.
    std::vector<Cell> cells() const
    {
        std::vector<Cell> out;
        for (Index m : m_values)
            for (Index s : s_values) {
                if (n_equals_s)
                    out.push_back({m, s, s});
                else
                    for (Index N : N_values)
                        out.push_back({m, s, N});
            }
        return out;
    }
};

// --- JSON ------------------------------------------------------------------

inline Json to_json(const StepRule& step)
{
    if (step.kind == StepRule::Kind::constant)
        return Json{{"step", "const"}, {"alpha", step.alpha}};
    return Json{{"step", "armijo"}, {"beta", step.beta}, {"gamma", step.gamma}, {"p_max", step.p_max}};
}

inline Json to_json(const SolverSpec& s)
{
    Json j = {{"algorithm", to_string(s.algorithm)}};
    j.update(to_json(s.step));
    j["max_iter"] = s.effective_max_iter();
    if (s.algorithm == Algorithm::rpg)
        j["tau"] = s.tau;
    return j;
}

inline Json to_json(const ExperimentSpec& spec)
{
    Json j = {{"name", spec.name},
              {"backend", to_string(spec.backend)},
              {"M", spec.M},
              {"k", spec.k},
              {"m", spec.m_values},
              {"s", spec.s_values}};
    if (spec.n_equals_s)
        j["n_equals_s"] = true;
    else
        j["N"] = spec.N_values;
    j["trials"] = spec.trials;
    Json solvers = Json::array();
    for (const auto& s : spec.solvers)
        solvers.push_back(to_json(s));
    j["solvers"]           = solvers;
    j["success_threshold"] = spec.success_threshold;
    j["seed"]              = spec.seed;
    if (spec.stop_below_rate)
        j["stop_below_rate"] = *spec.stop_below_rate;
    if (spec.record_timing)
        j["record_timing"] = true;
    return j;
}

namespace detail {

inline void reject_unknown_keys(const Json& j, std::initializer_list<const char*> known, const std::string& where)
{
    if (!j.is_object())
        throw SpecError(where + ": expected an object");
    std::set<std::string> allowed(known.begin(), known.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw SpecError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const Json& j, const char* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception&) {
        throw SpecError(std::string("key '") + key + "' has the wrong type");
    }
}

} // namespace detail

inline StepRule step_from_json(const Json& j)
{
    const std::string kind = detail::get_or<std::string>(j, "step", "armijo");
    if (kind == "const")
        return StepRule::constant(detail::get_or<double>(j, "alpha", 1.0));
    if (kind == "armijo")
        return StepRule::armijo(detail::get_or<double>(j, "beta", 0.5), detail::get_or<double>(j, "gamma", 1e-4),
                                detail::get_or<int>(j, "p_max", 50));
    throw SpecError("unknown step rule '" + kind + "' (expected const or armijo)");
}

inline SolverSpec solver_from_json(const Json& j)
{
    detail::reject_unknown_keys(j, {"algorithm", "step", "alpha", "beta", "gamma", "p_max", "max_iter", "tau"},
                                "solver");
    SolverSpec s;
    try {
        s.algorithm = parse_algorithm(detail::get_or<std::string>(j, "algorithm", "riht"));
    }
    catch (const ParameterError& e) {
        throw SpecError(e.what());
    }
    s.step     = step_from_json(j);
    s.max_iter = detail::get_or<int>(j, "max_iter", 0);
    s.tau      = detail::get_or<double>(j, "tau", 0.99);
    return s;
}

inline ExperimentSpec experiment_from_json(const Json& root)
{
    const Json& j = root.contains("spec") && root.at("spec").is_object() ? root.at("spec") : root;
    detail::reject_unknown_keys(j,
                                {"name", "backend", "M", "k", "m", "s", "N", "n_equals_s", "trials", "solvers",
                                 "success_threshold", "seed", "stop_below_rate", "record_timing"},
                                "experiment spec");
    ExperimentSpec spec;
    spec.name = detail::get_or<std::string>(j, "name", spec.name);
    try {
        spec.backend = parse_backend(detail::get_or<std::string>(j, "backend", "gaussian"));
    }
    catch (const ParameterError& e) {
        throw SpecError(e.what());
    }
    spec.M                 = detail::get_or<Index>(j, "M", spec.M);
    spec.k                 = detail::get_or<Index>(j, "k", spec.k);
    spec.m_values          = detail::get_or<std::vector<Index>>(j, "m", {});
    spec.s_values          = detail::get_or<std::vector<Index>>(j, "s", {});
    spec.N_values          = detail::get_or<std::vector<Index>>(j, "N", {});
    spec.n_equals_s        = detail::get_or<bool>(j, "n_equals_s", false);
    spec.trials            = detail::get_or<int>(j, "trials", spec.trials);
    spec.success_threshold = detail::get_or<double>(j, "success_threshold", spec.success_threshold);
    spec.seed              = detail::get_or<std::uint64_t>(j, "seed", spec.seed);
    spec.record_timing     = detail::get_or<bool>(j, "record_timing", false);
    if (j.contains("stop_below_rate"))
        spec.stop_below_rate = detail::get_or<double>(j, "stop_below_rate", 1.0);
    if (j.contains("solvers")) {
        if (!j.at("solvers").is_array())
            throw SpecError("key 'solvers' must be an array");
        for (const auto& s : j.at("solvers"))
            spec.solvers.push_back(solver_from_json(s));
    }
    else {
        spec.solvers.push_back(SolverSpec{});
    }
    spec.validate();
    return spec;
}

/// Parses JSON text; syntax errors are reported as "source:line:column: message".
inline Json parse_json(const std::string& text, const std::string& source)
{
    try {
        return Json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            }
            else {
                ++column;
            }
        }
        std::string what = e.what();
        const auto  pos  = what.find("] ");
        if (pos != std::string::npos)
            what = what.substr(pos + 2);
        throw SpecError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
    }
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SpecError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline ExperimentSpec load_experiment_spec(const std::string& path)
{
    const Json j = parse_json(read_text_file(path), path);
    try {
        return experiment_from_json(j);
    }
    catch (const SpecError& e) {
        throw SpecError(path + ": " + e.what());
    }
}

} // namespace sparselow::harness
