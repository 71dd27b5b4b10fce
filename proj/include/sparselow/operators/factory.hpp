#pragma once
//
// Seeded construction of every backend from a small serializable record.
//

#include <sparselow/operators/fourier_operator.hpp>

#include <string_view>
#include <variant>

namespace sparselow {

enum class Backend { gaussian, rank_one, fourier };

inline std::string to_string(Backend b)
{
    switch (b) {
        case Backend::gaussian: return "gaussian";
        case Backend::rank_one: return "rankone";
        case Backend::fourier:  return "fourier";
    }
    return "unknown";
}

inline Backend parse_backend(std::string_view name)
{
    if (name == "gaussian")
        return Backend::gaussian;
    if (name == "rankone" || name == "rank-one" || name == "rank_one")
        return Backend::rank_one;
    if (name == "fourier")
        return Backend::fourier;
    throw ParameterError("unknown backend '" + std::string(name) + "' (expected gaussian, rankone or fourier)");
}

/// (backend kind, dims, seed) reproduces an operator exactly.
struct OperatorSpec {
    Backend       backend = Backend::gaussian;
    Index         M       = 0;
    Index         N       = 0;
    Index         m       = 0;
    std::uint64_t seed    = 0;

    bool operator==(const OperatorSpec&) const = default;
};

using AnyOperator = std::variant<DenseOperator, RankOneOperator, FourierBlindDeconvOperator>;

inline AnyOperator make_operator(const OperatorSpec& spec)
{
    switch (spec.backend) {
        case Backend::gaussian: return make_gaussian(spec.M, spec.N, spec.m, spec.seed);
        case Backend::rank_one: return make_rank_one(spec.M, spec.N, spec.m, spec.seed);
        case Backend::fourier:  return make_fourier_blind_deconv(spec.M, spec.N, spec.m, spec.seed);
    }
    throw ParameterError("make_operator: unknown backend");
}

/// Explicit equivalent of any backend.
inline DenseOperator to_dense(const AnyOperator& op)
{
    return std::visit(
        [](const auto& o) -> DenseOperator {
            if constexpr (std::is_same_v<std::decay_t<decltype(o)>, DenseOperator>)
                return o;
            else
                return o.to_dense();
        },
        op);
}

} // namespace sparselow
