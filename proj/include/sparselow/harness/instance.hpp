#pragma once
//
// Seeded ground-truth instances. A trial is identified by its grid cell
// and trial number; everything random about it (the operator, the support,
// the factors) is derived from the experiment's seed base and that key.
//

#include <sparselow/operators/factory.hpp>

#include <numeric>

namespace sparselow::harness {

struct GroundTruthInstance {
    FactoredMatrix truth;
    OperatorSpec   op_spec;
    std::uint64_t  truth_seed = 0;
    Vector         y;
};

//
// X* = L R^T / sqrt(k) on a uniformly random s-row support, with L (s x k)
// and R (N x k) standard normal. For k = 1 this is u v^T with normal
// entries; for general k the entries of X* have unit variance.
//
inline FactoredMatrix random_ground_truth(Index M, Index N, Index k, Index s, std::uint64_t seed)
{
    ProblemDims{M, N, k, s, 1}.validate();
    Rng rng(seed);

    std::vector<Index> rows(static_cast<std::size_t>(M));
    std::iota(rows.begin(), rows.end(), Index{0});
    for (Index i = 0; i < s; ++i) {
        std::uniform_int_distribution<Index> pick(i, M - 1);
        std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(pick(rng))]);
    }
    rows.resize(static_cast<std::size_t>(s));
    std::sort(rows.begin(), rows.end());

    const Matrix L     = gaussian_matrix(rng, s, k);
    const Matrix R     = gaussian_matrix(rng, N, k);
    const Matrix block = L * R.transpose() / std::sqrt(double(k));
    return truncate_embedded(block, SupportSet{rows}, M, nullptr, k);
}

struct Instance {
    AnyOperator         op;
    GroundTruthInstance data;
};

inline Instance make_instance(const OperatorSpec& op_spec, Index k, Index s, std::uint64_t truth_seed)
{
    Instance out{make_operator(op_spec), {}};
    out.data.op_spec    = op_spec;
    out.data.truth_seed = truth_seed;
    out.data.truth      = random_ground_truth(op_spec.M, op_spec.N, k, s, truth_seed);
    out.data.y          = std::visit([&](const auto& op) { return op.apply(out.data.truth); }, out.op);
    return out;
}

/// Seeds of trial `trial` in cell (m, s, N).
struct TrialSeeds {
    std::uint64_t op    = 0;
    std::uint64_t truth = 0;
};

inline TrialSeeds trial_seeds(std::uint64_t seed_base, Index m, Index s, Index N, int trial)
{
    const std::uint64_t key = derive_seed(seed_base, {std::uint64_t(m), std::uint64_t(s), std::uint64_t(N),
                                                      std::uint64_t(trial)});
    return TrialSeeds{derive_seed(key, {1}), derive_seed(key, {2})};
}

} // namespace sparselow::harness
