#include "test_support.hpp"

#include <sparselow/oracle/oracle.hpp>
#include <sparselow/operators/factory.hpp>
#include <sparselow/solvers/diagnostics.hpp>
#include <sparselow/solvers/solvers.hpp>

#include <gtest/gtest.h>

using namespace sparselow;
using namespace sparselow::testing;

namespace {

struct Problem {
    Matrix         truth;
    FactoredMatrix truth_factored;
    Vector         y;
};

template <class Op>
Problem make_problem(const Op& op, Index k, Index s, std::uint64_t seed)
{
    Rng     rng(seed);
    Problem p;
    p.truth          = random_sparse_low_rank(rng, op.rows(), op.cols(), k, s);
    p.truth_factored = truncate_rank(p.truth, k);
    p.y              = op.apply(p.truth);
    return p;
}

SolverConfig config(Algorithm a, Index M, Index N, Index k, Index s, Index m)
{
    SolverConfig cfg;
    cfg.algorithm = a;
    cfg.dims      = ProblemDims{M, N, k, s, m};
    return cfg;
}

} // namespace

// --- line search -----------------------------------------------------------

TEST(Armijo, AcceptsUnitStepOnSufficientDecrease)
{
    int        calls = 0;
    const auto f     = [&](double) { ++calls; return 0.0; };
    const auto r     = armijo_search(1.0, 1.0, f, StepRule::armijo());
    EXPECT_EQ(r.alpha, 1.0);
    EXPECT_FALSE(r.fallback);
    EXPECT_EQ(r.backtracks, 0);
    EXPECT_EQ(calls, 1);
}

TEST(Armijo, BacktracksUntilDecrease)
{
    // f(alpha) = 1 + 4 alpha^2 - 2 alpha decreases only for small alpha.
    const auto f = [](double a) { return 1.0 + 4.0 * a * a - 2.0 * a; };
    const auto r = armijo_search(1.0, 1.0, f, StepRule::armijo());
    EXPECT_EQ(r.alpha, 0.25);
    EXPECT_EQ(r.backtracks, 2);
    EXPECT_FALSE(r.fallback);
}

TEST(Armijo, FallsBackToUnitStep)
{
    int        calls = 0;
    const auto f     = [&](double) { ++calls; return 2.0; };
    const auto r     = armijo_search(1.0, 1.0, f, StepRule::armijo(0.5, 1e-4, 50));
    EXPECT_EQ(r.alpha, 1.0);
    EXPECT_TRUE(r.fallback);
    EXPECT_EQ(calls, 51);
}

TEST(StepRule, Validation)
{
    EXPECT_THROW(StepRule::constant(0.0).validate(), ParameterError);
    EXPECT_THROW(StepRule::armijo(1.0).validate(), ParameterError);
    EXPECT_THROW(StepRule::armijo(0.5, 0.0).validate(), ParameterError);
    EXPECT_THROW(StepRule::armijo(0.5, 1e-4, 0).validate(), ParameterError);
    EXPECT_NO_THROW(StepRule::armijo().validate());
}

// --- single steps against the dense reference -------------------------------

TEST(Steps, MatchDenseReference)
{
    const Index M = 12, N = 6, k = 2, s = 4, m = 80;
    for (int trial = 0; trial < 5; ++trial) {
        const DenseOperator  op = make_gaussian(M, N, m, 40 + trial);
        const Problem        pb = make_problem(op, k, s, 70 + trial);
        Rng                  rng(trial);
        const FactoredMatrix X  = truncate_rank(Matrix(pb.truth + 0.1 * random_sparse_low_rank(rng, M, N, k, s)), k);
        const TrialPoint     cur = measure(op, pb.y, X);
        const StepRule       rule = StepRule::constant(0.7);

        oracle::ReferenceStepParams params{k, s, 0.95, 3};
        const Matrix iht_ref  = oracle::dense_reference_step(op, pb.y, X, oracle::Variant::iht, 0.7, params);
        const Matrix riht_ref = oracle::dense_reference_step(op, pb.y, X, oracle::Variant::riht, 0.7, params);
        const Matrix rpg_ref  = oracle::dense_reference_step(op, pb.y, X, oracle::Variant::rpg, 0.7, params);

        EXPECT_LT((iht_step(op, pb.y, cur, k, s, rule).next.X.densify() - iht_ref).norm(), 1e-9);
        EXPECT_LT((riht_step(op, pb.y, cur, k, s, rule).next.X.densify() - riht_ref).norm(), 1e-9);
        EXPECT_LT((rpg_step(op, pb.y, cur, k, 3, 0.95, rule).next.X.densify() - rpg_ref).norm(), 1e-9);
    }
}

TEST(Steps, TrialPointCarriesItsResidual)
{
    const RankOneOperator op = make_rank_one(15, 5, 60, 3);
    const Problem         pb = make_problem(op, 1, 3, 4);
    const TrialPoint      x0 = measure(op, pb.y, FactoredMatrix::zero(15, 5));
    const StepOutcome     st = initial_step(op, pb.y, 1, 3, StepRule::armijo());
    EXPECT_LT((st.next.residual - (op.apply(st.next.X.densify()) - pb.y)).norm(), 1e-12 * pb.y.norm());
    EXPECT_NEAR(st.next.objective, objective(op, st.next.X.densify(), pb.y), 1e-12 * x0.objective);
    EXPECT_LT(st.next.objective, x0.objective);
}

// --- full runs -------------------------------------------------------------

TEST(Solvers, ZeroMeasurementsConvergeImmediately)
{
    const DenseOperator op = make_gaussian(10, 4, 30, 1);
    const Vector        y  = Vector::Zero(30);
    for (Algorithm a : {Algorithm::iht, Algorithm::riht, Algorithm::rpg}) {
        const RunRecord run = run_solver(op, y, config(a, 10, 4, 1, 2, 30));
        EXPECT_EQ(run.termination, Termination::converged) << to_string(a);
        EXPECT_LE(run.iterations(), 1);
        EXPECT_EQ(run.final_iterate.densify().norm(), 0.0);
    }
}

TEST(Solvers, IteratesStayFeasible)
{
    const Index           M = 30, N = 6, k = 2, s = 4, m = 70;
    const RankOneOperator op = make_rank_one(M, N, m, 11);
    const Problem         pb = make_problem(op, k, s, 12);
    for (Algorithm a : {Algorithm::iht, Algorithm::riht}) {
        SolverConfig cfg = config(a, M, N, k, s, m);
        cfg.max_iter     = 60;
        const RunRecord run = run_solver(op, pb.y, cfg);
        for (const auto& e : run.trace) {
            EXPECT_LE(e.support.size(), s);
            EXPECT_LE(e.rank, k);
        }
    }
    SolverConfig cfg = config(Algorithm::rpg, M, N, k, s, m);
    cfg.max_iter     = 60;
    for (const auto& e : run_solver(op, pb.y, cfg).trace)
        EXPECT_LE(e.rank, k);
}

TEST(Solvers, AcceptedStepsSatisfyArmijo)
{
    const Index           M = 25, N = 5, k = 1, s = 3, m = 50;
    const RankOneOperator op = make_rank_one(M, N, m, 21);
    const Problem         pb = make_problem(op, k, s, 22);
    for (Algorithm a : {Algorithm::iht, Algorithm::riht, Algorithm::rpg}) {
        SolverConfig cfg = config(a, M, N, k, s, m);
        cfg.max_iter     = 80;
        const RunRecord run = run_solver(op, pb.y, cfg);
        for (std::size_t i = 1; i < run.trace.size(); ++i) {
            const auto& e = run.trace[i];
            if (e.fallback)
                continue;
            const double decrease = run.trace[i - 1].objective - e.trial_objective;
            EXPECT_GE(decrease, cfg.step.gamma * e.step * e.direction_norm_sq - 1e-12 * run.trace[i - 1].objective)
                << to_string(a) << " iteration " << e.iteration;
        }
    }
}

TEST(Solvers, RunsAreDeterministic)
{
    const FourierBlindDeconvOperator op = make_fourier_blind_deconv(20, 6, 60, 5);
    const Problem                    pb = make_problem(op, 1, 3, 6);
    for (Algorithm a : {Algorithm::iht, Algorithm::riht, Algorithm::rpg}) {
        SolverConfig cfg = config(a, 20, 6, 1, 3, 60);
        cfg.max_iter     = 40;
        const RunRecord r1 = run_solver(op, pb.y, cfg);
        const RunRecord r2 = run_solver(op, pb.y, cfg);
        ASSERT_EQ(r1.trace.size(), r2.trace.size());
        for (std::size_t i = 0; i < r1.trace.size(); ++i) {
            EXPECT_EQ(r1.trace[i].objective, r2.trace[i].objective);
            EXPECT_EQ(r1.trace[i].step, r2.trace[i].step);
        }
        EXPECT_EQ(r1.final_iterate.densify(), r2.final_iterate.densify());
    }
}

TEST(Solvers, FactoredRunMatchesDenseEquivalent)
{
    const Index           M = 18, N = 5, k = 1, s = 3, m = 60;
    const RankOneOperator op    = make_rank_one(M, N, m, 31);
    const DenseOperator   dense = op.to_dense();
    const Problem         pb    = make_problem(op, k, s, 32);
    for (Algorithm a : {Algorithm::iht, Algorithm::riht, Algorithm::rpg}) {
        SolverConfig cfg = config(a, M, N, k, s, m);
        cfg.max_iter     = 15;
        const RunRecord fast = run_solver(op, pb.y, cfg);
        const RunRecord slow = run_solver(dense, pb.y, cfg);
        ASSERT_EQ(fast.trace.size(), slow.trace.size()) << to_string(a);
        EXPECT_LT((fast.final_iterate.densify() - slow.final_iterate.densify()).norm(), 1e-9 * pb.truth.norm())
            << to_string(a);
    }
}

TEST(Solvers, RecoverWellConditionedInstance)
{
    const Index         M = 30, N = 8, k = 1, s = 3, m = 120;
    const DenseOperator op = make_gaussian(M, N, m, 41);
    const Problem       pb = make_problem(op, k, s, 42);
    for (Algorithm a : {Algorithm::iht, Algorithm::riht, Algorithm::rpg}) {
        SolverConfig cfg = config(a, M, N, k, s, m);
        cfg.truth        = pb.truth_factored;
        cfg.error_tol    = 1e-6;
        if (a == Algorithm::rpg)
            cfg.tau = 0.9;
        const RunRecord run = run_solver(op, pb.y, cfg);
        EXPECT_EQ(run.termination, Termination::converged) << to_string(a);
        EXPECT_LT(run.final_rel_error(), 1e-5) << to_string(a);
        EXPECT_LT(relative_error(run.final_iterate, pb.truth_factored),
                  (run.final_iterate.densify() - pb.truth).norm() / pb.truth.norm() + 1e-12);
    }
}

TEST(Solvers, RpgThresholdSchedule)
{
    const Index           M = 20, N = 5, k = 1, s = 3, m = 50;
    const RankOneOperator op = make_rank_one(M, N, m, 51);
    const Problem         pb = make_problem(op, k, s, 52);
    SolverConfig          cfg = config(Algorithm::rpg, M, N, k, s, m);
    cfg.tau                   = 0.9;
    cfg.max_iter              = 30;
    const RunRecord run       = run_solver(op, pb.y, cfg);
    ASSERT_GT(run.trace.size(), 3u);
    for (std::size_t i = 2; i < run.trace.size(); ++i) {
        const auto& e = run.trace[i];
        EXPECT_NEAR(e.mu, std::pow(0.9, double(e.iteration - 1)) * e.mu_reference, 1e-14 * e.mu_reference);
    }
}

TEST(Solvers, DefaultRpgInitialSparsity)
{
    EXPECT_EQ(default_rpg_initial_sparsity(ProblemDims{150, 50, 1, 3, 200}), 150);
    EXPECT_EQ(default_rpg_initial_sparsity(ProblemDims{1000, 50, 2, 3, 400}), 152);
    EXPECT_EQ(default_rpg_initial_sparsity(ProblemDims{100, 50, 2, 3, 60}), 2);
}

TEST(Solvers, RejectsInconsistentConfiguration)
{
    const DenseOperator op = make_gaussian(10, 4, 30, 1);
    const Vector        y  = Vector::Zero(30);
    SolverConfig        cfg = config(Algorithm::iht, 10, 4, 2, 2, 30);
    EXPECT_THROW(run_solver(op, y, cfg), ParameterError);
    cfg = config(Algorithm::iht, 11, 4, 1, 2, 30);
    EXPECT_THROW(run_solver(op, y, cfg), ParameterError);
    cfg = config(Algorithm::iht, 10, 4, 1, 2, 30);
    EXPECT_THROW(run_solver(op, Vector::Zero(29), cfg), ParameterError);
    cfg.error_tol = 1e-3;
    EXPECT_THROW(run_solver(op, y, cfg), ParameterError);
}

TEST(Solvers, TerminationNames)
{
    EXPECT_EQ(to_string(Termination::converged), "converged");
    EXPECT_EQ(to_string(Termination::max_iter), "maxIter");
    EXPECT_EQ(parse_algorithm("rpg"), Algorithm::rpg);
    EXPECT_THROW(parse_algorithm("cg"), ParameterError);
}

// --- distances and diagnostics ---------------------------------------------

TEST(Diagnostics, FrobeniusDistanceMatchesDense)
{
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const FactoredMatrix A = random_factored(rng, 9, 5, 2);
        const FactoredMatrix B = random_factored(rng, 9, 5, 3);
        EXPECT_NEAR(frobenius_distance(A, B), (A.densify() - B.densify()).norm(), 1e-12 * A.densify().norm());
        EXPECT_NEAR(frobenius_distance(A, A), 0.0, 1e-13 * A.densify().norm());
    }
}

TEST(Diagnostics, RestrictedNormMatchesDenseSpectralNorm)
{
    const Index          M = 8, N = 4, k = 1, s = 3, m = 60;
    const DenseOperator  op = make_gaussian(M, N, m, 71);
    Rng                  rng(72);
    const FactoredMatrix X  = truncate_rank(random_sparse_low_rank(rng, M, N, k, s), k);

    // Matrix of B = D_S P_T (I - A^*A) D_S P_T on vec(R^{M x N}).
    const Index MN = M * N;
    Matrix      Bmat(MN, MN);
    const auto  DP = [&](const Matrix& Z) {
        Matrix P = dense_tangent_formula(X.U(), X.V(), Z);
        for (Index i = 0; i < M; ++i)
            if (!X.support().contains(i))
                P.row(i).setZero();
        return P;
    };
    for (Index c = 0; c < MN; ++c) {
        Matrix E = Matrix::Zero(M, N);
        E(c % M, c / M) = 1.0;
        const Matrix  Z  = DP(E);
        const Vector  AZ = op.measurement_rows() * Z.reshaped();
        const Matrix  G  = Matrix((op.measurement_rows().transpose() * AZ).reshaped(M, N));
        Bmat.col(c)      = DP(Matrix(Z - G)).reshaped();
    }
    const double exact = Eigen::JacobiSVD<Matrix>(Bmat).singularValues()[0];

    const double est = estimate_restricted_spectral_norm(op, X, 300);
    EXPECT_LE(est, exact * (1.0 + 1e-10));
    EXPECT_GE(est, 0.95 * exact);
    EXPECT_LE(estimate_restricted_spectral_norm(op, X, 10), est + 1e-15);
}

TEST(Diagnostics, LocalContractionOnRipOperator)
{
    const Index          M = 20, N = 5, k = 1, s = 2, m = 10 * k * (s + N) * 4;
    const DenseOperator  op = make_gaussian(M, N, m, 81);
    const Problem        pb = make_problem(op, k, s, 82);
    Rng                  rng(83);
    const Matrix         E    = random_sparse_low_rank(rng, M, N, k, s);
    const FactoredMatrix start = truncate_rank(Matrix(pb.truth + 1e-3 * pb.truth.norm() / E.norm() * E), k);

    SolverConfig cfg = config(Algorithm::riht, M, N, k, s, m);
    cfg.step         = StepRule::constant(1.0);
    cfg.truth        = pb.truth_factored;
    cfg.initial      = start;
    cfg.max_iter     = 30;
    cfg.residual_tol = 0.0;
    const RunRecord run = run_solver(op, pb.y, cfg);
    const double    delta = estimate_restricted_spectral_norm(op, pb.truth_factored, 200);
    ASSERT_LT(delta, 1.0);

    int checked = 0;
    for (std::size_t i = 1; i < run.trace.size(); ++i) {
        const double prev = run.trace[i - 1].rel_error, cur = run.trace[i].rel_error;
        if (prev < 1e-13)
            break;
        EXPECT_LE(cur / prev, delta + 0.05) << "iteration " << i;
        ++checked;
    }
    EXPECT_GT(checked, 3);
}
