#include "test_support.hpp"

#include <sparselow/core/projections.hpp>
#include <sparselow/oracle/oracle.hpp>

#include <gtest/gtest.h>

using namespace sparselow;
using namespace sparselow::testing;

namespace {

Matrix diag3(double a, double b, double c)
{
    Matrix X = Matrix::Zero(3, 3);
    X(0, 0) = a;
    X(1, 1) = b;
    X(2, 2) = c;
    return X;
}

} // namespace

// --- row norms -------------------------------------------------------------

TEST(RowNorms, UnitZeroAndPythagorean)
{
    EXPECT_TRUE(row_norms(Matrix::Identity(2, 2)).isApprox(Vector::Ones(2)));
    EXPECT_TRUE(row_norms(Matrix::Zero(3, 2)).isZero(0.0));

    Matrix X(2, 2);
    X << 3, 4, 0, 0;
    const Vector n = row_norms(X);
    EXPECT_DOUBLE_EQ(n[0], 5.0);
    EXPECT_DOUBLE_EQ(n[1], 0.0);
}

// --- hard thresholding -----------------------------------------------------

TEST(HardThreshold, KeepsLargestRows)
{
    Matrix X(3, 1);
    X << 5, 1, 3;
    const auto [H, S] = hard_threshold_rows(X, 2);
    EXPECT_EQ(S.indices, (std::vector<Index>{0, 2}));
    EXPECT_DOUBLE_EQ(H(0, 0), 5.0);
    EXPECT_DOUBLE_EQ(H(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(H(2, 0), 3.0);
}

TEST(HardThreshold, FixedPointOnSparseMatrices)
{
    Rng          rng(7);
    const Matrix X = random_sparse_low_rank(rng, 10, 4, 2, 3);
    EXPECT_EQ(hard_threshold_rows(X, 3).first, X);
    EXPECT_EQ(hard_threshold_rows(X, 5).first, X);
}

TEST(HardThreshold, TiesKeepLowestIndices)
{
    const Matrix X = Matrix::Ones(3, 1);
    const auto [H, S] = hard_threshold_rows(X, 2);
    EXPECT_EQ(S.indices, (std::vector<Index>{0, 1}));

    // Still a best approximation among all supports of size 2.
    const double d = (X - H).norm();
    oracle::for_each_support(3, 2, [&](const SupportSet& T) {
        const Matrix XT = scatter_rows(gather_rows(X, T), T, 3);
        EXPECT_LE(d, (X - XT).norm() + 1e-15);
    });
}

TEST(HardThreshold, BestApproximationByEnumeration)
{
    Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const Index  M = 2 + trial % 7;
        const Matrix X = random_matrix(rng, M, 3);
        for (Index s = 1; s <= M; ++s) {
            const double d = (X - hard_threshold_rows(X, s).first).norm();
            oracle::for_each_support(M, s, [&](const SupportSet& T) {
                const Matrix XT = scatter_rows(gather_rows(X, T), T, M);
                EXPECT_LE(d, (X - XT).norm() + 1e-12);
            });
        }
    }
}

TEST(HardThreshold, RejectsOutOfRangeSparsity)
{
    const Matrix X = Matrix::Ones(3, 2);
    EXPECT_THROW(hard_threshold_rows(X, 0), ParameterError);
    EXPECT_THROW(hard_threshold_rows(X, 4), ParameterError);
}

// --- rank truncation -------------------------------------------------------

TEST(TruncateRank, DiagonalInput)
{
    const FactoredMatrix T = truncate_rank(diag3(3, 2, 1), 2);
    EXPECT_EQ(T.rank(), 2);
    EXPECT_TRUE(T.densify().isApprox(diag3(3, 2, 0), 1e-14));
}

TEST(TruncateRank, RankDeficientInputIsReproduced)
{
    Vector u(4), v(3);
    u << 1, -2, 0, 3;
    v << 2, 1, -1;
    const Matrix         X = u * v.transpose();
    const FactoredMatrix T = truncate_rank(X, 2);
    EXPECT_EQ(T.rank(), 1);
    EXPECT_LT((T.densify() - X).norm(), 1e-13);
    EXPECT_EQ(T.support().indices, (std::vector<Index>{0, 1, 3}));
    EXPECT_EQ(T.U().row(2).norm(), 0.0);
}

TEST(TruncateRank, ErrorMatchesTailSingularValues)
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix         X  = random_matrix(rng, 6, 4);
        const FactoredMatrix T  = truncate_rank(X, 2);
        const Vector         sv = singular_values_via_gram(X);
        const double         expected = sv[2] * sv[2] + sv[3] * sv[3];
        EXPECT_NEAR((X - T.densify()).squaredNorm(), expected, 1e-10 * X.squaredNorm());
        EXPECT_TRUE(T.is_valid());
        EXPECT_LT(orthonormality_defect(T.U()), kOrthonormalityTol * 10);
        EXPECT_LT(orthonormality_defect(T.V()), kOrthonormalityTol * 10);
    }
}

TEST(TruncateRank, SignConvention)
{
    Rng                  rng(5);
    const FactoredMatrix T = truncate_rank(random_matrix(rng, 7, 5), 3);
    for (Index j = 0; j < T.rank(); ++j) {
        Index i = 0;
        while (std::abs(T.U()(i, j)) <= 1e-12)
            ++i;
        EXPECT_GT(T.U()(i, j), 0.0);
    }
}

TEST(TruncateRank, RejectsBadRank)
{
    EXPECT_THROW(truncate_rank(Matrix::Ones(3, 2), 0), ParameterError);
    EXPECT_THROW(truncate_rank(Matrix::Ones(3, 2), 3), ParameterError);
}

// --- composite projections -------------------------------------------------

TEST(QuasiProjection, FixedPointOnFeasibleSet)
{
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix X = random_sparse_low_rank(rng, 9, 5, 2, 4);
        EXPECT_LT((quasi_proj_ks(X, 2, 4).densify() - X).norm(), 1e-12 * X.norm());
        EXPECT_LT((quasi_proj_hat_ks(X, 2, 4).densify() - X).norm(), 1e-12 * X.norm());
    }
}

TEST(QuasiProjection, SparseInputReducesToTruncation)
{
    Rng          rng(17);
    const Matrix X = random_sparse_low_rank(rng, 9, 5, 4, 4); // rank 4 > k
    const Matrix P = quasi_proj_ks(X, 2, 4).densify();
    EXPECT_LT((P - truncate_rank(X, 2).densify()).norm(), 1e-12 * X.norm());
}

TEST(QuasiProjection, OutputIsFeasible)
{
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix X = random_matrix(rng, 10, 6);
        for (const FactoredMatrix& P : {quasi_proj_ks(X, 2, 4), quasi_proj_hat_ks(X, 2, 4)}) {
            EXPECT_LE(P.rank(), 2);
            EXPECT_LE(P.support().size(), 4);
            EXPECT_LE(count_nonzero_rows(P.densify()), 4);
            EXPECT_TRUE(P.is_valid());
        }
    }
}

TEST(QuasiProjection, WithinSqrtTwoOfExactProjection)
{
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix X     = random_matrix(rng, 8, 4);
        const double exact = oracle::distance_to_set(X, 1, 2);
        EXPECT_LE((X - quasi_proj_ks(X, 1, 2).densify()).norm(), std::sqrt(2.0) * exact + 1e-9);
        EXPECT_LE((X - quasi_proj_hat_ks(X, 1, 2).densify()).norm(), std::sqrt(2.0) * exact + 1e-9);
    }
}

TEST(QuasiProjection, CompactInputMatchesDensePath)
{
    Rng rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        const FactoredMatrix base = random_factored(rng, 12, 7, 2);
        const TangentVector  xi   = tangent_project(base, random_matrix(rng, 12, 7));
        const Matrix         dense = xi.densify();

        EXPECT_LT((quasi_proj_hat_ks(xi, 2, 4).densify() - quasi_proj_hat_ks(dense, 2, 4).densify()).norm(),
                  1e-10 * dense.norm());

        const CompactFactorization step = tangent_retract_combine(base, xi, 0.3);
        const Matrix               stepd = step.densify();
        EXPECT_LT((quasi_proj_ks(step, 2, 4).densify() - quasi_proj_ks(stepd, 2, 4).densify()).norm(),
                  1e-10 * stepd.norm());
        EXPECT_LT((quasi_proj_hat_ks(step, 2, 4).densify() - quasi_proj_hat_ks(stepd, 2, 4).densify()).norm(),
                  1e-10 * stepd.norm());
    }
}

TEST(QuasiProjection, FactoredInputMatchesDensePath)
{
    Rng rng(31);
    const FactoredMatrix X = random_factored(rng, 11, 6, 3);
    EXPECT_LT((quasi_proj_ks(X, 2, 4).densify() - quasi_proj_ks(X.densify(), 2, 4).densify()).norm(), 1e-10);
}

// --- soft thresholding -----------------------------------------------------

TEST(SoftThreshold, ZeroThresholdIsIdentity)
{
    Rng          rng(37);
    const Matrix X = random_matrix(rng, 5, 3);
    EXPECT_EQ(soft_threshold_rows(X, 0.0), X);
    const FactoredMatrix F = random_factored(rng, 6, 4, 2);
    EXPECT_LT((soft_threshold_rows(F, 0.0).densify() - F.densify()).norm(), 1e-12);
}

TEST(SoftThreshold, BoundaryRowIsZeroed)
{
    Matrix X(1, 2);
    X << 3, 4;
    EXPECT_TRUE(soft_threshold_rows(X, 5.0).isZero(0.0));
}

TEST(SoftThreshold, ShrinksTowardOrigin)
{
    Matrix X(1, 2);
    X << 3, 4;
    const Matrix S = soft_threshold_rows(X, 1.0);
    EXPECT_NEAR(S(0, 0), 2.4, 1e-15);
    EXPECT_NEAR(S(0, 1), 3.2, 1e-15);

    // First-order condition mu x/||x|| + (x - y) = 0.
    const Vector x = S.row(0).transpose();
    const Vector y = X.row(0).transpose();
    EXPECT_LT((1.0 * x / x.norm() + (x - y)).norm(), 1e-14);

    // Grid minimization of mu ||x|| + 1/2 ||x - y||^2 over a 2-D box.
    double best = std::numeric_limits<double>::infinity();
    Vector arg(2);
    for (int i = 0; i <= 800; ++i) {
        for (int j = 0; j <= 800; ++j) {
            Vector c(2);
            c << 2.0 + i * 1e-3 - 0.4, 3.0 + j * 1e-3 - 0.4 + 0.2;
            const double v = c.norm() + 0.5 * (c - y).squaredNorm();
            if (v < best) {
                best = v;
                arg  = c;
            }
        }
    }
    EXPECT_NEAR(arg[0], 2.4, 1e-3);
    EXPECT_NEAR(arg[1], 3.2, 1e-3);
}

TEST(SoftThreshold, RejectsNegativeThreshold)
{
    EXPECT_THROW(soft_threshold_rows(Matrix::Ones(2, 2), -1.0), ParameterError);
}

TEST(SoftThreshold, FactoredMatchesDenseAndKeepsRank)
{
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const FactoredMatrix F  = random_factored(rng, 15, 6, 2);
        const Matrix         Fd = F.densify();
        const double         mu = 0.5 * row_norms(Fd).maxCoeff();
        const FactoredMatrix S  = soft_threshold_rows(F, mu);
        EXPECT_LT((S.densify() - soft_threshold_rows(Fd, mu)).norm(), 1e-12 * Fd.norm());
        EXPECT_LE(S.rank(), F.rank());
        EXPECT_TRUE(S.is_valid());
    }
}

// --- tangent space ---------------------------------------------------------

TEST(TangentProject, BasePointIsFixed)
{
    Rng                  rng(43);
    const FactoredMatrix X  = random_factored(rng, 9, 6, 2);
    const Matrix         Xd = X.densify();
    EXPECT_LT((tangent_project(X, Xd).densify() - Xd).norm(), 1e-10 * Xd.norm());
}

TEST(TangentProject, AnnihilatesNormalSpace)
{
    Rng                  rng(47);
    const FactoredMatrix X = random_factored(rng, 9, 6, 2);
    const Matrix         W = random_matrix(rng, 9, 6);
    const Matrix         Z = (Matrix::Identity(9, 9) - X.U() * X.U().transpose()) * W *
                     (Matrix::Identity(6, 6) - X.V() * X.V().transpose());
    EXPECT_LT(tangent_project(X, Z).densify().norm(), 1e-10);
}

TEST(TangentProject, ProjectorProperties)
{
    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const FactoredMatrix X  = random_factored(rng, 10, 7, 2);
        const Matrix         Z1 = random_matrix(rng, 10, 7);
        const Matrix         Z2 = random_matrix(rng, 10, 7);
        const TangentVector  T1 = tangent_project(X, Z1);
        const Matrix         P1 = T1.densify();

        // Matches the dense formula.
        EXPECT_LT((P1 - dense_tangent_formula(X.U(), X.V(), Z1)).norm(), 1e-10);
        // Pythagoras.
        EXPECT_NEAR(P1.squaredNorm() + (Z1 - P1).squaredNorm(), Z1.squaredNorm(), 1e-10 * Z1.squaredNorm());
        // Idempotent.
        EXPECT_LT((tangent_project(X, P1).densify() - P1).norm(), 1e-10);
        // Self-adjoint.
        EXPECT_NEAR(inner(P1, Z2), inner(Z1, tangent_project(X, Z2).densify()), 1e-10);
        // Rank <= 2k and compact norm.
        EXPECT_LE(rank_of(P1), 4);
        EXPECT_NEAR(T1.squared_norm(), P1.squaredNorm(), 1e-10 * P1.squaredNorm());
        // Block orthogonality.
        EXPECT_LT((X.U().transpose() * T1.row_update).norm(), kStructuralTol);
        EXPECT_LT((X.V().transpose() * T1.col_update).norm(), kStructuralTol);
    }
}

TEST(TangentProject, CommutesWithSupportSelector)
{
    Rng rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix         Xs = random_sparse_low_rank(rng, 12, 5, 2, 4);
        const FactoredMatrix X  = truncate_rank(Xs, 2);
        const Matrix         Z  = random_matrix(rng, 12, 5);
        const auto           D  = [&](const Matrix& A) { return scatter_rows(gather_rows(A, X.support()), X.support(), 12); };
        const Matrix lhs = D(tangent_project(X, Z).densify());
        const Matrix rhs = tangent_project(X, D(Z)).densify();
        EXPECT_LT((lhs - rhs).norm(), 1e-10);
    }
}

TEST(TangentProject, RankDeficientBaseUsesAvailableFactors)
{
    Vector u(5), v(4);
    u << 1, 0, 2, 0, -1;
    v << 1, 2, 0, 1;
    const FactoredMatrix X = truncate_rank(Matrix(u * v.transpose()), 2);
    ASSERT_EQ(X.rank(), 1);
    Rng          rng(61);
    const Matrix Z = random_matrix(rng, 5, 4);
    EXPECT_LT((tangent_project(X, Z).densify() - dense_tangent_formula(X.U(), X.V(), Z)).norm(), 1e-12);
}

TEST(RetractCombine, ZeroStepReturnsBase)
{
    Rng                  rng(67);
    const FactoredMatrix X  = random_factored(rng, 9, 6, 2);
    const TangentVector  xi = tangent_project(X, random_matrix(rng, 9, 6));
    EXPECT_LT((tangent_retract_combine(X, xi, 0.0).densify() - X.densify()).norm(), 1e-12);
}

TEST(RetractCombine, FullStepAlongBaseGivesZero)
{
    Rng                  rng(71);
    const FactoredMatrix X  = random_factored(rng, 9, 6, 2);
    const TangentVector  xi = tangent_project(X, X.densify());
    EXPECT_LT(tangent_retract_combine(X, xi, 1.0).densify().norm(), 1e-10);
}

TEST(RetractCombine, MatchesDenseArithmetic)
{
    Rng rng(73);
    for (int trial = 0; trial < 20; ++trial) {
        const Index          k  = 1 + trial % 3;
        const FactoredMatrix X  = random_factored(rng, 11, 5 + k, k);
        const TangentVector  xi = tangent_project(X, random_matrix(rng, 11, 5 + k));
        const double         alpha = 0.1 + 0.2 * trial;
        const CompactFactorization C = tangent_retract_combine(X, xi, alpha);
        EXPECT_LT((C.densify() - (X.densify() - alpha * xi.densify())).norm(), 1e-10);
        EXPECT_LT(orthonormality_defect(C.left), 1e-12);
        EXPECT_LT(orthonormality_defect(C.right), 1e-12);
        EXPECT_LE(C.left.cols(), 2 * k);
    }
}

TEST(RetractCombine, NarrowMatricesStayConsistent)
{
    // N < 2k: the right basis has fewer than 2k columns.
    Rng                  rng(79);
    const FactoredMatrix X  = random_factored(rng, 10, 3, 2);
    const TangentVector  xi = tangent_project(X, random_matrix(rng, 10, 3));
    const CompactFactorization C = tangent_retract_combine(X, xi, 0.7);
    EXPECT_EQ(C.right.cols(), 3);
    EXPECT_LT((C.densify() - (X.densify() - 0.7 * xi.densify())).norm(), 1e-10);
}

TEST(RetractCombine, RejectsForeignDirection)
{
    Rng                  rng(83);
    const FactoredMatrix X  = random_factored(rng, 9, 6, 2);
    const FactoredMatrix Y  = random_factored(rng, 9, 6, 1);
    const TangentVector  xi = tangent_project(Y, random_matrix(rng, 9, 6));
    EXPECT_THROW(tangent_retract_combine(X, xi, 1.0), ParameterError);
}

TEST(ProblemDims, ValidatesRankBelowSparsity)
{
    ProblemDims d{10, 5, 2, 3, 20};
    EXPECT_NO_THROW(d.validate());
    d.k = 3;
    EXPECT_THROW(d.validate(), ParameterError);
    d = ProblemDims{10, 5, 2, 11, 20};
    EXPECT_THROW(d.validate(), ParameterError);
    d = ProblemDims{10, 1, 2, 3, 20};
    EXPECT_THROW(d.validate(), ParameterError);
    d = ProblemDims{10, 5, 2, 3, 0};
    EXPECT_THROW(d.validate(), ParameterError);
}
