#pragma once
//
// Property checks run by `sparselow verify`: the projections against the
// brute-force oracle, the proximal map against a grid search, and every
// fast operator path against its explicit dense equivalent.
//

#include <sparselow/harness/output.hpp>
#include <sparselow/oracle/oracle.hpp>

namespace sparselow::harness {

struct PropertyResult {
    std::string name;
    bool        passed = false;
    int         cases  = 0;
    /// Largest observed violation measure (property specific).
    double      worst = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed      = 1;
    int           instances = 200;
};

namespace detail {

inline Matrix random_block_sparse(Rng& rng, Index M, Index N, Index s)
{
    Matrix X = gaussian_matrix(rng, M, N);
    // Emphasize s random rows so that the instances are near the set.
    for (Index i = 0; i < s; ++i)
        X.row(std::uniform_int_distribution<Index>(0, M - 1)(rng)) *= 3.0;
    return X;
}

} // namespace detail

inline PropertyResult verify_quasi_optimality(const VerifyOptions& opt)
{
    PropertyResult r{"quasi-optimal projections within sqrt(2) of the exact projection"};
    Rng            rng(derive_seed(opt.seed, {11}));
    r.passed = true;
    for (int t = 0; t < opt.instances; ++t) {
        const Index  M = 3 + t % 10, N = 2 + t % 5;
        const Index  s = 2 + t % std::min<Index>(3, M - 1);
        const Index  k = 1 + t % (s - 1);
        const Matrix X = detail::random_block_sparse(rng, M, N, s);
        const double d = oracle::distance_to_set(X, std::min(k, N), s);
        for (const FactoredMatrix& P : {quasi_proj_ks(X, std::min(k, N), s), quasi_proj_hat_ks(X, std::min(k, N), s)}) {
            const double e = (X - P.densify()).norm();
            r.worst        = std::max(r.worst, d > 0 ? e / d : 0.0);
            if (e > std::sqrt(2.0) * d + 1e-9)
                r.passed = false;
        }
        ++r.cases;
    }
    r.detail = "worst ratio " + format_double(r.worst);
    return r;
}

inline PropertyResult verify_soft_threshold(const VerifyOptions& opt)
{
    PropertyResult r{"row soft thresholding is the row-wise proximal map"};
    Rng            rng(derive_seed(opt.seed, {12}));
    r.passed = true;
    for (int t = 0; t < opt.instances; ++t) {
        const Matrix Y  = gaussian_matrix(rng, 4, 3);
        const double mu = 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const Matrix S  = soft_threshold_rows(Y, mu);
        for (Index i = 0; i < Y.rows(); ++i) {
            const Vector ref = oracle::exact_prox_rowwise(Y.row(i).transpose(), mu);
            r.worst          = std::max(r.worst, (S.row(i).transpose() - ref).norm());
        }
        ++r.cases;
    }
    r.passed = r.worst <= 1e-5;
    r.detail = "max deviation from grid minimizer " + format_double(r.worst);
    return r;
}

inline PropertyResult verify_fast_paths(const VerifyOptions& opt)
{
    PropertyResult r{"rank-one and Fourier fast paths match their dense equivalents"};
    Rng            rng(derive_seed(opt.seed, {13}));
    const int      count = std::max(1, opt.instances / 10);
    for (int t = 0; t < count; ++t) {
        const Index M = 5 + t % 20, N = 4 + t % 9, m = 20 + t % 30;
        for (Backend b : {Backend::rank_one, Backend::fourier}) {
            const AnyOperator   any   = make_operator(OperatorSpec{b, M, N, m, derive_seed(opt.seed, {14, std::uint64_t(t)})});
            const DenseOperator dense = to_dense(any);
            const FactoredMatrix X =
                truncate_rank(Matrix(gaussian_matrix(rng, M, 2) * gaussian_matrix(rng, 2, N)), 2);
            std::visit(
                [&](const auto& op) {
                    const Vector z     = gaussian_vector(rng, op.measurement_size());
                    const double scale = X.frobenius_norm() * z.norm() + 1.0;
                    r.worst = std::max(r.worst, (op.apply(X) - dense.apply(X.densify())).norm() / scale);
                    r.worst = std::max(r.worst, (op.adjoint(z) - dense.adjoint(z)).norm() / scale);
                    r.worst = std::max(r.worst, (op.projected_adjoint(X, z).densify() -
                                                 tangent_project(X, dense.adjoint(z)).densify())
                                                        .norm() /
                                                    scale);
                },
                any);
            ++r.cases;
        }
    }
    r.passed = r.worst <= 1e-9;
    r.detail = "max relative deviation " + format_double(r.worst);
    return r;
}

inline PropertyResult verify_adjoint_consistency(const VerifyOptions& opt)
{
    PropertyResult r{"<A(X), z> = <X, A*(z)> for every backend"};
    Rng            rng(derive_seed(opt.seed, {15}));
    const int      count = std::max(1, opt.instances / 10);
    for (int t = 0; t < count; ++t) {
        for (Backend b : {Backend::gaussian, Backend::rank_one, Backend::fourier}) {
            const AnyOperator any = make_operator(OperatorSpec{b, 7, 5, 25, derive_seed(opt.seed, {16, std::uint64_t(t)})});
            std::visit(
                [&](const auto& op) {
                    const Matrix X   = gaussian_matrix(rng, 7, 5);
                    const Vector z   = gaussian_vector(rng, op.measurement_size());
                    const double lhs = op.apply(X).dot(z);
                    const double rhs = (X.array() * op.adjoint(z).array()).sum();
                    r.worst          = std::max(r.worst, std::abs(lhs - rhs) / (X.norm() * z.norm()));
                },
                any);
            ++r.cases;
        }
    }
    r.passed = r.worst <= 1e-10;
    r.detail = "max relative gap " + format_double(r.worst);
    return r;
}

inline PropertyResult verify_fourier_realness(const VerifyOptions& opt)
{
    PropertyResult r{"A*A(X) is real for real rank-one X under Fourier measurements"};
    Rng            rng(derive_seed(opt.seed, {17}));
    const int      count = std::max(1, opt.instances / 10);
    for (int t = 0; t < count; ++t) {
        const auto   op = make_fourier_blind_deconv(10, 6, 32 + t % 16, derive_seed(opt.seed, {18, std::uint64_t(t)}));
        const Matrix X  = gaussian_vector(rng, 10) * gaussian_vector(rng, 6).transpose();
        double       residue = 0.0;
        const Matrix G       = op.adjoint(op.apply(X), &residue);
        r.worst              = std::max(r.worst, residue / G.norm());
        ++r.cases;
    }
    r.passed = r.worst <= 1e-10;
    r.detail = "max relative imaginary residue " + format_double(r.worst);
    return r;
}

inline PropertyResult verify_tangent_projector(const VerifyOptions& opt)
{
    PropertyResult r{"tangent projection is an orthogonal projector"};
    Rng            rng(derive_seed(opt.seed, {19}));
    const int      count = std::max(1, opt.instances / 10);
    for (int t = 0; t < count; ++t) {
        const FactoredMatrix X  = truncate_rank(Matrix(gaussian_matrix(rng, 9, 2) * gaussian_matrix(rng, 2, 6)), 2);
        const Matrix         Z1 = gaussian_matrix(rng, 9, 6);
        const Matrix         Z2 = gaussian_matrix(rng, 9, 6);
        const Matrix         P1 = tangent_project(X, Z1).densify();
        const Matrix         P2 = tangent_project(X, Z2).densify();
        r.worst = std::max(r.worst, (tangent_project(X, P1).densify() - P1).norm() / Z1.norm());
        r.worst = std::max(r.worst, std::abs((P1.array() * Z2.array()).sum() - (Z1.array() * P2.array()).sum()) /
                                        (Z1.norm() * Z2.norm()));
        ++r.cases;
    }
    r.passed = r.worst <= 1e-10;
    r.detail = "max defect " + format_double(r.worst);
    return r;
}

inline std::vector<PropertyResult> run_verify(const VerifyOptions& opt = {})
{
    return {verify_quasi_optimality(opt),    verify_soft_threshold(opt),   verify_fast_paths(opt),
            verify_adjoint_consistency(opt), verify_fourier_realness(opt), verify_tangent_projector(opt)};
}

} // namespace sparselow::harness
