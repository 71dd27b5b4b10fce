#pragma once
//
// Iteration drivers for IHT, Riemannian IHT and the Riemannian proximal
// gradient method.
//

#include <sparselow/solvers/steps.hpp>

#include <chrono>

namespace sparselow {

/// ||A - B||_F for factored A, B without forming either matrix. The
/// difference is L R^T with L = [U_A S_A, -U_B S_B] and R = [V_A, V_B];
/// orthonormalizing R leaves ||L R_R^T||_F, which avoids the cancellation
/// of a Gram-matrix expansion.
inline double frobenius_distance(const FactoredMatrix& A, const FactoredMatrix& B)
{
    const Index ra = A.rank(), rb = B.rank();
    if (ra + rb == 0)
        return 0.0;
    Matrix L(A.rows(), ra + rb);
    L << A.scaled_left(), -B.scaled_left();
    Matrix R(A.cols(), ra + rb);
    R << A.V(), B.V();
    const ThinQr qr = thin_qr(R);
    return (L * qr.R.transpose()).norm();
}

inline double relative_error(const FactoredMatrix& X, const FactoredMatrix& truth)
{
    const double scale = truth.frobenius_norm();
    const double d     = frobenius_distance(X, truth);
    return scale > 0.0 ? d / scale : d;
}

/// Default initial sparsity of rpg: the largest row sparsity the degrees
/// of freedom of m measurements can resolve, min(M, (m + k(k - N)) / k).
inline Index default_rpg_initial_sparsity(const ProblemDims& dims)
{
    const Index raw = (dims.m + dims.k * (dims.k - dims.N)) / dims.k;
    return std::clamp<Index>(std::min(dims.M, raw), dims.k, dims.M);
}

namespace detail {

class RunBuilder {
public:
    RunBuilder(const SolverConfig& cfg, const Vector& y)
        : cfg_(cfg), y_norm_(y.norm()), start_(std::chrono::steady_clock::now())
    {
        record_.algorithm = cfg.algorithm;
    }

    void push(int iteration, const TrialPoint& point, const StepOutcome* step)
    {
        IterationRecord e;
        e.iteration = iteration;
        e.objective = point.objective;
        e.residual  = point.residual.norm();
        if (step) {
            e.step              = step->alpha;
            e.fallback          = step->fallback;
            e.backtracks        = step->backtracks;
            e.direction_norm_sq = step->direction_norm_sq;
            e.trial_objective   = step->trial_objective;
            e.mu                = step->mu;
            e.mu_reference      = step->mu_reference;
        }
        else {
            e.trial_objective = point.objective;
        }
        e.support        = point.X.support();
        e.rank           = point.X.rank();
        e.rank_deficient = point.X.rank() < cfg_.dims.k;
        if (cfg_.truth)
            e.rel_error = relative_error(point.X, *cfg_.truth);
        e.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();

        if (!record_.trace.empty() && record_.trace.back().support == e.support)
            ++stable_;
        else
            stable_ = 0;
        record_.trace.push_back(std::move(e));
        record_.final_iterate = point.X;
    }

    bool converged(bool require_stable_support) const
    {
        const IterationRecord& e = record_.trace.back();
        if (!std::isfinite(e.objective))
            return false;
        if (e.residual == 0.0)
            return true;
        const bool small = e.residual <= cfg_.residual_tol * y_norm_ ||
                           (cfg_.error_tol && e.rel_error <= *cfg_.error_tol);
        if (!small)
            return false;
        return !require_stable_support || stable_ + 1 >= cfg_.support_stable_iters;
    }

    RunRecord finish(Termination t, std::string message = {})
    {
        record_.termination = t;
        record_.message     = std::move(message);
        return std::move(record_);
    }

private:
    const SolverConfig&                                 cfg_;
    double                                              y_norm_;
    std::chrono::steady_clock::time_point               start_;
    RunRecord                                           record_;
    int                                                 stable_ = 0;
};

template <MeasurementOperator Op>
RunRecord run(const Op& op, const Vector& y, const SolverConfig& cfg)
{
    cfg.validate();
    if (op.rows() != cfg.dims.M || op.cols() != cfg.dims.N)
        throw ParameterError("solver dimensions disagree with the operator");
    detail::check_measurement_length(op, y.size(), "solver");
    if (!y.allFinite())
        throw ParameterError("measurements must be finite");

    const Index k         = cfg.dims.k;
    const Index s         = cfg.dims.s;
    const bool  is_rpg    = cfg.algorithm == Algorithm::rpg;
    const Index s_initial = is_rpg ? cfg.rpg_initial_sparsity.value_or(default_rpg_initial_sparsity(cfg.dims)) : s;

    RunBuilder builder(cfg, y);
    TrialPoint current;
    int        iteration = 0;

    try {
        if (cfg.initial) {
            current = measure(op, y, *cfg.initial);
            builder.push(0, current, nullptr);
            if (builder.converged(false))
                return builder.finish(Termination::converged);
        }
        else {
            current = measure(op, y, FactoredMatrix::zero(op.rows(), op.cols()));
            builder.push(0, current, nullptr);
            // IHT starts at X0 = 0; the Riemannian methods start at X1.
            if (cfg.algorithm == Algorithm::iht && builder.converged(false))
                return builder.finish(Termination::converged);
            if (cfg.algorithm != Algorithm::iht && cfg.max_iter > 0) {
                StepOutcome step = initial_step(op, y, k, s_initial, cfg.step);
                current          = std::move(step.next);
                builder.push(++iteration, current, &step);
                if (builder.converged(false))
                    return builder.finish(Termination::converged);
            }
        }

        while (iteration < cfg.max_iter) {
            StepOutcome step;
            switch (cfg.algorithm) {
                case Algorithm::iht:
                    step = iteration == 0 && !cfg.initial ? initial_step(op, y, k, s, cfg.step)
                                                          : iht_step(op, y, current, k, s, cfg.step);
                    break;
                case Algorithm::riht:
                    step = riht_step(op, y, current, k, s, cfg.step);
                    break;
                case Algorithm::rpg:
                    step = rpg_step(op, y, current, k, iteration, cfg.tau, cfg.step);
                    break;
            }
            current = std::move(step.next);
            builder.push(++iteration, current, &step);
            if (!std::isfinite(current.objective))
                return builder.finish(Termination::numerical_error, "objective became non-finite");
            if (builder.converged(is_rpg))
                return builder.finish(Termination::converged);
        }
    }
    catch (const NumericalError& e) {
        return builder.finish(Termination::numerical_error, e.what());
    }
    return builder.finish(Termination::max_iter);
}

} // namespace detail

/// Algorithm 1: IHT with the quasi-optimal projection T_k o H_s, X0 = 0.
template <MeasurementOperator Op>
RunRecord iht_run(const Op& op, const Vector& y, SolverConfig cfg)
{
    cfg.algorithm = Algorithm::iht;
    return detail::run(op, y, cfg);
}

/// Riemannian IHT: tangent-projected gradient, X1 = (T_k o H_s)(alpha0 A^* y).
template <MeasurementOperator Op>
RunRecord riht_run(const Op& op, const Vector& y, SolverConfig cfg)
{
    cfg.algorithm = Algorithm::riht;
    return detail::run(op, y, cfg);
}

/// Riemannian proximal gradient with row soft thresholding; s is unused.
template <MeasurementOperator Op>
RunRecord rpg_run(const Op& op, const Vector& y, SolverConfig cfg)
{
    cfg.algorithm = Algorithm::rpg;
    return detail::run(op, y, cfg);
}

template <MeasurementOperator Op>
RunRecord run_solver(const Op& op, const Vector& y, const SolverConfig& cfg)
{
    return detail::run(op, y, cfg);
}

} // namespace sparselow
