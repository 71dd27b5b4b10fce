#pragma once
//
// Contract shared by every measurement backend, plus the few generic
// helpers built on top of it (objective, residual, checked adjoints).
//

#include <sparselow/core/projections.hpp>

#include <concepts>

namespace sparselow {

//
// A linear map A : R^{M x N} -> R^{measurement_size()}.
//
// measurement_count() is the number m of (possibly complex) measurements;
// complex backends store each as a (real, imaginary) pair, so their
// measurement vectors have length 2m.
//
template <class Op>
concept MeasurementOperator = requires(const Op& op, const Matrix& X, const FactoredMatrix& F, const Vector& z) {
    { op.rows() } -> std::convertible_to<Index>;
    { op.cols() } -> std::convertible_to<Index>;
    { op.measurement_count() } -> std::convertible_to<Index>;
    { op.measurement_size() } -> std::convertible_to<Index>;
    { op.apply(X) } -> std::convertible_to<Vector>;
    { op.apply(F) } -> std::convertible_to<Vector>;
    { op.adjoint(z) } -> std::convertible_to<Matrix>;
    { op.projected_adjoint(F, z) } -> std::convertible_to<TangentVector>;
};

/// Backends that compute the adjoint in complex arithmetic and can report
/// the imaginary part they discard.
template <class Op>
concept ComplexMeasurementOperator =
    MeasurementOperator<Op> && requires(const Op& op, const FactoredMatrix& F, const Vector& z, double* res) {
        { op.adjoint(z, res) } -> std::convertible_to<Matrix>;
        { op.projected_adjoint(F, z, res) } -> std::convertible_to<TangentVector>;
    };

/// Largest tolerated imaginary residue of an adjoint output, relative to
/// the norm of its real part.
inline constexpr double kRealnessTol = 1e-8;

namespace detail {

template <class Op>
void check_input_shape(const Op& op, Index rows, Index cols, const char* what)
{
    if (rows != op.rows() || cols != op.cols())
        throw ParameterError(std::string(what) + ": input is " + std::to_string(rows) + "x" + std::to_string(cols) +
                             ", operator expects " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()));
}

template <class Op>
void check_measurement_length(const Op& op, Index length, const char* what)
{
    if (length != op.measurement_size())
        throw ParameterError(std::string(what) + ": measurement vector has length " + std::to_string(length) +
                             ", operator expects " + std::to_string(op.measurement_size()));
}

inline void check_realness(double residue, double scale, const char* what)
{
    if (!(residue <= kRealnessTol * scale))
        throw NumericalError(std::string(what) + ": imaginary residue " + std::to_string(residue) +
                             " exceeds tolerance relative to output norm " + std::to_string(scale));
}

} // namespace detail

/// A*(z), verifying on complex backends that the discarded imaginary part
/// is floating-point noise. Used on gradients, where realness holds exactly.
template <MeasurementOperator Op>
Matrix gradient_adjoint(const Op& op, const Vector& z)
{
    if constexpr (ComplexMeasurementOperator<Op>) {
        double residue = 0.0;
        Matrix out     = op.adjoint(z, &residue);
        detail::check_realness(residue, out.norm(), "adjoint");
        return out;
    }
    else {
        return op.adjoint(z);
    }
}

/// P_T A*(z) with the same realness check as gradient_adjoint.
template <MeasurementOperator Op>
TangentVector gradient_projected_adjoint(const Op& op, const FactoredMatrix& base, const Vector& z)
{
    if constexpr (ComplexMeasurementOperator<Op>) {
        double        residue = 0.0;
        TangentVector out     = op.projected_adjoint(base, z, &residue);
        detail::check_realness(residue, std::sqrt(out.squared_norm()), "projected adjoint");
        return out;
    }
    else {
        return op.projected_adjoint(base, z);
    }
}

/// f(X) = 1/2 ||A(X) - y||^2.
template <MeasurementOperator Op, class X>
double objective(const Op& op, const X& x, const Vector& y)
{
    return 0.5 * (op.apply(x) - y).squaredNorm();
}

} // namespace sparselow
