#pragma once
//
// Lifted blind deconvolution. For signals w = B u and z = C v of length m,
//
//   F (w * z) = sqrt(m) diag(F B u) F C v = A(u v^T),
//
// with F the unitary DFT. Row p of the lifted operator is
// sqrt(m) (FB)_{p,:}^T (FC)_{p,:}, i.e. the row-wise Khatri-Rao product of
// FB and FC. Measurements are complex and stored as [Re; Im].
//

#include <sparselow/operators/rank_one_operator.hpp>

#include <numbers>

namespace sparselow {

using Complex       = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Unitary DFT matrix F_{jk} = exp(-2 pi i j k / m) / sqrt(m) (0-based).
/// Phases are taken from an exact table indexed by (j k) mod m.
inline ComplexMatrix unitary_dft(Index m)
{
    std::vector<Complex> roots(static_cast<std::size_t>(m));
    for (Index t = 0; t < m; ++t)
        roots[static_cast<std::size_t>(t)] = std::polar(1.0, -2.0 * std::numbers::pi * double(t) / double(m));
    const double  scale = 1.0 / std::sqrt(double(m));
    ComplexMatrix F(m, m);
    for (Index j = 0; j < m; ++j)
        for (Index k = 0; k < m; ++k)
            F(j, k) = scale * roots[static_cast<std::size_t>((j * k) % m)];
    return F;
}

class FourierBlindDeconvOperator {
public:
    static constexpr double kConstructionTol = 1e-10;

    /// B is m x M, C is m x N, both real.
    FourierBlindDeconvOperator(Matrix B, Matrix C)
        : B_(std::move(B)), C_(std::move(C)), kernel_(build_kernel(B_, C_, FB_, FC_))
    {
    }

    Index rows() const { return kernel_.rows(); }
    Index cols() const { return kernel_.cols(); }
    Index measurement_count() const { return kernel_.measurement_count(); }
    Index measurement_size() const { return kernel_.measurement_size(); }

    const Matrix&        B() const { return B_; }
    const Matrix&        C() const { return C_; }
    const ComplexMatrix& FB() const { return FB_; }
    const ComplexMatrix& FC() const { return FC_; }

    const RankOneKernel<Complex>& kernel() const { return kernel_; }

    Vector apply(const Matrix& X) const { return kernel_.apply(X); }
    Vector apply(const FactoredMatrix& X) const { return kernel_.apply(X); }

    Matrix adjoint(const Vector& z, double* imag_residue = nullptr) const { return kernel_.adjoint(z, imag_residue); }

    TangentVector projected_adjoint(const FactoredMatrix& base, const Vector& z, double* imag_residue = nullptr) const
    {
        return kernel_.projected_adjoint(base, z, imag_residue);
    }

    DenseOperator to_dense() const { return kernel_.to_dense(); }

    ComplexVector unpack(const Vector& z) const { return kernel_.unpack(z); }
    Vector        pack(const ComplexVector& v) const { return kernel_.pack(v); }

private:
    static RankOneKernel<Complex> build_kernel(const Matrix& B, const Matrix& C, ComplexMatrix& FB, ComplexMatrix& FC)
    {
        const Index m = B.rows();
        if (m < 1 || C.rows() != m)
            throw ParameterError("Fourier operator: B and C must both have m >= 1 rows");
        if (!B.allFinite() || !C.allFinite())
            throw ParameterError("Fourier operator: B and C must be finite");

        const ComplexMatrix F = unitary_dft(m);
        FB                    = F * B.cast<Complex>();
        FC                    = F * C.cast<Complex>();

        // Independent spot check of FB = F B on the first column using
        // directly evaluated exponentials.
        const double scale = 1.0 / std::sqrt(double(m));
        double       err = 0.0, ref = 0.0;
        for (Index p = 0; p < m; ++p) {
            Complex acc = 0.0;
            for (Index t = 0; t < m; ++t)
                acc += std::exp(Complex(0.0, -2.0 * std::numbers::pi * double(p) * double(t) / double(m))) * B(t, 0);
            acc *= scale;
            err += std::norm(acc - FB(p, 0));
            ref += std::norm(acc);
        }
        if (std::sqrt(err) > kConstructionTol * std::max(1.0, std::sqrt(ref)))
            throw NumericalError("Fourier operator: DFT products failed the construction check");

        return RankOneKernel<Complex>(std::sqrt(double(m)) * FB, FC);
    }

    Matrix                 B_;
    Matrix                 C_;
    ComplexMatrix          FB_;
    ComplexMatrix          FC_;
    RankOneKernel<Complex> kernel_;
};

/// B and C with i.i.d. N(0, 1/m) entries.
inline FourierBlindDeconvOperator make_fourier_blind_deconv(Index rows, Index cols, Index m, std::uint64_t seed)
{
    if (rows < 1 || cols < 1 || m < 1)
        throw ParameterError("make_fourier_blind_deconv: dimensions must be positive");
    Rng          rng(seed);
    const double sd = 1.0 / std::sqrt(double(m));
    Matrix       B  = gaussian_matrix(rng, m, rows, sd);
    Matrix       C  = gaussian_matrix(rng, m, cols, sd);
    return FourierBlindDeconvOperator(std::move(B), std::move(C));
}

} // namespace sparselow
