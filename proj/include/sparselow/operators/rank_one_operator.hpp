#pragma once
//
// Rank-one measurements <a_p b_p^T, X> = a_p^T X b_p with real or complex
// vectors a_p, b_p. Factored inputs are measured through the contractions
// a_p^T U and V^T b_p, and the tangent-projected adjoint is assembled from
// the three sums
//
//   sum_p z_p U^T a_p b_p^T,   sum_p z_p a_p b_p^T V,   sum_p z_p U^T a_p b_p^T V
//
// without ever forming an M x N matrix.
//

#include <sparselow/core/random.hpp>
#include <sparselow/operators/dense_operator.hpp>

#include <complex>
#include <type_traits>

namespace sparselow {

namespace detail {

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

} // namespace detail

template <class Scalar>
class RankOneKernel {
public:
    using ScalarMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using ScalarVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    static constexpr bool is_complex = detail::is_complex<Scalar>::value;

    /// Row p of `a` is a_p^T (m x M); row p of `b` is b_p^T (m x N).
    RankOneKernel(ScalarMatrix a, ScalarMatrix b) : a_(std::move(a)), b_(std::move(b))
    {
        if (a_.rows() != b_.rows())
            throw ParameterError("rank-one operator: a and b must hold the same number of vectors");
        if (!a_.allFinite() || !b_.allFinite())
            throw ParameterError("rank-one operator: vectors must be finite");
        if constexpr (is_complex) {
            a_re_ = a_.real();
            a_im_ = a_.imag();
            b_re_ = b_.real();
            b_im_ = b_.imag();
        }
    }

    Index rows() const { return a_.cols(); }
    Index cols() const { return b_.cols(); }
    Index measurement_count() const { return a_.rows(); }
    Index measurement_size() const { return is_complex ? 2 * a_.rows() : a_.rows(); }

    const ScalarMatrix& a() const { return a_; }
    const ScalarMatrix& b() const { return b_; }

    /// Complex measurements are stacked as [Re; Im].
    Vector pack(const ScalarVector& v) const
    {
        if constexpr (is_complex) {
            Vector out(2 * v.size());
            out.head(v.size()) = v.real();
            out.tail(v.size()) = v.imag();
            return out;
        }
        else {
            return v;
        }
    }

    ScalarVector unpack(const Vector& z) const
    {
        if constexpr (is_complex) {
            const Index m = measurement_count();
            ScalarVector out(m);
            for (Index p = 0; p < m; ++p)
                out[p] = Scalar(z[p], z[m + p]);
            return out;
        }
        else {
            return z;
        }
    }

    Vector apply(const Matrix& X) const
    {
        detail::check_input_shape(*this, X.rows(), X.cols(), "apply");
        const ScalarMatrix aX = a_times(X, nullptr);
        return pack(aX.cwiseProduct(b_).rowwise().sum());
    }

    /// O(m r (s + N)): only the support rows of U enter.
    Vector apply(const FactoredMatrix& X) const
    {
        detail::check_input_shape(*this, X.rows(), X.cols(), "apply");
        const Index m = measurement_count();
        const Index r = X.rank();
        if (r == 0)
            return pack(ScalarVector::Zero(m));

        const ScalarMatrix aU = a_times(X.U(), &X.support());
        const ScalarMatrix bV = b_times(X.V());
        const ScalarVector y  = (aU * X.sigma().asDiagonal()).cwiseProduct(bV).rowwise().sum();
        return pack(y);
    }

    //
    // Exact adjoint of the (realified) map: Re sum_p conj(z_p) a_p b_p^T.
    // The discarded imaginary part's Frobenius norm is written to
    // `imag_residue` when requested.
    //
    Matrix adjoint(const Vector& z, double* imag_residue = nullptr) const
    {
        detail::check_measurement_length(*this, z.size(), "adjoint");
        const ScalarVector w = conj_weights(z);
        if constexpr (is_complex) {
            // a^T (w .* b) split into real products.
            const ScalarMatrix wb = w.asDiagonal() * b_;
            const Matrix       re = wb.real(), im = wb.imag();
            Matrix             G  = a_re_.transpose() * re;
            G.noalias() -= a_im_.transpose() * im;
            if (imag_residue) {
                Matrix I = a_re_.transpose() * im;
                I.noalias() += a_im_.transpose() * re;
                *imag_residue = I.norm();
            }
            return G;
        }
        else {
            if (imag_residue)
                *imag_residue = 0.0;
            return a_.transpose() * w.asDiagonal() * b_;
        }
    }

    TangentVector projected_adjoint(const FactoredMatrix& base, const Vector& z,
                                    double* imag_residue = nullptr) const
    {
        detail::check_input_shape(*this, base.rows(), base.cols(), "projected_adjoint");
        detail::check_measurement_length(*this, z.size(), "projected_adjoint");
        const Index r = base.rank();
        if (r == 0) {
            if (imag_residue)
                *imag_residue = 0.0;
            return zero_tangent(base);
        }
        const ScalarVector w = conj_weights(z);
        const Index        m = measurement_count();

        // The three bracketed sums, accumulated over blocks of measurements
        // so that each block of a and b is read once while it is in cache.
        ScalarMatrix UtG  = ScalarMatrix::Zero(r, cols());
        ScalarMatrix GV   = ScalarMatrix::Zero(rows(), r);
        ScalarMatrix UtGV = ScalarMatrix::Zero(r, r);
        const Index  block = std::max<Index>(8, (Index(1) << 16) / ((rows() + cols()) * (is_complex ? 2 : 1)));
        for (Index p0 = 0; p0 < m; p0 += block) {
            const Index        n   = std::min(block, m - p0);
            const ScalarMatrix wAU = w.segment(p0, n).asDiagonal() * a_times(base.U(), &base.support(), p0, n);
            const ScalarMatrix bV  = b_times(base.V(), p0, n);
            UtG += transpose_times(b_, b_re_, b_im_, p0, n, wAU).transpose();
            GV += transpose_times(a_, a_re_, a_im_, p0, n, w.segment(p0, n).asDiagonal() * bV);
            UtGV += wAU.transpose() * bV;
        }

        double r1 = 0.0, r2 = 0.0, r3 = 0.0;
        TangentVector out = tangent_from_contractions(base, real_part(UtG, &r1), real_part(GV, &r2),
                                                      real_part(UtGV, &r3));
        if (imag_residue)
            *imag_residue = std::sqrt(r1 * r1 + r2 * r2 + r3 * r3);
        return out;
    }

    /// Equivalent explicit operator with one real M x N matrix per row of
    /// the measurement vector.
    DenseOperator to_dense() const
    {
        const Index m = measurement_count();
        Matrix      A(measurement_size(), rows() * cols());
        for (Index p = 0; p < m; ++p) {
            const ScalarMatrix Ap = a_.row(p).transpose() * b_.row(p);
            if constexpr (is_complex) {
                A.row(p)     = Ap.real().reshaped().transpose();
                A.row(m + p) = Ap.imag().reshaped().transpose();
            }
            else {
                A.row(p) = Ap.reshaped().transpose();
            }
        }
        return DenseOperator(rows(), cols(), std::move(A));
    }

private:
    /// Rows [p0, p0 + n) of a times an M x r matrix R, reading only the
    /// columns in `rows` (all when null; n < 0 means all measurements).
    /// Complex vectors are handled as two real products.
    ScalarMatrix a_times(const Matrix& R, const SupportSet* rows, Index p0 = 0, Index n = -1) const
    {
        if (n < 0)
            n = measurement_count() - p0;
        if (rows && rows->size() < R.rows()) {
            const Matrix Rs = R(rows->indices, Eigen::all);
            if constexpr (is_complex)
                return combine(Matrix(a_re_.middleRows(p0, n)(Eigen::all, rows->indices)) * Rs,
                               Matrix(a_im_.middleRows(p0, n)(Eigen::all, rows->indices)) * Rs);
            else
                return Matrix(a_.middleRows(p0, n)(Eigen::all, rows->indices)) * Rs;
        }
        if constexpr (is_complex)
            return combine(a_re_.middleRows(p0, n) * R, a_im_.middleRows(p0, n) * R);
        else
            return a_.middleRows(p0, n) * R;
    }

    ScalarMatrix b_times(const Matrix& R, Index p0 = 0, Index n = -1) const
    {
        if (n < 0)
            n = measurement_count() - p0;
        if constexpr (is_complex)
            return combine(b_re_.middleRows(p0, n) * R, b_im_.middleRows(p0, n) * R);
        else
            return b_.middleRows(p0, n) * R;
    }

    /// P^T W for the rows [p0, p0 + n) of P = full (re + i im).
    static ScalarMatrix transpose_times(const ScalarMatrix& full, const Matrix& re, const Matrix& im, Index p0,
                                        Index n, const ScalarMatrix& W)
    {
        if constexpr (is_complex) {
            const Matrix wr = W.real(), wi = W.imag();
            Matrix       gr = re.middleRows(p0, n).transpose() * wr;
            gr.noalias() -= im.middleRows(p0, n).transpose() * wi;
            Matrix gi = re.middleRows(p0, n).transpose() * wi;
            gi.noalias() += im.middleRows(p0, n).transpose() * wr;
            return combine(gr, gi);
        }
        else {
            return full.middleRows(p0, n).transpose() * W;
        }
    }

    static ScalarMatrix combine(const Matrix& re, const Matrix& im)
    {
        ScalarMatrix out(re.rows(), re.cols());
        out.real() = re;
        out.imag() = im;
        return out;
    }

    ScalarVector conj_weights(const Vector& z) const
    {
        if constexpr (is_complex)
            return unpack(z).conjugate();
        else
            return z;
    }

    static Matrix real_part(const ScalarMatrix& G, double* imag_residue)
    {
        if constexpr (is_complex) {
            if (imag_residue)
                *imag_residue = G.imag().norm();
            return G.real();
        }
        else {
            if (imag_residue)
                *imag_residue = 0.0;
            return G;
        }
    }

    ScalarMatrix a_;
    ScalarMatrix b_;
    // Real and imaginary parts, complex case only.
    Matrix a_re_, a_im_, b_re_, b_im_;
};

using RankOneOperator = RankOneKernel<double>;

/// Random rank-one operator: a_p ~ N(0, I), b_p ~ N(0, I/m).
inline RankOneOperator make_rank_one(Index rows, Index cols, Index m, std::uint64_t seed)
{
    if (rows < 1 || cols < 1 || m < 1)
        throw ParameterError("make_rank_one: dimensions must be positive");
    Rng    rng(seed);
    Matrix a = gaussian_matrix(rng, m, rows, 1.0);
    Matrix b = gaussian_matrix(rng, m, cols, 1.0 / std::sqrt(double(m)));
    return RankOneOperator(std::move(a), std::move(b));
}

} // namespace sparselow
