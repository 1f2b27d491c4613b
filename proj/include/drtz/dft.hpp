#pragma once

#include "drtz/core.hpp"

#include <unsupported/Eigen/FFT>

namespace drtz {

// 2D discrete Fourier transform pair on dense matrices.
// Forward is the plain unnormalised sum, inverse divides by rows * cols.

template <typename Derived>
auto fft2(const Eigen::MatrixBase<Derived>& x) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    using Complex = std::complex<Real>;
    const Eigen::Index rows = x.rows(), cols = x.cols();

    MatrixX<Complex> out = x.template cast<Complex>();
    Eigen::FFT<Real> fft;
    VectorX<Complex> in_buf, out_buf;
    for (Eigen::Index c = 0; c < cols; ++c) {
        in_buf = out.col(c);
        fft.fwd(out_buf, in_buf);
        out.col(c) = out_buf;
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
        in_buf = out.row(r).transpose();
        fft.fwd(out_buf, in_buf);
        out.row(r) = out_buf.transpose();
    }
    return out;
}

template <typename Derived>
auto ifft2(const Eigen::MatrixBase<Derived>& k) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    using Complex = std::complex<Real>;
    const Eigen::Index rows = k.rows(), cols = k.cols();

    MatrixX<Complex> out = k.template cast<Complex>();
    Eigen::FFT<Real> fft; // inv() applies 1/n per axis
    VectorX<Complex> in_buf, out_buf;
    for (Eigen::Index c = 0; c < cols; ++c) {
        in_buf = out.col(c);
        fft.inv(out_buf, in_buf);
        out.col(c) = out_buf;
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
        in_buf = out.row(r).transpose();
        fft.inv(out_buf, in_buf);
        out.row(r) = out_buf.transpose();
    }
    return out;
}

/// Row `line` of fft2(x), computed without forming the full transform:
/// a single-frequency sum down the columns followed by a 1D FFT along the row.
/// `roots` holds exp(-2 pi i m / rows) for m = 0..rows-1.
template <typename Derived, typename RootsDerived>
auto fft2_row(const Eigen::MatrixBase<Derived>& x, Eigen::Index line, const Eigen::MatrixBase<RootsDerived>& roots) {
    using Complex = typename Derived::Scalar;
    using Real = typename Complex::value_type;
    const Eigen::Index rows = x.rows();

    VectorX<Complex> weights(rows);
    for (Eigen::Index r = 0; r < rows; ++r) weights(r) = roots((line * r) % rows);

    VectorX<Complex> column_sum = (weights.transpose() * x).transpose();
    VectorX<Complex> out;
    Eigen::FFT<Real> fft;
    fft.fwd(out, column_sum);
    return out;
}

template <typename Real>
VectorX<std::complex<Real>> unit_roots(Eigen::Index n) {
    VectorX<std::complex<Real>> roots(n);
    for (Eigen::Index m = 0; m < n; ++m)
        roots(m) = std::polar(Real(1), -Real(kTwoPi) * Real(m) / Real(n));
    return roots;
}

} // namespace drtz
