#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace drtz {

// Array layout convention used throughout: axis 0 (rows) is the
// phase-encode direction, axis 1 (columns) is the readout direction.
// Grid centre is the pixel at (rows / 2, cols / 2).

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = MatrixX<double>;
using MatrixXcd = MatrixX<std::complex<double>>;
using VectorXd = VectorX<double>;
using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Precondition or shape violation.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// A numerical procedure could not produce a valid result
/// (unreachable calibration target, singular design, zero denominator).
class NumericalError : public Error {
  public:
    using Error::Error;
};

class CalibrationError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class DegenerateDesign : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// Requested time lies outside a sampled trace.
class OutOfSpan : public Error {
  public:
    using Error::Error;
};

/// Pixel size in millimetres, per array axis.
struct Spacing {
    double rows_mm = 1.0;
    double cols_mm = 1.0;

    static Spacing isotropic(double mm) { return {mm, mm}; }
    friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Real-valued map on a regular 2D grid. Units are carried by context
/// (Hz, Hz/mm, or dimensionless density).
template <typename Scalar>
struct Field2D {
    MatrixX<Scalar> values;
    Spacing spacing;

    Field2D() = default;
    Field2D(MatrixX<Scalar> v, Spacing s) : values(std::move(v)), spacing(s) {}
    Field2D(Eigen::Index rows, Eigen::Index cols, Spacing s, Scalar fill = Scalar(0))
        : values(MatrixX<Scalar>::Constant(rows, cols, fill)), spacing(s) {}

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    Scalar& operator()(Eigen::Index r, Eigen::Index c) { return values(r, c); }
    Scalar operator()(Eigen::Index r, Eigen::Index c) const { return values(r, c); }

    bool all_finite() const { return values.allFinite(); }
};

using ScalarField2D = Field2D<double>;

struct Mask2D {
    MaskArray values;

    Mask2D() = default;
    explicit Mask2D(MaskArray v) : values(std::move(v)) {}
    Mask2D(Eigen::Index rows, Eigen::Index cols, bool fill = false)
        : values(MaskArray::Constant(rows, cols, fill)) {}

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    Eigen::Index count() const { return values.count(); }
    bool empty() const { return count() == 0; }
    bool operator()(Eigen::Index r, Eigen::Index c) const { return values(r, c); }
    bool& operator()(Eigen::Index r, Eigen::Index c) { return values(r, c); }
};

inline Mask2D operator&&(const Mask2D& a, const Mask2D& b) { return Mask2D(a.values && b.values); }
inline Mask2D operator||(const Mask2D& a, const Mask2D& b) { return Mask2D(a.values || b.values); }
inline Mask2D operator!(const Mask2D& a) { return Mask2D(!a.values); }

template <typename A, typename B>
bool same_shape(const A& a, const B& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidArgument(what);
}

/// Time-varying resonance offset model:
///   offset(r, t) = static(r) + riro_max(r) * sin(2 pi t / resp_period).
struct FieldModel {
    ScalarField2D static_hz;
    ScalarField2D riro_max_hz;
    double resp_period_s = 3.0;

    double omega() const { return kTwoPi / resp_period_s; }

    void validate() const {
        require(same_shape(static_hz, riro_max_hz), "field model: static and RIRO maps differ in shape");
        require(resp_period_s > 0.0, "field model: respiration period must be positive");
        require(static_hz.all_finite() && riro_max_hz.all_finite(), "field model: non-finite field values");
    }
};

} // namespace drtz
