#pragma once

#include "drtz/core.hpp"

#include <cmath>

namespace drtz {

/// Mean of `values` over the true pixels of `mask`.
template <typename Derived>
double masked_mean(const Eigen::DenseBase<Derived>& values, const Mask2D& mask) {
    require(same_shape(values, mask), "masked_mean: shape mismatch");
    require(!mask.empty(), "masked_mean: empty mask");
    double sum = 0.0;
    for (Eigen::Index c = 0; c < values.cols(); ++c)
        for (Eigen::Index r = 0; r < values.rows(); ++r)
            if (mask(r, c)) sum += static_cast<double>(values(r, c));
    return sum / static_cast<double>(mask.count());
}

/// Population standard deviation (divide by N) over the mask, two-pass.
template <typename Derived>
double masked_std(const Eigen::DenseBase<Derived>& values, const Mask2D& mask) {
    const double mean = masked_mean(values, mask);
    double ss = 0.0;
    for (Eigen::Index c = 0; c < values.cols(); ++c)
        for (Eigen::Index r = 0; r < values.rows(); ++r)
            if (mask(r, c)) {
                const double d = static_cast<double>(values(r, c)) - mean;
                ss += d * d;
            }
    return std::sqrt(ss / static_cast<double>(mask.count()));
}

template <typename Scalar>
double masked_mean(const Field2D<Scalar>& field, const Mask2D& mask) {
    return masked_mean(field.values, mask);
}

/// In-plane standard deviation of a field over an ROI (population convention).
template <typename Scalar>
double inplane_std(const Field2D<Scalar>& field, const Mask2D& mask) {
    return masked_std(field.values, mask);
}

struct Phantom {
    ScalarField2D density;
    Mask2D object;
};

struct BodyPhantom {
    ScalarField2D density;
    Mask2D object;
    Mask2D cord;
};

/// Uniform disk of `density` centred on the grid; `nx` readout columns by
/// `ny` phase-encode rows.
Phantom make_cylinder_phantom(int nx, int ny, double spacing_mm, double radius_mm, double density);

/// Synthetic neck cross-section: ellipse with full axes 0.7 FOV (readout)
/// and 0.5 FOV (phase-encode), density 1, plus a 10 mm diameter cord ROI
/// at the centre.
BodyPhantom make_body_cord_phantom(int nx, int ny, double spacing_mm);

/// Disk ROI test with pixel centres, used by the phantoms.
Mask2D disk_mask(int nx, int ny, Spacing spacing, double centre_row, double centre_col, double radius_mm);

/// Ellipse test with pixel centres; semi-axes in millimetres.
Mask2D ellipse_mask(int nx, int ny, Spacing spacing, double centre_row, double centre_col,
                    double semi_rows_mm, double semi_cols_mm);

/// Centroid of the mask in (row, col) pixel coordinates.
Eigen::Vector2d mask_centroid(const Mask2D& mask);

struct RiroCalibration {
    ScalarField2D riro_max_hz;
    double sigma_mm = 0.0;          // +inf for the uniform (zero-std) limit
    double achieved_std_hz = 0.0;
};

inline constexpr double kRiroStdTolerance = 0.01;

/// Gaussian radial RIRO map peak * exp(-(d / sigma)^2) around the object
/// centroid, with sigma found by bisection in [0.1, 100] x min FOV so the
/// in-plane std over the object hits `target_std_hz` within 0.01 Hz.
/// Throws CalibrationError when the target lies outside the reachable range.
RiroCalibration calibrate_radial_riro(const Mask2D& object_mask, Spacing spacing, double peak_hz,
                                      double target_std_hz);

inline ScalarField2D make_radial_riro(const Mask2D& object_mask, Spacing spacing, double peak_hz,
                                      double target_std_hz) {
    return calibrate_radial_riro(object_mask, spacing, peak_hz, target_std_hz).riro_max_hz;
}

} // namespace drtz
