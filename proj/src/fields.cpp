#include "drtz/fields.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace drtz {

Mask2D disk_mask(int nx, int ny, Spacing spacing, double centre_row, double centre_col, double radius_mm) {
    Mask2D mask(ny, nx);
    const double r2 = radius_mm * radius_mm;
    for (int c = 0; c < nx; ++c)
        for (int r = 0; r < ny; ++r) {
            const double dy = (r - centre_row) * spacing.rows_mm;
            const double dx = (c - centre_col) * spacing.cols_mm;
            mask(r, c) = dx * dx + dy * dy <= r2;
        }
    return mask;
}

Mask2D ellipse_mask(int nx, int ny, Spacing spacing, double centre_row, double centre_col,
                    double semi_rows_mm, double semi_cols_mm) {
    Mask2D mask(ny, nx);
    for (int c = 0; c < nx; ++c)
        for (int r = 0; r < ny; ++r) {
            const double u = (r - centre_row) * spacing.rows_mm / semi_rows_mm;
            const double v = (c - centre_col) * spacing.cols_mm / semi_cols_mm;
            mask(r, c) = u * u + v * v <= 1.0;
        }
    return mask;
}

Eigen::Vector2d mask_centroid(const Mask2D& mask) {
    require(!mask.empty(), "mask_centroid: empty mask");
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (Eigen::Index c = 0; c < mask.cols(); ++c)
        for (Eigen::Index r = 0; r < mask.rows(); ++r)
            if (mask(r, c)) sum += Eigen::Vector2d(double(r), double(c));
    return sum / double(mask.count());
}

Phantom make_cylinder_phantom(int nx, int ny, double spacing_mm, double radius_mm, double density) {
    require(nx > 0 && ny > 0, "cylinder phantom: grid must be non-empty");
    require(spacing_mm > 0.0, "cylinder phantom: spacing must be positive");
    require(std::isfinite(density), "cylinder phantom: density must be finite");
    require(radius_mm / spacing_mm >= 2.0, "cylinder phantom: radius must span at least 2 pixels");
    const double half_fov = 0.5 * std::min(nx, ny) * spacing_mm;
    require(radius_mm <= half_fov, "cylinder phantom: radius exceeds half the field of view");

    const auto spacing = Spacing::isotropic(spacing_mm);
    Mask2D disk = disk_mask(nx, ny, spacing, ny / 2, nx / 2, radius_mm);
    ScalarField2D rho(disk.values.cast<double>().matrix() * density, spacing);
    return {std::move(rho), std::move(disk)};
}

BodyPhantom make_body_cord_phantom(int nx, int ny, double spacing_mm) {
    require(nx >= 64 && ny >= 64, "body phantom: grid must be at least 64 pixels per axis");
    require(spacing_mm > 0.0, "body phantom: spacing must be positive");

    const auto spacing = Spacing::isotropic(spacing_mm);
    const double fov_cols = nx * spacing_mm;
    const double fov_rows = ny * spacing_mm;
    Mask2D object = ellipse_mask(nx, ny, spacing, ny / 2, nx / 2, 0.25 * fov_rows, 0.35 * fov_cols);
    Mask2D cord = disk_mask(nx, ny, spacing, ny / 2, nx / 2, 5.0);

    if (cord.empty() || (cord && !object).count() != 0)
        throw InvalidArgument("body phantom: cord ROI is not contained in the object");

    ScalarField2D rho(object.values.cast<double>().matrix(), spacing);
    return {std::move(rho), std::move(object), std::move(cord)};
}

namespace {

struct RadialProfile {
    MatrixXd dist2;  // squared distance to centroid, mm^2
    const Mask2D& mask;
    double peak;

    double std_at(double sigma) const {
        const double inv = 1.0 / (sigma * sigma);
        return masked_std((peak * (-dist2.array() * inv).exp()).matrix(), mask);
    }
    ScalarField2D field_at(double sigma, Spacing spacing) const {
        const double inv = 1.0 / (sigma * sigma);
        return ScalarField2D((peak * (-dist2.array() * inv).exp()).matrix(), spacing);
    }
};

} // namespace

RiroCalibration calibrate_radial_riro(const Mask2D& object_mask, Spacing spacing, double peak_hz,
                                      double target_std_hz) {
    require(!object_mask.empty(), "radial RIRO: empty object mask");
    require(peak_hz >= 0.0 && std::isfinite(peak_hz), "radial RIRO: peak must be finite and non-negative");
    require(target_std_hz >= 0.0 && std::isfinite(target_std_hz), "radial RIRO: target std must be non-negative");
    require(spacing.rows_mm > 0.0 && spacing.cols_mm > 0.0, "radial RIRO: spacing must be positive");

    const Eigen::Index rows = object_mask.rows();
    const Eigen::Index cols = object_mask.cols();

    if (target_std_hz == 0.0) {
        return {ScalarField2D(rows, cols, spacing, peak_hz), std::numeric_limits<double>::infinity(), 0.0};
    }

    const Eigen::Vector2d centroid = mask_centroid(object_mask);
    MatrixXd dist2(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double dy = (r - centroid.x()) * spacing.rows_mm;
            const double dx = (c - centroid.y()) * spacing.cols_mm;
            dist2(r, c) = dx * dx + dy * dy;
        }
    const RadialProfile profile{std::move(dist2), object_mask, peak_hz};

    const double fov_min = std::min(rows * spacing.rows_mm, cols * spacing.cols_mm);
    double lo = 0.1 * fov_min;   // narrow profile: largest std
    double hi = 100.0 * fov_min; // wide profile: std -> 0
    const double std_lo = profile.std_at(lo);
    const double std_hi = profile.std_at(hi);

    if (target_std_hz > std_lo + kRiroStdTolerance) {
        std::ostringstream os;
        os << "radial RIRO: target std " << target_std_hz << " Hz unreachable (max " << std_lo
           << " Hz for peak " << peak_hz << " Hz on this geometry)";
        throw CalibrationError(os.str());
    }
    if (target_std_hz >= std_lo) return {profile.field_at(lo, spacing), lo, std_lo};
    if (target_std_hz <= std_hi) {
        if (std_hi - target_std_hz > kRiroStdTolerance)
            throw CalibrationError("radial RIRO: target std below the widest profile's std");
        return {profile.field_at(hi, spacing), hi, std_hi};
    }

    // std_at(lo) > target > std_at(hi); keep that bracket.
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (profile.std_at(mid) > target_std_hz)
            lo = mid;
        else
            hi = mid;
    }
    const double sigma = 0.5 * (lo + hi);
    const double achieved = profile.std_at(sigma);
    if (std::abs(achieved - target_std_hz) > kRiroStdTolerance)
        throw CalibrationError("radial RIRO: bisection did not reach the target std");
    return {profile.field_at(sigma, spacing), sigma, achieved};
}

} // namespace drtz
