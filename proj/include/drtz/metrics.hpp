#pragma once

#include "drtz/core.hpp"
#include "drtz/fields.hpp"

namespace drtz {

enum class Axis { Rows = 0, Cols = 1 };

/// Object ROI plus the two ghost ROIs flanking it along the phase-encode axis.
struct GhostMetricMasks {
    Mask2D object;
    Mask2D above;
    Mask2D below;
};

/// Rectangles spanning the object's bounding box across the readout axis,
/// starting `margin_px` beyond the object along the phase-encode axis, both
/// as thick as the smaller of the two remaining clearances.
GhostMetricMasks auto_ghost_masks(const Mask2D& object, Axis pe_axis = Axis::Rows, int margin_px = 2);

/// Percent signal ghosting: 100 |(above + below) / (2 object)| on ROI means.
template <typename Scalar>
double psg(const Field2D<Scalar>& magnitude, const GhostMetricMasks& masks) {
    require(!masks.object.empty() && !masks.above.empty() && !masks.below.empty(), "psg: masks must be non-empty");
    require(!(masks.object.values && masks.above.values).any() && !(masks.object.values && masks.below.values).any() &&
                !(masks.above.values && masks.below.values).any(),
            "psg: masks must be disjoint");
    const double object = masked_mean(magnitude, masks.object);
    if (object == 0.0) throw NumericalError("psg: zero mean signal in the object ROI");
    return 100.0 * std::abs((masked_mean(magnitude, masks.above) + masked_mean(magnitude, masks.below)) / (2.0 * object));
}

/// Background variant for anatomy: 100 |mean(background) / mean(object ROI)|.
template <typename Scalar>
double psg_background(const Field2D<Scalar>& magnitude, const Mask2D& object_roi, const Mask2D& background) {
    require(!(object_roi.values && background.values).any(), "psg_background: ROI and background overlap");
    const double object = masked_mean(magnitude, object_roi);
    if (object == 0.0) throw NumericalError("psg_background: zero mean signal in the object ROI");
    return 100.0 * std::abs(masked_mean(magnitude, background) / object);
}

/// mean(object) / std(background), population std.
template <typename Scalar>
double snr(const Field2D<Scalar>& magnitude, const Mask2D& object, const Mask2D& background) {
    const double noise = masked_std(magnitude.values, background);
    if (noise == 0.0) throw NumericalError("snr: background has zero standard deviation");
    return masked_mean(magnitude, object) / noise;
}

/// Chebyshev dilation by `radius_px` pixels.
Mask2D dilate(const Mask2D& mask, int radius_px);

/// Sum of |image|^2 over the mask.
double energy(const MatrixXcd& image, const Mask2D& mask);

/// Sum of |a - b|^2 over all pixels divided by sum of |b|^2.
double relative_residual_energy(const MatrixXcd& a, const MatrixXcd& reference);

} // namespace drtz
