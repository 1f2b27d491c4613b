#include "drtz/metrics.hpp"

#include <algorithm>

namespace drtz {

GhostMetricMasks auto_ghost_masks(const Mask2D& object, Axis pe_axis, int margin_px) {
    require(!object.empty(), "ghost masks: empty object");
    require(margin_px >= 0, "ghost masks: negative margin");

    // Work in a frame where rows are the phase-encode axis.
    const MaskArray obj = pe_axis == Axis::Rows ? object.values : MaskArray(object.values.transpose());
    const Eigen::Index rows = obj.rows(), cols = obj.cols();

    Eigen::Index top = rows, bottom = -1, left = cols, right = -1;
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            if (obj(r, c)) {
                top = std::min(top, r);
                bottom = std::max(bottom, r);
                left = std::min(left, c);
                right = std::max(right, c);
            }

    const Eigen::Index clear_above = top - margin_px;
    const Eigen::Index clear_below = rows - 1 - bottom - margin_px;
    if (clear_above < 2 || clear_below < 2)
        throw InvalidArgument("ghost masks: object too close to the image edge along the phase-encode axis");
    const Eigen::Index thickness = std::min(clear_above, clear_below);

    MaskArray above = MaskArray::Constant(rows, cols, false);
    MaskArray below = MaskArray::Constant(rows, cols, false);
    above.block(top - margin_px - thickness, left, thickness, right - left + 1).setConstant(true);
    below.block(bottom + margin_px + 1, left, thickness, right - left + 1).setConstant(true);

    if (pe_axis == Axis::Rows) return {object, Mask2D(std::move(above)), Mask2D(std::move(below))};
    return {object, Mask2D(above.transpose()), Mask2D(below.transpose())};
}

Mask2D dilate(const Mask2D& mask, int radius_px) {
    require(radius_px >= 0, "dilate: negative radius");
    Mask2D out(mask.rows(), mask.cols());
    for (Eigen::Index c = 0; c < mask.cols(); ++c)
        for (Eigen::Index r = 0; r < mask.rows(); ++r) {
            if (!mask(r, c)) continue;
            const Eigen::Index r0 = std::max<Eigen::Index>(0, r - radius_px);
            const Eigen::Index r1 = std::min<Eigen::Index>(mask.rows() - 1, r + radius_px);
            const Eigen::Index c0 = std::max<Eigen::Index>(0, c - radius_px);
            const Eigen::Index c1 = std::min<Eigen::Index>(mask.cols() - 1, c + radius_px);
            out.values.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1).setConstant(true);
        }
    return out;
}

double energy(const MatrixXcd& image, const Mask2D& mask) {
    require(same_shape(image, mask), "energy: shape mismatch");
    return mask.values.select(image.cwiseAbs2().array(), 0.0).sum();
}

double relative_residual_energy(const MatrixXcd& a, const MatrixXcd& reference) {
    require(same_shape(a, reference), "relative_residual_energy: shape mismatch");
    const double ref = reference.squaredNorm();
    if (ref == 0.0) throw NumericalError("relative_residual_energy: zero reference energy");
    return (a - reference).squaredNorm() / ref;
}

} // namespace drtz
