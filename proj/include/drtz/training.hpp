#pragma once

#include "drtz/core.hpp"
#include "drtz/mgre.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace drtz {

inline constexpr double kPmuRateHz = 50.0;

/// Bellows pressure sampled on a fixed 50 Hz grid, normalised to [0, 1].
struct PressureTrace {
    double sample_rate_hz = kPmuRateHz;
    VectorXd samples;
    double start_time_s = 0.0;

    double sample_time(Eigen::Index k) const { return start_time_s + double(k) / sample_rate_hz; }
    double end_time_s() const { return sample_time(samples.size() - 1); }
    void validate() const;
};

/// P(t) = 0.5 + 0.5 sin(2 pi t / period) + N(0, noise_std), clamped to [0, 1],
/// sampled at t = start_time_s + k / 50 over `duration_s`.
PressureTrace synth_pressure_trace(double resp_period_s, double duration_s, double noise_std, std::uint64_t seed,
                                   double start_time_s = 0.0);

/// Nearest 50 Hz sample index for time `t_s`; exact half-way ties go to the
/// earlier sample. Throws OutOfSpan outside [start, end].
Eigen::Index nearest_sample_index(const PressureTrace& trace, double t_s);

std::vector<double> associate_timestamps(const PressureTrace& trace, const std::vector<double>& times_s);

inline constexpr int kFieldMapSlices = 3;

/// Sagittal field-map volume: three slices, rows along z.
using SagittalVolume = std::array<ScalarField2D, kFieldMapSlices>;

struct FieldMapFrame {
    double timestamp_s = 0.0;
    SagittalVolume slices;
};

/// frame_i = static + riro * P(t_i) + noise, t_i = i * frame_interval_s.
std::vector<FieldMapFrame> synth_fieldmap_series(const SagittalVolume& truth_static, const SagittalVolume& truth_riro,
                                                 const PressureTrace& trace, int n_frames, double frame_interval_s,
                                                 double noise_std_hz, std::uint64_t seed);

struct DualEchoFieldMap {
    ScalarField2D offset_hz;
    Mask2D invalid; // zero-magnitude voxels, reported as 0 Hz
};

/// offset = -arg(echo2 conj(echo1)) / (2 pi dTE); signals carry exp(-i 2 pi f TE).
/// Wraps outside +-1/(2 dTE).
DualEchoFieldMap dual_echo_fieldmap(const ComplexImage2D& echo1, const ComplexImage2D& echo2, double delta_te_ms);

/// dB/dz along rows: central differences inside, one-sided at the ends.
ScalarField2D zgradient(const ScalarField2D& field, double dz_mm);
SagittalVolume zgradient(const FieldMapFrame& frame, double dz_mm);

struct RegressionMaps {
    ScalarField2D gz_static;    // intercept, Hz/mm
    ScalarField2D rigo_max;     // slope, Hz/mm per unit pressure
    ScalarField2D residual_rms; // Hz/mm
};

/// Per-voxel ordinary least squares G_z = a + b P.
RegressionMaps regress_gz_vs_pressure(const std::vector<ScalarField2D>& gz_frames, const std::vector<double>& pressures);

struct ShimPlanEntry {
    int slice_index = 0;
    double gz_static_mean = 0.0; // Hz/mm
    double rigo_max_mean = 0.0;  // Hz/mm per unit pressure

    friend bool operator==(const ShimPlanEntry&, const ShimPlanEntry&) = default;
};

struct ShimPlan {
    std::vector<ShimPlanEntry> entries;

    void validate() const;
    const ShimPlanEntry& at(int slice) const;
    friend bool operator==(const ShimPlan&, const ShimPlan&) = default;
};

/// ROI means of the regression maps, one entry per target slice.
ShimPlan build_shim_plan(const std::vector<RegressionMaps>& maps, const std::vector<Mask2D>& roi_per_slice);

/// Whitespace-separated `slice gz_static rigo_max` lines, 17 significant digits.
void write_shim_plan(std::ostream& os, const ShimPlan& plan);
ShimPlan read_shim_plan(std::istream& is);

/// CSV with header `time_s,pressure`.
void write_pressure_csv(std::ostream& os, const PressureTrace& trace);
PressureTrace read_pressure_csv(std::istream& is);

} // namespace drtz
