#pragma once

#include "drtz/controller.hpp"
#include "drtz/fields.hpp"
#include "drtz/metrics.hpp"
#include "drtz/mgre.hpp"
#include "drtz/training.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace drtz {

inline constexpr const char* kToolVersion = "drtz 0.1.0";

/// Invalid or unparseable configuration. `line` is 0 when the problem is not
/// tied to a specific line.
class ConfigError : public Error {
  public:
    ConfigError(const std::string& source, int line, const std::string& what);
    int line() const { return line_; }

  private:
    int line_ = 0;
};

enum class PhantomKind { Cylinder, BodyCord };

struct ScenarioConfig {
    PhantomKind phantom = PhantomKind::Cylinder;
    int nx = 128;
    int ny = 56;
    double spacing_mm = 2.2;
    double tr_ms = 1000.0;
    std::vector<double> te_ms{15.0};
    double resp_period_s = 3.0;
    double riro_peak_hz = 12.0;
    double riro_target_std_hz = 1.2;
    double static_field = 0.0;          // uniform static offset, Hz
    bool correction = true;             // also run the corrected acquisition
    double latency_s = 0.0;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    double pressure_noise_std = 0.0;
    std::string shim_plan;              // optional plan file for the controller
    int train_frames = 60;
    double train_interval_s = 1.0;
    double train_noise_hz = 0.0;

    /// Key -> line number for keys read from a file (for error messages).
    std::map<std::string, int> key_lines;
    std::string source = "<config>";

    void validate() const;
};

/// Flat `key = value` text, `#` comments; unknown or repeated keys are errors.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// Every resolved key, in a form parse_config accepts.
std::string to_config_text(const ScenarioConfig& cfg);

struct EchoMetrics {
    double te_ms = 0.0;
    double psg = 0.0;
    double psg_background = 0.0;
    double snr = 0.0; // +inf when the background is exactly flat
};

struct ConditionResult {
    std::vector<ComplexImage2D> images;     // one per echo
    std::vector<ScalarField2D> magnitudes;  // one per echo
    std::vector<EchoMetrics> metrics;

    double mean_psg() const;
};

struct SimulationResult {
    ScenarioConfig config;
    ScalarField2D rho;
    Mask2D object;
    Mask2D roi;         // correction ROI: cylinder or cord
    GhostMetricMasks ghost_masks;
    Mask2D background;
    RiroCalibration riro;
    double riro_corr_hz = 0.0;
    ControllerRun controller;
    PressureTrace trace;
    ConditionResult off;
    std::optional<ConditionResult> on;
};

/// Phantom + RIRO calibration, controller replay and acquisition with the
/// correction off (and on, when enabled). Pure; writes nothing.
SimulationResult run_simulation(const ScenarioConfig& cfg);

/// Writes images, metrics.csv, events.csv, pressure.csv and manifest.cfg.
void write_simulation(const SimulationResult& result, const std::filesystem::path& out_dir);

struct SweepRow {
    double std_hz = 0.0;
    double psg_off = 0.0;
    double psg_on = 0.0;
    double relative_reduction = 0.0; // NaN when undefined
    std::string status = "ok";       // ok | undefined | calibration_failed
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool failed = false;
    std::string failure;
};

/// One corrected/uncorrected pair per std value, rows in input order.
/// Stops at the first calibration failure and flags it.
SweepResult run_sweep(const ScenarioConfig& cfg, const std::vector<double>& std_list);
std::string sweep_csv(const SweepResult& sweep);

/// Geometry of the synthetic training acquisition: three sagittal slices,
/// rows along z.
struct TrainingGeometry {
    int nz = 40;
    int ncols = 96;
    double spacing_mm = 1.25;
    double te1_ms = 2.46;
    double te2_ms = 4.92;
    double roi_radius_mm = 7.5;
};

struct TrainingQuality {
    int slice_index = 0;
    double gz_static_truth = 0.0;
    double rigo_max_truth = 0.0;
    double gz_static_error = 0.0;
    double rigo_max_error = 0.0;
    double gz_static_se = 0.0; // ROI-mean standard error, 0 when noiseless
    double rigo_max_se = 0.0;
};

struct TrainingResult {
    ScenarioConfig config;
    TrainingGeometry geometry;
    PressureTrace trace;
    std::vector<double> pressures;
    std::vector<RegressionMaps> sagittal_maps;
    ShimPlan plan;
    ShimPlan truth;
    std::vector<TrainingQuality> quality;

    double max_abs_error() const;
};

/// Synthetic training session: pressure trace, field-map frames through the
/// dual-echo path, z-gradients, per-voxel regression and per-slice ROI means.
TrainingResult run_training(const ScenarioConfig& cfg, const TrainingGeometry& geometry = {});
void write_training(const TrainingResult& result, const std::filesystem::path& out_dir);

} // namespace drtz
