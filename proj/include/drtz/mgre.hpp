#pragma once

#include "drtz/core.hpp"

#include <optional>
#include <vector>

namespace drtz {

/// Cartesian multi-echo gradient-echo acquisition. Each excitation records
/// one phase-encode line for every echo.
struct SequenceParams {
    int nx = 0;                 // readout samples (columns)
    int ny = 0;                 // phase-encode lines (rows), even
    double tr_ms = 0.0;
    std::vector<double> te_ms;  // strictly increasing, all > 0, max < tr

    void validate() const;
    double tr_s() const { return tr_ms * 1e-3; }
    int echoes() const { return static_cast<int>(te_ms.size()); }
};

/// Elapsed time from the first phase-encode step to line `line`, seconds.
double phase_encode_time(int line, int ny, double tr_ms);

/// Per-line in-plane uniform correction offset (Hz). The realised RIRO term
/// already includes the respiratory sine evaluated at the excitation time.
struct CorrectionSchedule {
    VectorXd static_corr_hz;
    VectorXd riro_corr_value_hz;

    static CorrectionSchedule zeros(int ny) {
        return {VectorXd::Zero(ny), VectorXd::Zero(ny)};
    }
    Eigen::Index size() const { return riro_corr_value_hz.size(); }
    double total_hz(Eigen::Index line) const { return static_corr_hz(line) + riro_corr_value_hz(line); }
    void validate(int ny) const;
};

struct KSpaceFrame {
    int echo_index = 0;
    MatrixXcd data; // ny x nx, rows are phase-encode lines
};

struct ComplexImage2D {
    MatrixXcd data;
    Spacing spacing;
};

/// Simulated k-space, one frame per echo. Line j of echo e is row j of the
/// 2D DFT of rho * exp(-i phi), with
///   phi = 2 pi TE_e [static + riro_max sin(w (t'_j + TE_e)) - corr_j].
std::vector<KSpaceFrame> acquire_kspace(const ScalarField2D& rho, const FieldModel& model,
                                        const SequenceParams& seq,
                                        const std::optional<CorrectionSchedule>& corr = std::nullopt);

/// Direct evaluation of the encoding sum for every (ky, kx); O(N^2) per
/// sample. Only meant for small grids.
std::vector<KSpaceFrame> acquire_kspace_oracle(const ScalarField2D& rho, const FieldModel& model,
                                               const SequenceParams& seq,
                                               const std::optional<CorrectionSchedule>& corr = std::nullopt);

ComplexImage2D reconstruct(const KSpaceFrame& frame, Spacing spacing = {});

inline ScalarField2D magnitude(const ComplexImage2D& image) {
    return ScalarField2D(image.data.cwiseAbs(), image.spacing);
}

} // namespace drtz
