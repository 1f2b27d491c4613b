#pragma once

#include "drtz/mgre.hpp"
#include "drtz/training.hpp"

#include <iosfwd>
#include <vector>

namespace drtz {

struct Excitation {
    int slice_index = 0;
    int line_index = 0;
    double time_s = 0.0;
};

/// Excitations in the order the sequence plays them.
struct ExcitationSchedule {
    std::vector<Excitation> events;

    int slices() const;
    void validate(int ny) const;
};

/// Interleaved multi-slice schedule: line j of slice s is excited at
/// j * TR + s * slice_offset_s.
ExcitationSchedule make_excitation_schedule(int n_slices, int ny, double tr_ms, double slice_offset_s = 0.0);

struct ControllerConfig {
    double latency_s = 0.0;         // pressure read-out to gradient delay
    double roi_riro_corr_hz = 0.0;  // RIRO_max,corr for the field-domain model
    double static_corr_hz = 0.0;    // static offset removed alongside (0 = omitted)

    void validate() const { require(latency_s >= 0.0, "controller: latency must be non-negative"); }
};

/// <G_z> = <G_z,static> + <RIGO_z,max> P.
inline double predict_gz(const ShimPlanEntry& entry, double pressure) {
    return entry.gz_static_mean + entry.rigo_max_mean * pressure;
}

/// Compensation gradient moment -<G_z> TE, in Hz ms / mm.
inline double compensation_moment(double gz_avg_hz_per_mm, double te_ms) {
    require(te_ms > 0.0, "compensation moment: TE must be positive");
    return -gz_avg_hz_per_mm * te_ms;
}

/// Pressure the controller sees at time t: the nearest sample at t - latency.
double sample_pressure(const PressureTrace& trace, double t_s, double latency_s);

struct ControllerEvent {
    int slice_index = 0;
    int line_index = 0;
    double time_s = 0.0;
    double pressure = 0.0;
    double gz_hz_per_mm = 0.0;
    std::vector<double> moments; // one per echo, Hz ms / mm
};

struct ControllerRun {
    std::vector<CorrectionSchedule> corrections; // indexed by slice
    std::vector<ControllerEvent> log;
};

/// Replays the realtime loop: per excitation one pressure lookup, the
/// predicted slice gradient, one compensation moment per echo, and the
/// matching in-plane uniform correction for the field-domain simulator.
/// The pressure normalisation P = (1 + sin)/2 is inverted to recover the
/// respiratory phase: riro_corr = roi_riro_corr_hz * (2 P - 1).
ControllerRun run_controller(const ExcitationSchedule& schedule, const PressureTrace& trace, const ShimPlan& plan,
                             const ControllerConfig& cfg, const SequenceParams& seq);

/// CSV: slice,line,time_s,pressure,gz_hz_per_mm,moment_echo1..N
void write_event_log(std::ostream& os, const std::vector<ControllerEvent>& log, int echoes);

} // namespace drtz
