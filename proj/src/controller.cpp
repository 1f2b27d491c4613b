#include "drtz/controller.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace drtz {

int ExcitationSchedule::slices() const {
    int n = 0;
    for (const auto& e : events) n = std::max(n, e.slice_index + 1);
    return n;
}

void ExcitationSchedule::validate(int ny) const {
    const int n_slices = slices();
    std::vector<std::vector<int>> seen(std::size_t(n_slices), std::vector<int>(std::size_t(ny), 0));
    std::vector<double> last_time(std::size_t(n_slices), -1e300);
    for (const auto& e : events) {
        require(e.slice_index >= 0, "excitation schedule: negative slice index");
        require(e.line_index >= 0 && e.line_index < ny, "excitation schedule: line index out of range");
        auto s = std::size_t(e.slice_index);
        require(e.time_s > last_time[s], "excitation schedule: times must increase within a slice");
        last_time[s] = e.time_s;
        ++seen[s][std::size_t(e.line_index)];
    }
    for (const auto& per_slice : seen)
        for (int count : per_slice) require(count == 1, "excitation schedule: each line must be excited exactly once per slice");
}

ExcitationSchedule make_excitation_schedule(int n_slices, int ny, double tr_ms, double slice_offset_s) {
    require(n_slices > 0 && ny > 0, "excitation schedule: need at least one slice and line");
    require(slice_offset_s >= 0.0 && slice_offset_s * n_slices <= tr_ms * 1e-3 + 1e-12,
            "excitation schedule: slices must fit within one TR");
    ExcitationSchedule schedule;
    for (int j = 0; j < ny; ++j)
        for (int s = 0; s < n_slices; ++s)
            schedule.events.push_back({s, j, phase_encode_time(j, ny, tr_ms) + s * slice_offset_s});
    return schedule;
}

double sample_pressure(const PressureTrace& trace, double t_s, double latency_s) {
    require(latency_s >= 0.0, "sample_pressure: latency must be non-negative");
    return trace.samples(nearest_sample_index(trace, t_s - latency_s));
}

ControllerRun run_controller(const ExcitationSchedule& schedule, const PressureTrace& trace, const ShimPlan& plan,
                             const ControllerConfig& cfg, const SequenceParams& seq) {
    seq.validate();
    cfg.validate();
    schedule.validate(seq.ny);
    plan.validate();

    ControllerRun run;
    run.corrections.assign(std::size_t(schedule.slices()), CorrectionSchedule::zeros(seq.ny));
    run.log.reserve(schedule.events.size());

    for (const auto& ex : schedule.events) {
        const double p = sample_pressure(trace, ex.time_s, cfg.latency_s);
        const double gz = predict_gz(plan.at(ex.slice_index), p);

        ControllerEvent event{ex.slice_index, ex.line_index, ex.time_s, p, gz, {}};
        event.moments.reserve(seq.te_ms.size());
        for (double te : seq.te_ms) event.moments.push_back(compensation_moment(gz, te));

        auto& corr = run.corrections[std::size_t(ex.slice_index)];
        corr.static_corr_hz(ex.line_index) = cfg.static_corr_hz;
        corr.riro_corr_value_hz(ex.line_index) = cfg.roi_riro_corr_hz * (2.0 * p - 1.0);
        run.log.push_back(std::move(event));
    }
    return run;
}

void write_event_log(std::ostream& os, const std::vector<ControllerEvent>& log, int echoes) {
    std::ostringstream buf;
    buf << "slice,line,time_s,pressure,gz_hz_per_mm";
    for (int e = 1; e <= echoes; ++e) buf << ",moment_echo" << e;
    buf << '\n' << std::setprecision(17);
    for (const auto& ev : log) {
        require(int(ev.moments.size()) == echoes, "event log: moment count does not match echo count");
        buf << ev.slice_index << ',' << ev.line_index << ',' << ev.time_s << ',' << ev.pressure << ','
            << ev.gz_hz_per_mm;
        for (double m : ev.moments) buf << ',' << m;
        buf << '\n';
    }
    os << buf.str();
}

} // namespace drtz
