#include "drtz/training.hpp"

#include "drtz/fields.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace drtz {

namespace {

// Independent normal stream per (seed, stream id).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

constexpr double kTimeSlack = 1e-9;

} // namespace

void PressureTrace::validate() const {
    require(sample_rate_hz == kPmuRateHz, "pressure trace: sample rate must be 50 Hz");
    require(samples.size() > 0, "pressure trace: empty");
    require(samples.allFinite() && samples.minCoeff() >= 0.0 && samples.maxCoeff() <= 1.0,
            "pressure trace: samples must lie in [0, 1]");
}

PressureTrace synth_pressure_trace(double resp_period_s, double duration_s, double noise_std, std::uint64_t seed,
                                   double start_time_s) {
    require(resp_period_s > 0.0, "pressure trace: period must be positive");
    require(duration_s >= resp_period_s, "pressure trace: duration shorter than one period");
    require(noise_std >= 0.0, "pressure trace: noise std must be non-negative");

    const auto n = static_cast<Eigen::Index>(std::floor(duration_s * kPmuRateHz + kTimeSlack)) + 1;
    PressureTrace trace;
    trace.start_time_s = start_time_s;
    trace.samples.resize(n);
    auto rng = make_stream(seed, 0);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t = trace.sample_time(k);
        double p = 0.5 + 0.5 * std::sin(kTwoPi * t / resp_period_s);
        if (noise_std > 0.0) p += noise_std * noise(rng);
        trace.samples(k) = std::clamp(p, 0.0, 1.0);
    }
    return trace;
}

Eigen::Index nearest_sample_index(const PressureTrace& trace, double t_s) {
    const double pos = (t_s - trace.start_time_s) * trace.sample_rate_hz;
    const auto last = trace.samples.size() - 1;
    if (!(pos >= -kTimeSlack && pos <= double(last) + kTimeSlack)) {
        std::ostringstream os;
        os << "time " << t_s << " s outside pressure trace span [" << trace.start_time_s << ", "
           << trace.end_time_s() << "] s";
        throw OutOfSpan(os.str());
    }
    auto k = static_cast<Eigen::Index>(std::floor(pos + kTimeSlack));
    if (pos - double(k) > 0.5 + 1e-6) ++k;
    return std::clamp<Eigen::Index>(k, 0, last);
}

std::vector<double> associate_timestamps(const PressureTrace& trace, const std::vector<double>& times_s) {
    std::vector<double> out;
    out.reserve(times_s.size());
    for (double t : times_s) out.push_back(trace.samples(nearest_sample_index(trace, t)));
    return out;
}

std::vector<FieldMapFrame> synth_fieldmap_series(const SagittalVolume& truth_static, const SagittalVolume& truth_riro,
                                                 const PressureTrace& trace, int n_frames, double frame_interval_s,
                                                 double noise_std_hz, std::uint64_t seed) {
    require(n_frames > 0, "field-map series: need at least one frame");
    require(frame_interval_s > 0.0, "field-map series: frame interval must be positive");
    require(noise_std_hz >= 0.0, "field-map series: noise std must be non-negative");
    for (int s = 0; s < kFieldMapSlices; ++s) {
        require(same_shape(truth_static[s], truth_static[0]) && same_shape(truth_riro[s], truth_static[0]),
                "field-map series: slices must share one shape");
        require(truth_static[s].all_finite() && truth_riro[s].all_finite(), "field-map series: non-finite truth");
    }

    std::vector<FieldMapFrame> frames;
    frames.reserve(n_frames);
    for (int i = 0; i < n_frames; ++i) {
        const double t = i * frame_interval_s;
        const double p = trace.samples(nearest_sample_index(trace, t));
        FieldMapFrame frame{t, {}};
        auto rng = make_stream(seed, std::uint64_t(i) + 1);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int s = 0; s < kFieldMapSlices; ++s) {
            ScalarField2D f(truth_static[s].values + p * truth_riro[s].values, truth_static[s].spacing);
            if (noise_std_hz > 0.0)
                for (Eigen::Index c = 0; c < f.cols(); ++c)
                    for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, c) += noise_std_hz * noise(rng);
            frame.slices[s] = std::move(f);
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

DualEchoFieldMap dual_echo_fieldmap(const ComplexImage2D& echo1, const ComplexImage2D& echo2, double delta_te_ms) {
    require(delta_te_ms > 0.0, "dual-echo field map: echo spacing must be positive");
    require(same_shape(echo1.data, echo2.data), "dual-echo field map: echo shapes differ");

    const double dte = delta_te_ms * 1e-3;
    DualEchoFieldMap out{ScalarField2D(echo1.data.rows(), echo1.data.cols(), echo1.spacing),
                         Mask2D(echo1.data.rows(), echo1.data.cols())};
    for (Eigen::Index c = 0; c < echo1.data.cols(); ++c)
        for (Eigen::Index r = 0; r < echo1.data.rows(); ++r) {
            const auto a = echo1.data(r, c);
            const auto b = echo2.data(r, c);
            if (a == 0.0 || b == 0.0) {
                out.invalid(r, c) = true;
                continue;
            }
            // Signals carry exp(-i 2 pi f TE), so the phase difference is -2 pi f dTE.
            out.offset_hz(r, c) = -std::arg(b * std::conj(a)) / (kTwoPi * dte);
        }
    return out;
}

ScalarField2D zgradient(const ScalarField2D& field, double dz_mm) {
    require(dz_mm > 0.0, "z-gradient: dz must be positive");
    const Eigen::Index nz = field.rows();
    require(nz >= 2, "z-gradient: need at least two samples along z");

    ScalarField2D g(field.rows(), field.cols(), field.spacing);
    g.values.row(0) = (field.values.row(1) - field.values.row(0)) / dz_mm;
    g.values.row(nz - 1) = (field.values.row(nz - 1) - field.values.row(nz - 2)) / dz_mm;
    if (nz > 2)
        g.values.middleRows(1, nz - 2) =
            (field.values.bottomRows(nz - 2) - field.values.topRows(nz - 2)) / (2.0 * dz_mm);
    return g;
}

SagittalVolume zgradient(const FieldMapFrame& frame, double dz_mm) {
    SagittalVolume out;
    for (int s = 0; s < kFieldMapSlices; ++s) out[s] = zgradient(frame.slices[s], dz_mm);
    return out;
}

RegressionMaps regress_gz_vs_pressure(const std::vector<ScalarField2D>& gz_frames, const std::vector<double>& pressures) {
    require(gz_frames.size() >= 3, "regression: need at least three frames");
    require(gz_frames.size() == pressures.size(), "regression: frame and pressure counts differ");
    for (const auto& f : gz_frames) require(same_shape(f, gz_frames.front()), "regression: frame shapes differ");

    const auto n = static_cast<double>(pressures.size());
    const Eigen::Map<const VectorXd> p(pressures.data(), Eigen::Index(pressures.size()));
    const double p_mean = p.mean();
    const VectorXd pc = p.array() - p_mean;
    const double sxx = pc.squaredNorm();
    if (!(sxx > 1e-12 * n)) throw DegenerateDesign("regression: pressure has zero variance");

    const Spacing sp = gz_frames.front().spacing;
    const Eigen::Index rows = gz_frames.front().rows(), cols = gz_frames.front().cols();

    // Accumulate in frame order; per-voxel results do not depend on voxel order.
    MatrixXd g_mean = MatrixXd::Zero(rows, cols);
    for (const auto& f : gz_frames) g_mean += f.values;
    g_mean /= n;
    MatrixXd sxy = MatrixXd::Zero(rows, cols);
    for (std::size_t i = 0; i < gz_frames.size(); ++i) sxy += pc(Eigen::Index(i)) * (gz_frames[i].values - g_mean);

    RegressionMaps out;
    out.rigo_max = ScalarField2D(sxy / sxx, sp);
    out.gz_static = ScalarField2D(g_mean - p_mean * out.rigo_max.values, sp);
    MatrixXd ss = MatrixXd::Zero(rows, cols);
    for (std::size_t i = 0; i < gz_frames.size(); ++i) {
        const MatrixXd r = gz_frames[i].values - out.gz_static.values - p(Eigen::Index(i)) * out.rigo_max.values;
        ss += r.cwiseAbs2();
    }
    out.residual_rms = ScalarField2D((ss / n).cwiseSqrt(), sp);
    return out;
}

void ShimPlan::validate() const {
    for (std::size_t i = 0; i < entries.size(); ++i)
        require(entries[i].slice_index == int(i), "shim plan: slice indices must be contiguous from 0");
}

const ShimPlanEntry& ShimPlan::at(int slice) const {
    if (slice < 0 || slice >= int(entries.size())) throw InvalidArgument("shim plan: no entry for slice");
    return entries[std::size_t(slice)];
}

ShimPlan build_shim_plan(const std::vector<RegressionMaps>& maps, const std::vector<Mask2D>& roi_per_slice) {
    require(maps.size() == roi_per_slice.size(), "shim plan: one ROI per target slice required");
    ShimPlan plan;
    for (std::size_t s = 0; s < maps.size(); ++s) {
        require(!roi_per_slice[s].empty(), "shim plan: empty ROI");
        plan.entries.push_back({int(s), masked_mean(maps[s].gz_static, roi_per_slice[s]),
                                masked_mean(maps[s].rigo_max, roi_per_slice[s])});
    }
    return plan;
}

void write_shim_plan(std::ostream& os, const ShimPlan& plan) {
    plan.validate();
    std::ostringstream buf;
    buf << std::setprecision(17);
    for (const auto& e : plan.entries) buf << e.slice_index << ' ' << e.gz_static_mean << ' ' << e.rigo_max_mean << '\n';
    os << buf.str();
}

namespace {

double parse_double(const std::string& token, const char* what, int line_no) {
    double v = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        std::ostringstream os;
        os << what << " line " << line_no << ": bad number '" << token << "'";
        throw InvalidArgument(os.str());
    }
    return v;
}

} // namespace

ShimPlan read_shim_plan(std::istream& is) {
    ShimPlan plan;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string a, b, c, extra;
        if (!(ls >> a >> b >> c) || (ls >> extra)) {
            std::ostringstream os;
            os << "shim plan line " << line_no << ": expected 3 fields";
            throw InvalidArgument(os.str());
        }
        const double idx = parse_double(a, "shim plan", line_no);
        if (idx != std::floor(idx)) throw InvalidArgument("shim plan: non-integer slice index");
        plan.entries.push_back({int(idx), parse_double(b, "shim plan", line_no), parse_double(c, "shim plan", line_no)});
    }
    plan.validate();
    return plan;
}

void write_pressure_csv(std::ostream& os, const PressureTrace& trace) {
    std::ostringstream buf;
    buf << "time_s,pressure\n" << std::setprecision(17);
    for (Eigen::Index k = 0; k < trace.samples.size(); ++k) buf << trace.sample_time(k) << ',' << trace.samples(k) << '\n';
    os << buf.str();
}

PressureTrace read_pressure_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("time_s,pressure", 0) != 0)
        throw InvalidArgument("pressure csv: missing 'time_s,pressure' header");
    std::vector<double> times, values;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("pressure csv line " + std::to_string(line_no) + ": missing comma");
        times.push_back(parse_double(line.substr(0, comma), "pressure csv", line_no));
        values.push_back(parse_double(line.substr(comma + 1), "pressure csv", line_no));
    }
    require(!values.empty(), "pressure csv: no samples");
    for (std::size_t k = 1; k < times.size(); ++k)
        require(std::abs(times[k] - times[0] - double(k) / kPmuRateHz) < 1e-6, "pressure csv: samples not on a 50 Hz grid");

    PressureTrace trace;
    trace.start_time_s = times.front();
    trace.samples = Eigen::Map<const VectorXd>(values.data(), Eigen::Index(values.size()));
    trace.validate();
    return trace;
}

} // namespace drtz
