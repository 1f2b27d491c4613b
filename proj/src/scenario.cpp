#include "drtz/scenario.hpp"

#include "drtz/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace drtz {

namespace {

std::string config_message(const std::string& source, int line, const std::string& what) {
    std::ostringstream os;
    os << source;
    if (line > 0) os << ':' << line;
    os << ": " << what;
    return os.str();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key, const std::string& source, int line) {
    T v{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(source, line, "invalid value '" + text + "' for key '" + key + "'");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(v)) throw ConfigError(source, line, "non-finite value for key '" + key + "'");
    return v;
}

bool parse_bool(const std::string& text, const std::string& key, const std::string& source, int line) {
    if (text == "on" || text == "true" || text == "1" || text == "yes") return true;
    if (text == "off" || text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(source, line, "invalid boolean '" + text + "' for key '" + key + "' (use on/off)");
}

std::string phantom_name(PhantomKind k) { return k == PhantomKind::Cylinder ? "cylinder" : "body_cord"; }

constexpr double kCylinderRadiusMm = 10.0;
constexpr double kPsgZero = 1e-9; // percent; below this the image is ghost-free to round-off

} // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : Error(config_message(source, line, what)), line_(line) {}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    ScenarioConfig cfg;
    cfg.source = source;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line_no, "expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(source, line_no, "empty key");
        if (cfg.key_lines.count(key)) throw ConfigError(source, line_no, "duplicate key '" + key + "'");
        cfg.key_lines[key] = line_no;

        auto num = [&](auto& field) { field = parse_number<std::decay_t<decltype(field)>>(value, key, source, line_no); };
        if (key == "phantom") {
            if (value == "cylinder")
                cfg.phantom = PhantomKind::Cylinder;
            else if (value == "body_cord")
                cfg.phantom = PhantomKind::BodyCord;
            else
                throw ConfigError(source, line_no, "phantom must be 'cylinder' or 'body_cord'");
        } else if (key == "nx") num(cfg.nx);
        else if (key == "ny") num(cfg.ny);
        else if (key == "spacing_mm") num(cfg.spacing_mm);
        else if (key == "tr_ms") num(cfg.tr_ms);
        else if (key == "te_ms") {
            cfg.te_ms.clear();
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) cfg.te_ms.push_back(parse_number<double>(trim(item), key, source, line_no));
        } else if (key == "resp_period_s") num(cfg.resp_period_s);
        else if (key == "riro_peak_hz") num(cfg.riro_peak_hz);
        else if (key == "riro_target_std_hz") num(cfg.riro_target_std_hz);
        else if (key == "static_field") num(cfg.static_field);
        else if (key == "correction") cfg.correction = parse_bool(value, key, source, line_no);
        else if (key == "latency_s") num(cfg.latency_s);
        else if (key == "seed") num(cfg.seed);
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "pressure_noise_std") num(cfg.pressure_noise_std);
        else if (key == "shim_plan") cfg.shim_plan = value;
        else if (key == "train_frames") num(cfg.train_frames);
        else if (key == "train_interval_s") num(cfg.train_interval_s);
        else if (key == "train_noise_hz") num(cfg.train_noise_hz);
        else throw ConfigError(source, line_no, "unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error& e) {
        throw ConfigError(path.string(), 0, e.what());
    }
    return parse_config(text, path.string());
}

void ScenarioConfig::validate() const {
    auto check = [&](bool ok, const std::string& key, const std::string& what) {
        if (ok) return;
        const auto it = key_lines.find(key);
        throw ConfigError(source, it == key_lines.end() ? 0 : it->second, key + ": " + what);
    };
    check(nx > 0, "nx", "must be positive");
    check(ny > 0, "ny", "must be positive");
    check(ny % 2 == 0, "ny", "must be even");
    check(spacing_mm > 0.0, "spacing_mm", "must be positive");
    check(tr_ms > 0.0, "tr_ms", "must be positive");
    check(!te_ms.empty(), "te_ms", "needs at least one echo time");
    for (std::size_t e = 0; e < te_ms.size(); ++e) {
        check(te_ms[e] > 0.0, "te_ms", "echo times must be positive");
        if (e > 0) check(te_ms[e] > te_ms[e - 1], "te_ms", "echo times must be strictly increasing");
    }
    check(tr_ms > te_ms.back(), "tr_ms", "must exceed the last echo time");
    check(resp_period_s > 0.0, "resp_period_s", "must be positive");
    check(riro_peak_hz >= 0.0, "riro_peak_hz", "must be non-negative");
    check(riro_target_std_hz >= 0.0, "riro_target_std_hz", "must be non-negative");
    check(latency_s >= 0.0, "latency_s", "must be non-negative");
    check(pressure_noise_std >= 0.0, "pressure_noise_std", "must be non-negative");
    check(train_frames >= 3, "train_frames", "must be at least 3");
    check(train_interval_s > 0.0, "train_interval_s", "must be positive");
    check(train_noise_hz >= 0.0, "train_noise_hz", "must be non-negative");
    check(!output_dir.empty(), "output_dir", "must not be empty");
    if (phantom == PhantomKind::BodyCord) {
        check(nx >= 64 && ny >= 64, "phantom", "body_cord needs at least 64 pixels per axis");
    } else {
        check(kCylinderRadiusMm / spacing_mm >= 2.0, "spacing_mm", "cylinder radius must span at least 2 pixels");
        check(kCylinderRadiusMm <= 0.5 * std::min(nx, ny) * spacing_mm, "phantom",
              "cylinder radius exceeds half the field of view");
    }
}

std::string to_config_text(const ScenarioConfig& cfg) {
    using io::format_double;
    std::ostringstream os;
    os << "# " << kToolVersion << " resolved configuration\n";
    os << "phantom = " << phantom_name(cfg.phantom) << '\n';
    os << "nx = " << cfg.nx << '\n';
    os << "ny = " << cfg.ny << '\n';
    os << "spacing_mm = " << format_double(cfg.spacing_mm) << '\n';
    os << "tr_ms = " << format_double(cfg.tr_ms) << '\n';
    os << "te_ms = ";
    for (std::size_t e = 0; e < cfg.te_ms.size(); ++e) os << (e ? "," : "") << format_double(cfg.te_ms[e]);
    os << '\n';
    os << "resp_period_s = " << format_double(cfg.resp_period_s) << '\n';
    os << "riro_peak_hz = " << format_double(cfg.riro_peak_hz) << '\n';
    os << "riro_target_std_hz = " << format_double(cfg.riro_target_std_hz) << '\n';
    os << "static_field = " << format_double(cfg.static_field) << '\n';
    os << "correction = " << (cfg.correction ? "on" : "off") << '\n';
    os << "latency_s = " << format_double(cfg.latency_s) << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "output_dir = " << cfg.output_dir << '\n';
    os << "pressure_noise_std = " << format_double(cfg.pressure_noise_std) << '\n';
    if (!cfg.shim_plan.empty()) os << "shim_plan = " << cfg.shim_plan << '\n';
    os << "train_frames = " << cfg.train_frames << '\n';
    os << "train_interval_s = " << format_double(cfg.train_interval_s) << '\n';
    os << "train_noise_hz = " << format_double(cfg.train_noise_hz) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Training session

namespace {

struct TrainingTruth {
    SagittalVolume static_hz, riro_hz;
    SagittalVolume gz_static, rigo_max; // analytic z-gradients
};

// Fields linear in z with in-plane varying slopes, so finite differences
// along z are exact and the analytic gradients are the slopes.
TrainingTruth make_training_truth(const TrainingGeometry& g) {
    TrainingTruth t;
    const auto sp = Spacing::isotropic(g.spacing_mm);
    for (int s = 0; s < kFieldMapSlices; ++s) {
        const double xs = s - 1;
        for (auto* v : {&t.static_hz[s], &t.riro_hz[s], &t.gz_static[s], &t.rigo_max[s]})
            *v = ScalarField2D(g.nz, g.ncols, sp);
        for (int c = 0; c < g.ncols; ++c) {
            const double y = (c - g.ncols / 2) * g.spacing_mm;
            const double gzs = 0.5 + 0.002 * y + 0.05 * xs;
            const double rigo = 0.3 * std::exp(-(y / 30.0) * (y / 30.0)) + 0.02 * xs;
            for (int r = 0; r < g.nz; ++r) {
                const double z = (r - g.nz / 2) * g.spacing_mm;
                t.static_hz[s](r, c) = 30.0 + gzs * z;
                t.riro_hz[s](r, c) = 10.0 + rigo * z;
                t.gz_static[s](r, c) = gzs;
                t.rigo_max[s](r, c) = rigo;
            }
        }
    }
    return t;
}

// Axial target slice k: one row per sagittal slice, taken at z row k.
ScalarField2D axial_slice(const std::array<const ScalarField2D*, kFieldMapSlices>& sag, int k) {
    ScalarField2D out(kFieldMapSlices, sag[0]->cols(), sag[0]->spacing);
    for (int s = 0; s < kFieldMapSlices; ++s) out.values.row(s) = sag[std::size_t(s)]->values.row(k);
    return out;
}

Mask2D axial_roi(const TrainingGeometry& g) {
    Mask2D roi(kFieldMapSlices, g.ncols);
    for (int c = 0; c < g.ncols; ++c) {
        const double y = (c - g.ncols / 2) * g.spacing_mm;
        if (std::abs(y) <= g.roi_radius_mm) roi.values.col(c).setConstant(true);
    }
    return roi;
}

} // namespace

double TrainingResult::max_abs_error() const {
    double m = 0.0;
    for (const auto& q : quality) m = std::max({m, std::abs(q.gz_static_error), std::abs(q.rigo_max_error)});
    return m;
}

TrainingResult run_training(const ScenarioConfig& cfg, const TrainingGeometry& geometry) {
    cfg.validate();
    require(geometry.nz >= 3 && geometry.ncols > 0, "training: geometry too small");

    TrainingResult res;
    res.config = cfg;
    res.geometry = geometry;

    const TrainingTruth truth = make_training_truth(geometry);
    const double duration = std::max(cfg.resp_period_s, (cfg.train_frames - 1) * cfg.train_interval_s + 1.0);
    res.trace = synth_pressure_trace(cfg.resp_period_s, duration, cfg.pressure_noise_std, cfg.seed);

    const auto frames = synth_fieldmap_series(truth.static_hz, truth.riro_hz, res.trace, cfg.train_frames,
                                              cfg.train_interval_s, cfg.train_noise_hz, cfg.seed);
    std::vector<double> times;
    for (const auto& f : frames) times.push_back(f.timestamp_s);
    res.pressures = associate_timestamps(res.trace, times);

    // Field maps go through the dual-echo phase-difference path.
    const double te1 = geometry.te1_ms * 1e-3, te2 = geometry.te2_ms * 1e-3;
    std::array<std::vector<ScalarField2D>, kFieldMapSlices> gz_series;
    for (const auto& frame : frames) {
        FieldMapFrame measured{frame.timestamp_s, {}};
        for (int s = 0; s < kFieldMapSlices; ++s) {
            const auto& f = frame.slices[s];
            ComplexImage2D e1{f.values.unaryExpr([&](double hz) { return std::polar(1.0, -kTwoPi * hz * te1); }), f.spacing};
            ComplexImage2D e2{f.values.unaryExpr([&](double hz) { return std::polar(1.0, -kTwoPi * hz * te2); }), f.spacing};
            measured.slices[s] = dual_echo_fieldmap(e1, e2, geometry.te2_ms - geometry.te1_ms).offset_hz;
        }
        const SagittalVolume gz = zgradient(measured, geometry.spacing_mm);
        for (int s = 0; s < kFieldMapSlices; ++s) gz_series[s].push_back(gz[s]);
    }
    for (int s = 0; s < kFieldMapSlices; ++s) res.sagittal_maps.push_back(regress_gz_vs_pressure(gz_series[s], res.pressures));

    const Mask2D roi = axial_roi(geometry);
    std::vector<RegressionMaps> axial_maps, truth_maps;
    std::vector<Mask2D> rois;
    for (int k = 0; k < geometry.nz; ++k) {
        const auto pick = [&](auto member) {
            return axial_slice({&(res.sagittal_maps[0].*member), &(res.sagittal_maps[1].*member),
                                &(res.sagittal_maps[2].*member)},
                               k);
        };
        axial_maps.push_back({pick(&RegressionMaps::gz_static), pick(&RegressionMaps::rigo_max),
                              pick(&RegressionMaps::residual_rms)});
        const auto gzs = axial_slice({&truth.gz_static[0], &truth.gz_static[1], &truth.gz_static[2]}, k);
        truth_maps.push_back({gzs, axial_slice({&truth.rigo_max[0], &truth.rigo_max[1], &truth.rigo_max[2]}, k),
                              ScalarField2D(gzs.rows(), gzs.cols(), gzs.spacing)});
        rois.push_back(roi);
    }
    res.plan = build_shim_plan(axial_maps, rois);
    res.truth = build_shim_plan(truth_maps, rois);

    // Analytic standard errors of the ROI means. Field-map noise sigma maps to
    // G_z noise sigma / (sqrt(2) dz) inside and sqrt(2) sigma / dz at the ends;
    // voxels of one target slice sit on distinct (slice, column) pairs, so
    // their errors are independent.
    const Eigen::Map<const VectorXd> p(res.pressures.data(), Eigen::Index(res.pressures.size()));
    const double n = double(p.size());
    const double p_mean = p.mean();
    const double sxx = (p.array() - p_mean).square().sum();
    const double n_roi = double(roi.count());
    for (int k = 0; k < geometry.nz; ++k) {
        const bool edge = k == 0 || k == geometry.nz - 1;
        const double sigma_g = cfg.train_noise_hz * (edge ? std::sqrt(2.0) : 1.0 / std::sqrt(2.0)) / geometry.spacing_mm;
        TrainingQuality q;
        q.slice_index = k;
        q.gz_static_truth = res.truth.entries[std::size_t(k)].gz_static_mean;
        q.rigo_max_truth = res.truth.entries[std::size_t(k)].rigo_max_mean;
        q.gz_static_error = res.plan.entries[std::size_t(k)].gz_static_mean - q.gz_static_truth;
        q.rigo_max_error = res.plan.entries[std::size_t(k)].rigo_max_mean - q.rigo_max_truth;
        q.rigo_max_se = sigma_g / std::sqrt(n_roi * sxx);
        q.gz_static_se = sigma_g * std::sqrt(1.0 / n + p_mean * p_mean / sxx) / std::sqrt(n_roi);
        res.quality.push_back(q);
    }
    return res;
}

void write_training(const TrainingResult& result, const std::filesystem::path& out_dir) {
    using io::format_double;
    std::filesystem::create_directories(out_dir);

    std::ostringstream plan;
    write_shim_plan(plan, result.plan);
    io::write_file_atomic(out_dir / "shim_plan.txt", plan.str());

    std::ostringstream q;
    q << "slice,gz_static_mean,gz_static_truth,gz_static_error,gz_static_se,rigo_max_mean,rigo_max_truth,"
         "rigo_max_error,rigo_max_se\n";
    for (std::size_t k = 0; k < result.quality.size(); ++k) {
        const auto& e = result.quality[k];
        const auto& p = result.plan.entries[k];
        q << e.slice_index << ',' << format_double(p.gz_static_mean) << ',' << format_double(e.gz_static_truth) << ','
          << format_double(e.gz_static_error) << ',' << format_double(e.gz_static_se) << ','
          << format_double(p.rigo_max_mean) << ',' << format_double(e.rigo_max_truth) << ','
          << format_double(e.rigo_max_error) << ',' << format_double(e.rigo_max_se) << '\n';
    }
    io::write_file_atomic(out_dir / "training_quality.csv", q.str());

    std::ostringstream trace;
    write_pressure_csv(trace, result.trace);
    io::write_file_atomic(out_dir / "pressure.csv", trace.str());
    io::write_file_atomic(out_dir / "manifest.cfg", to_config_text(result.config));
}

// ---------------------------------------------------------------------------
// Simulation

double ConditionResult::mean_psg() const {
    double s = 0.0;
    for (const auto& m : metrics) s += m.psg;
    return metrics.empty() ? 0.0 : s / double(metrics.size());
}

namespace {

ConditionResult evaluate(const std::vector<KSpaceFrame>& frames, const SequenceParams& seq, Spacing spacing,
                         const GhostMetricMasks& ghost, const Mask2D& roi, const Mask2D& background) {
    ConditionResult out;
    for (const auto& frame : frames) {
        auto image = reconstruct(frame, spacing);
        auto mag = magnitude(image);
        EchoMetrics m;
        m.te_ms = seq.te_ms[std::size_t(frame.echo_index)];
        m.psg = psg(mag, ghost);
        m.psg_background = psg_background(mag, roi, background);
        try {
            m.snr = snr(mag, ghost.object, background);
        } catch (const NumericalError&) {
            m.snr = std::numeric_limits<double>::infinity();
        }
        out.images.push_back(std::move(image));
        out.magnitudes.push_back(std::move(mag));
        out.metrics.push_back(m);
    }
    return out;
}

ShimPlanEntry controller_plan_entry(const ScenarioConfig& cfg) {
    ShimPlan plan;
    if (!cfg.shim_plan.empty()) {
        std::ifstream is(cfg.shim_plan);
        if (!is) throw ConfigError(cfg.source, cfg.key_lines.count("shim_plan") ? cfg.key_lines.at("shim_plan") : 0,
                                   "cannot open shim plan '" + cfg.shim_plan + "'");
        plan = read_shim_plan(is);
    } else {
        plan = run_training(cfg).plan;
    }
    require(!plan.entries.empty(), "simulation: empty shim plan");
    // The simulated slice sits at the middle of the planned stack.
    ShimPlanEntry entry = plan.entries[plan.entries.size() / 2];
    entry.slice_index = 0;
    return entry;
}

} // namespace

SimulationResult run_simulation(const ScenarioConfig& cfg) {
    cfg.validate();
    SimulationResult res;
    res.config = cfg;

    const auto spacing = Spacing::isotropic(cfg.spacing_mm);
    if (cfg.phantom == PhantomKind::Cylinder) {
        auto ph = make_cylinder_phantom(cfg.nx, cfg.ny, cfg.spacing_mm, kCylinderRadiusMm, 1.0);
        res.rho = std::move(ph.density);
        res.object = ph.object;
        res.roi = std::move(ph.object);
    } else {
        auto ph = make_body_cord_phantom(cfg.nx, cfg.ny, cfg.spacing_mm);
        res.rho = std::move(ph.density);
        res.object = std::move(ph.object);
        res.roi = std::move(ph.cord);
    }
    res.ghost_masks = auto_ghost_masks(res.object, Axis::Rows);
    res.background = !dilate(res.object, 2);

    res.riro = calibrate_radial_riro(res.object, spacing, cfg.riro_peak_hz, cfg.riro_target_std_hz);
    res.riro_corr_hz = masked_mean(res.riro.riro_max_hz, res.roi);

    const FieldModel model{ScalarField2D(cfg.ny, cfg.nx, spacing, cfg.static_field), res.riro.riro_max_hz,
                           cfg.resp_period_s};
    const SequenceParams seq{cfg.nx, cfg.ny, cfg.tr_ms, cfg.te_ms};

    // Trace starts early enough that the latency-shifted first lookup is covered.
    const double start = -std::ceil(cfg.latency_s * kPmuRateHz - 1e-9) / kPmuRateHz;
    const double duration = std::max(cfg.resp_period_s, (cfg.ny - 1) * seq.tr_s() - start + 1.0);
    res.trace = synth_pressure_trace(cfg.resp_period_s, duration, cfg.pressure_noise_std, cfg.seed, start);

    ShimPlan plan{{controller_plan_entry(cfg)}};
    const ControllerConfig ctl{cfg.latency_s, res.riro_corr_hz, cfg.static_field};
    res.controller = run_controller(make_excitation_schedule(1, cfg.ny, cfg.tr_ms), res.trace, plan, ctl, seq);

    res.off = evaluate(acquire_kspace(res.rho, model, seq), seq, spacing, res.ghost_masks, res.roi, res.background);
    if (cfg.correction)
        res.on = evaluate(acquire_kspace(res.rho, model, seq, res.controller.corrections.front()), seq, spacing,
                          res.ghost_masks, res.roi, res.background);
    return res;
}

void write_simulation(const SimulationResult& result, const std::filesystem::path& out_dir) {
    using io::format_double;
    std::filesystem::create_directories(out_dir);
    const auto& seq_te = result.config.te_ms;

    for (std::size_t e = 0; e < seq_te.size(); ++e) {
        double full_scale = result.off.magnitudes[e].values.maxCoeff();
        if (result.on) full_scale = std::max(full_scale, result.on->magnitudes[e].values.maxCoeff());
        const std::string suffix = "_echo" + std::to_string(e + 1) + ".pgm";
        io::write_file_atomic(out_dir / ("magnitude_off" + suffix), io::encode_pgm16(result.off.magnitudes[e].values, full_scale));
        if (result.on)
            io::write_file_atomic(out_dir / ("magnitude_on" + suffix), io::encode_pgm16(result.on->magnitudes[e].values, full_scale));
    }
    io::write_file_atomic(out_dir / "riro_max.pgm",
                          io::encode_pgm16(result.riro.riro_max_hz.values, result.riro.riro_max_hz.values.maxCoeff()));

    std::ostringstream m;
    m << "condition,echo,te_ms,psg,psg_background,snr\n";
    auto rows = [&](const char* name, const ConditionResult& c) {
        for (std::size_t e = 0; e < c.metrics.size(); ++e) {
            const auto& x = c.metrics[e];
            m << name << ',' << e + 1 << ',' << format_double(x.te_ms) << ',' << format_double(x.psg) << ','
              << format_double(x.psg_background) << ',' << (std::isinf(x.snr) ? std::string("inf") : format_double(x.snr))
              << '\n';
        }
    };
    rows("off", result.off);
    if (result.on) rows("on", *result.on);
    io::write_file_atomic(out_dir / "metrics.csv", m.str());

    std::ostringstream ev;
    write_event_log(ev, result.controller.log, int(seq_te.size()));
    io::write_file_atomic(out_dir / "events.csv", ev.str());

    std::ostringstream trace;
    write_pressure_csv(trace, result.trace);
    io::write_file_atomic(out_dir / "pressure.csv", trace.str());

    std::string manifest = to_config_text(result.config);
    manifest += "# riro_sigma_mm = " + format_double(result.riro.sigma_mm) + "\n";
    manifest += "# riro_achieved_std_hz = " + format_double(result.riro.achieved_std_hz) + "\n";
    manifest += "# riro_corr_hz = " + format_double(result.riro_corr_hz) + "\n";
    io::write_file_atomic(out_dir / "manifest.cfg", manifest);
}

// ---------------------------------------------------------------------------
// Sweep

SweepResult run_sweep(const ScenarioConfig& cfg, const std::vector<double>& std_list) {
    SweepResult sweep;
    for (double s : std_list) {
        ScenarioConfig point = cfg;
        point.riro_target_std_hz = s;
        point.correction = true;
        try {
            const auto r = run_simulation(point);
            SweepRow row{s, r.off.mean_psg(), r.on->mean_psg(), std::numeric_limits<double>::quiet_NaN(), "ok"};
            if (row.psg_off < kPsgZero)
                row.status = "undefined";
            else
                row.relative_reduction = (row.psg_off - row.psg_on) / row.psg_off;
            sweep.rows.push_back(row);
        } catch (const CalibrationError& e) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            sweep.rows.push_back({s, nan, nan, nan, "calibration_failed"});
            sweep.failed = true;
            sweep.failure = e.what();
            break;
        }
    }
    return sweep;
}

std::string sweep_csv(const SweepResult& sweep) {
    using io::format_double;
    auto num = [](double v) { return std::isnan(v) ? std::string("nan") : format_double(v); };
    std::ostringstream os;
    os << "std,psg_off,psg_on,relative_reduction,status\n";
    for (const auto& r : sweep.rows)
        os << format_double(r.std_hz) << ',' << num(r.psg_off) << ',' << num(r.psg_on) << ',' << num(r.relative_reduction)
           << ',' << r.status << '\n';
    return os.str();
}

} // namespace drtz
