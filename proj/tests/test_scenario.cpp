#include "drtz/io.hpp"
#include "drtz/scenario.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace drtz;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "drtz_test_scenario" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ScenarioConfig phantom() { return load_config(fs::path(DRTZ_CONFIG_DIR) / "phantom.cfg"); }

int line_of(const std::string& text) {
    try {
        parse_config(text, "t.cfg");
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

int cli_to(const std::string& args, const fs::path& stdout_path) {
    const std::string cmd =
        std::string("\"") + DRTZ_CLI_PATH + "\" " + args + " >\"" + stdout_path.string() + "\" 2>/dev/null";
    const int rc = std::system(cmd.c_str());
#ifdef WEXITSTATUS
    return WEXITSTATUS(rc);
#else
    return rc;
#endif
}

int cli(const std::string& args) { return cli_to(args, "/dev/null"); }

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = io::read_file(e.path());
    return out;
}

} // namespace

TEST_CASE("config errors carry line numbers") {
    CHECK(line_of("nx = 64\nny = 64\nbogus = 1\n") == 3);
    CHECK(line_of("nx = 64\n\n# comment\nnx = 32\n") == 4);
    CHECK(line_of("nx = 6x4\n") == 1);
    CHECK(line_of("correction = maybe\n") == 1);
    CHECK(line_of("te_ms = 5,abc\n") == 1);
    CHECK(line_of("just text\n") == 1);
    CHECK(line_of("ny = 55\n") == 1);                    // must be even
    CHECK(line_of("tr_ms = 1000\nte_ms = 20,10\n") == 2); // not increasing
    CHECK(line_of("phantom = body_cord\nnx = 32\n") == 1);
    CHECK(line_of("nx = 64\n") == -1);
    CHECK_THROWS_AS(load_config("/nonexistent/drtz.cfg"), ConfigError);
}

TEST_CASE("config manifest round-trips") {
    auto cfg = parse_config("te_ms = 5, 12.5 ,20\npressure_noise_std = 0.03\nseed = 99\nlatency_s = 0.02\n");
    CHECK(cfg.te_ms == std::vector<double>{5.0, 12.5, 20.0});
    const auto back = parse_config(to_config_text(cfg));
    CHECK(to_config_text(back) == to_config_text(cfg));
    CHECK(back.seed == 99);
    CHECK(back.pressure_noise_std == 0.03);
    CHECK(back.latency_s == 0.02);
}

TEST_CASE("phantom scenario: frozen regression values") {
    // Reference values computed with the direct-summation oracle.
    const auto r = run_simulation(phantom());
    REQUIRE(r.on.has_value());
    CHECK(r.riro.achieved_std_hz == doctest::Approx(1.2).epsilon(0.01 / 1.2));
    CHECK(r.riro.riro_max_hz.values.maxCoeff() == doctest::Approx(12.0));
    CHECK(r.off.metrics[0].psg == doctest::Approx(24.07529719763696).epsilon(1e-9));
    CHECK(r.on->metrics[0].psg == doctest::Approx(2.5643269282919503).epsilon(1e-9));
    CHECK(r.off.metrics[0].psg > r.on->metrics[0].psg);

    const auto sweep = run_sweep(phantom(), {1.2});
    CHECK(sweep.rows[0].relative_reduction == doctest::Approx(0.8934872160770815).epsilon(1e-9));
}

TEST_CASE("zero RIRO: no ghosting, correction on/off identical") {
    auto cfg = phantom();
    cfg.riro_peak_hz = 0.0;
    cfg.riro_target_std_hz = 0.0;
    cfg.te_ms = {5.0, 15.0};
    const auto r = run_simulation(cfg);
    for (std::size_t e = 0; e < 2; ++e) {
        CHECK(r.off.metrics[e].psg < 1e-9);
        CHECK(r.off.metrics[e].psg == r.on->metrics[e].psg);
        CHECK(r.off.magnitudes[e].values == r.on->magnitudes[e].values);
        CHECK((r.off.magnitudes[e].values - r.rho.values).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("latency and pressure noise are honoured") {
    auto cfg = phantom();
    cfg.latency_s = 0.3;
    cfg.pressure_noise_std = 0.02;
    const auto r = run_simulation(cfg);
    CHECK(r.trace.start_time_s <= -0.3);
    CHECK(r.controller.log.front().pressure == sample_pressure(r.trace, 0.0, 0.3));
    // Still a clear improvement, but worse than the ideal loop.
    CHECK(r.on->mean_psg() < r.off.mean_psg());
    CHECK(r.on->mean_psg() > run_simulation(phantom()).on->mean_psg());
}

TEST_CASE("sweep: undefined rows, failures and csv") {
    auto cfg = phantom();
    cfg.riro_peak_hz = 0.0;
    const auto zero = run_sweep(cfg, {0.0});
    REQUIRE(zero.rows.size() == 1);
    CHECK(zero.rows[0].status == "undefined");
    CHECK(std::isnan(zero.rows[0].relative_reduction));
    CHECK(sweep_csv(zero).find(",nan,undefined\n") != std::string::npos);

    const auto fail = run_sweep(phantom(), {0.5, 2.1, 1.0});
    CHECK(fail.failed);
    REQUIRE(fail.rows.size() == 2);
    CHECK(fail.rows[0].status == "ok");
    CHECK(fail.rows[1].status == "calibration_failed");

    const auto ok = run_sweep(phantom(), {1.0, 0.25});
    CHECK_FALSE(ok.failed);
    CHECK(ok.rows[0].std_hz == 1.0);
    CHECK(ok.rows[1].relative_reduction > ok.rows[0].relative_reduction);
    CHECK(sweep_csv(ok).rfind("std,psg_off,psg_on,relative_reduction,status\n", 0) == 0);
}

TEST_CASE("training: noiseless recovery and noisy standard errors") {
    auto cfg = phantom();
    const auto clean = run_training(cfg);
    CHECK(clean.plan.entries.size() == 40);
    CHECK(clean.max_abs_error() < 1e-6);

    cfg.train_noise_hz = 0.8;
    cfg.seed = 5;
    const auto noisy = run_training(cfg);
    int inside = 0;
    for (const auto& q : noisy.quality) {
        CHECK(q.rigo_max_se > 0.0);
        inside += std::abs(q.rigo_max_error) <= 3 * q.rigo_max_se;
        inside += std::abs(q.gz_static_error) <= 3 * q.gz_static_se;
    }
    CHECK(inside >= 76); // of 80; expected ~79.8
}

TEST_CASE("outputs are byte-identical across reruns") {
    auto cfg = phantom();
    cfg.pressure_noise_std = 0.05;
    cfg.te_ms = {10.0, 20.0};
    const auto a = scratch("det_a"), b = scratch("det_b");
    write_simulation(run_simulation(cfg), a);
    write_simulation(run_simulation(cfg), b);
    const auto ta = scratch("det_train_a"), tb = scratch("det_train_b");
    write_training(run_training(cfg), ta);
    write_training(run_training(cfg), tb);
    const auto ca = dir_contents(a), cb = dir_contents(b);
    CHECK(ca.size() == 9);
    CHECK(ca == cb);
    CHECK(dir_contents(ta).size() == 4);
    CHECK(dir_contents(ta) == dir_contents(tb));

    cfg.seed = 2;
    const auto c = scratch("det_c");
    write_simulation(run_simulation(cfg), c);
    CHECK(dir_contents(c).at("pressure.csv") != ca.at("pressure.csv"));
}

TEST_CASE("simulation outputs decode and feed back") {
    const auto dir = scratch("outputs");
    const auto r = run_simulation(phantom());
    write_simulation(r, dir);
    const auto img = io::decode_pgm(io::read_file(dir / "magnitude_off_echo1.pgm"));
    CHECK(img.values.rows() == 56);
    CHECK(img.values.cols() == 128);
    // 16-bit quantisation keeps the metric to ~1e-4 relative.
    CHECK(psg(ScalarField2D(img.values, {}), r.ghost_masks) == doctest::Approx(r.off.metrics[0].psg).epsilon(1e-3));
    const auto manifest = parse_config(io::read_file(dir / "manifest.cfg"));
    CHECK(to_config_text(manifest) == to_config_text(r.config));
}

TEST_CASE("shim plan file drives the simulation") {
    const auto dir = scratch("plan");
    auto cfg = phantom();
    write_training(run_training(cfg), dir);
    const auto internal = run_simulation(cfg);
    cfg.shim_plan = (dir / "shim_plan.txt").string();
    const auto external = run_simulation(cfg);
    CHECK(external.controller.log.back().gz_hz_per_mm == internal.controller.log.back().gz_hz_per_mm);
    cfg.shim_plan = (dir / "missing.txt").string();
    CHECK_THROWS_AS(run_simulation(cfg), ConfigError);
}

TEST_CASE("command-line exit codes") {
    const auto dir = scratch("cli");
    const std::string cfg = std::string("--config \"") + DRTZ_CONFIG_DIR + "/phantom.cfg\" --out \"" + dir.string() + "\"";
    CHECK(cli("simulate " + cfg) == 0);
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(cli("train " + cfg) == 0);
    CHECK(fs::exists(dir / "shim_plan.txt"));
    CHECK(cli("sweep " + cfg + " --std-list 0.5,1.0") == 0);
    CHECK(cli("sweep " + cfg + " --std-list 1.0,2.1") == 3);
    CHECK(cli("sweep " + cfg + " --std-list 1.0,x") == 2);
    CHECK(cli("simulate --config /nonexistent.cfg") == 2);
    CHECK(cli("frobnicate") == 2);

    std::ofstream(dir / "bad.cfg") << "nx = 64\nwhat = 1\n";
    CHECK(cli("simulate --config \"" + (dir / "bad.cfg").string() + "\"") == 2);

    // psg on the written magnitude with an explicit object mask.
    const auto r = run_simulation(phantom());
    const auto obj = dir / "object.pgm";
    io::write_file_atomic(obj, io::encode_pgm16(r.object.values.cast<double>().matrix(), 1.0));
    const std::string img = (dir / "magnitude_off_echo1.pgm").string();
    const auto out = dir / "psg.txt";
    CHECK(cli_to("psg --image \"" + img + "\" --object \"" + obj.string() + "\"", out) == 0);
    CHECK(std::stod(io::read_file(out)) == doctest::Approx(r.off.metrics[0].psg).epsilon(1e-3));
    CHECK(cli("psg --image \"" + img + "\" --object \"" + img + "\"") == 3); // mask touches the edges
    CHECK(cli("psg --image \"" + img + "\" --object \"" + obj.string() + "\" --above \"" + obj.string() + "\"") == 2);
    CHECK(cli("psg --image \"" + img + "\"") == 2);
}
