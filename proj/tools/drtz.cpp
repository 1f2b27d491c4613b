// drtz: dynamic realtime z-shim simulator and planning tool.
//
//   drtz simulate --config phantom.cfg [--out DIR] [--seed N]
//   drtz sweep    --config invivo.cfg --std-list "0.5,1.0,2.1" [--out DIR] [--seed N]
//   drtz train    --config phantom.cfg [--out DIR] [--seed N]
//   drtz psg      --image IMG.pgm --object OBJ.pgm [--above A.pgm --below B.pgm] [--pe-axis rows|cols]
//
// Exit status: 0 success, 2 configuration error, 3 numerical/calibration failure.

#include "drtz/io.hpp"
#include "drtz/metrics.hpp"
#include "drtz/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

drtz::ScenarioConfig resolve(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed) {
    auto cfg = drtz::load_config(path);
    if (!out.empty()) cfg.output_dir = out;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
}

std::vector<double> parse_std_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw drtz::ConfigError("--std-list", 0, "invalid value '" + item + "'");
        }
    }
    if (out.empty()) throw drtz::ConfigError("--std-list", 0, "empty list");
    for (double v : out)
        if (!(v >= 0.0)) throw drtz::ConfigError("--std-list", 0, "std values must be non-negative");
    return out;
}

drtz::Mask2D load_mask(const std::string& path) {
    const auto g = drtz::io::decode_pgm(drtz::io::read_file(path));
    return drtz::Mask2D((g.values.array() > 0.0).eval());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic realtime z-shimming simulator"};
    app.set_version_flag("--version", drtz::kToolVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir, std_list;
    std::optional<std::uint64_t> seed;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Scenario configuration file")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "Random seed (overrides seed)");
    };

    auto* simulate = app.add_subcommand("simulate", "Simulate acquisitions with correction off/on");
    add_common(simulate);
    auto* sweep = app.add_subcommand("sweep", "PSG reduction versus in-plane RIRO standard deviation");
    add_common(sweep);
    sweep->add_option("--std-list", std_list, "Comma-separated std values in Hz")->required();
    auto* train = app.add_subcommand("train", "Run the synthetic training session and export a shim plan");
    add_common(train);

    std::string image_path, object_path, above_path, below_path, pe_axis = "rows";
    auto* psg_cmd = app.add_subcommand("psg", "Percent signal ghosting of an image");
    psg_cmd->add_option("--image", image_path, "Magnitude image (PGM)")->required();
    psg_cmd->add_option("--object", object_path, "Object mask (PGM, nonzero = inside)")->required();
    psg_cmd->add_option("--above", above_path, "Ghost ROI above the object (PGM)");
    psg_cmd->add_option("--below", below_path, "Ghost ROI below the object (PGM)");
    psg_cmd->add_option("--pe-axis", pe_axis, "Phase-encode axis")->check(CLI::IsMember({"rows", "cols"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) {
            const auto cfg = resolve(config_path, out_dir, seed);
            const auto result = drtz::run_simulation(cfg);
            drtz::write_simulation(result, cfg.output_dir);
            std::cout << "condition,echo,psg\n";
            for (std::size_t e = 0; e < result.off.metrics.size(); ++e) {
                std::cout << "off," << e + 1 << ',' << result.off.metrics[e].psg << '\n';
                if (result.on) std::cout << "on," << e + 1 << ',' << result.on->metrics[e].psg << '\n';
            }
        } else if (*sweep) {
            const auto cfg = resolve(config_path, out_dir, seed);
            const auto stds = parse_std_list(std_list);
            const auto result = drtz::run_sweep(cfg, stds);
            std::filesystem::create_directories(cfg.output_dir);
            const auto csv = drtz::sweep_csv(result);
            drtz::io::write_file_atomic(std::filesystem::path(cfg.output_dir) / "sweep.csv", csv);
            drtz::io::write_file_atomic(std::filesystem::path(cfg.output_dir) / "manifest.cfg",
                                        drtz::to_config_text(cfg) + "# std_list = " + std_list + "\n");
            std::cout << csv;
            if (result.failed) {
                std::cerr << "drtz: sweep aborted: " << result.failure << '\n';
                return kExitNumerical;
            }
        } else if (*train) {
            const auto cfg = resolve(config_path, out_dir, seed);
            const auto result = drtz::run_training(cfg);
            drtz::write_training(result, cfg.output_dir);
            std::cout << "slices=" << result.plan.entries.size() << " max_abs_error_hz_per_mm=" << result.max_abs_error()
                      << '\n';
        } else if (*psg_cmd) {
            const auto image = drtz::io::decode_pgm(drtz::io::read_file(image_path));
            const auto axis = pe_axis == "rows" ? drtz::Axis::Rows : drtz::Axis::Cols;
            drtz::GhostMetricMasks masks;
            if (above_path.empty() != below_path.empty())
                throw drtz::ConfigError("psg", 0, "--above and --below must be given together");
            if (above_path.empty())
                masks = drtz::auto_ghost_masks(load_mask(object_path), axis);
            else
                masks = {load_mask(object_path), load_mask(above_path), load_mask(below_path)};
            const drtz::ScalarField2D mag(image.values, {});
            std::cout << drtz::io::format_double(drtz::psg(mag, masks)) << '\n';
        }
    } catch (const drtz::ConfigError& e) {
        std::cerr << "drtz: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const drtz::Error& e) {
        std::cerr << "drtz: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "drtz: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
