// Command-line front end for the DMD Hartmann coherence sampling
// pipeline: simulate frames, calibrate spots, reconstruct pairwise
// coherence matrices, stitch and fit the source diameter.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cohart/cohart.hpp"

namespace fs = std::filesystem;

namespace {

cohart::ExperimentConfig load_config(const std::string& path,
                                     std::optional<uint64_t> seed_override,
                                     std::optional<std::string> out_override, bool no_noise) {
    std::ifstream in(path);
    if (!in) throw cohart::ConfigError("cannot open config file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw cohart::ConfigError("malformed config " + path + ": " + e.what());
    }
    cohart::ExperimentConfig cfg = cohart::parse_config(doc);
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.output_dir = *out_override;
    if (no_noise) cfg.noise = false;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DMD Hartmann spatial-coherence sampling pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string manifest_path;
    std::string results_dir;
    std::optional<uint64_t> seed;
    std::optional<std::string> out_dir;
    bool no_noise = false;
    int workers = 1;

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON")->required();
        cmd->add_option("--seed", seed, "override the master seed");
        cmd->add_option("--out", out_dir, "override the output directory");
        cmd->add_flag("--no-noise", no_noise, "disable photon noise");
    };

    CLI::App* c_sim = app.add_subcommand("simulate", "generate calibration and pair frames");
    add_config_opts(c_sim);

    CLI::App* c_cal = app.add_subcommand("calibrate", "locate spot centroids on calibration frames");
    c_cal->add_option("manifest", manifest_path, "path to manifest.json")->required();

    CLI::App* c_rec = app.add_subcommand("reconstruct", "ML-reconstruct every aperture pair");
    c_rec->add_option("manifest", manifest_path, "path to manifest.json")->required();
    c_rec->add_option("--workers", workers, "worker threads for pair-level parallelism");

    CLI::App* c_fit = app.add_subcommand("stitch-fit", "stitch the coherence matrix and fit the source diameter");
    c_fit->add_option("dir", results_dir, "directory holding manifest and pair results")->required();

    CLI::App* c_all = app.add_subcommand("run-all", "full pipeline: simulate, calibrate, reconstruct, stitch-fit");
    add_config_opts(c_all);
    c_all->add_option("--workers", workers, "worker threads for pair-level parallelism");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_sim->parsed()) {
            const auto cfg = load_config(config_path, seed, out_dir, no_noise);
            cohart::run_simulate(cfg, cfg.output_dir);
            std::cout << "wrote frames and manifest to " << cfg.output_dir << "\n";
        } else if (c_cal->parsed()) {
            cohart::run_calibrate(manifest_path);
            std::cout << "wrote spots.json next to " << manifest_path << "\n";
        } else if (c_rec->parsed()) {
            const bool converged = cohart::run_reconstruct(manifest_path, workers);
            std::cout << "wrote pair results next to " << manifest_path << "\n";
            if (!converged) throw cohart::ConvergenceError("one or more pair reconstructions did not converge");
        } else if (c_fit->parsed()) {
            const nlohmann::json report = cohart::run_stitch_fit(results_dir);
            std::cout << "fitted core diameter: " << report.at("fit").at("w_hat_m").get<double>() * 1e6
                      << " um (rss " << report.at("fit").at("rss").get<double>() << ")\n"
                      << "max |Im J|: " << report.at("max_abs_imag_J").get<double>() << "\n";
        } else if (c_all->parsed()) {
            const auto cfg = load_config(config_path, seed, out_dir, no_noise);
            const bool converged = cohart::run_all(cfg, cfg.output_dir, workers);
            std::cout << "pipeline artifacts in " << cfg.output_dir << "\n";
            if (!converged) throw cohart::ConvergenceError("one or more pair reconstructions did not converge");
        }
    } catch (const cohart::Error& e) {
        std::cerr << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "E_INTERNAL: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
