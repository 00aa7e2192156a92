#ifndef COHART_PIPELINE_HPP
#define COHART_PIPELINE_HPP

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cohart/config.hpp"
#include "cohart/frame.hpp"
#include "cohart/mask.hpp"
#include "cohart/mle.hpp"
#include "cohart/simulate.hpp"
#include "cohart/spot.hpp"
#include "cohart/stitch.hpp"

namespace cohart {

namespace fs = std::filesystem;

namespace detail {

// Atomic file write: write-temp, rename.
inline void write_text_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot open output file: " + tmp.string());
        out << content;
        if (!out) throw DataError("failed writing output file: " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline void write_frame_atomic(const fs::path& path, const DetectorFrame& frame) {
    const fs::path tmp = path.string() + ".tmp";
    write_frame(tmp, frame);
    fs::rename(tmp, path);
}

// Source restricted to a subset of plan points. For explicit matrices
// this takes the principal submatrix; the vcz model is position based
// and needs no restriction.
inline SourceModel source_for_points(const SourceModel& source, const std::vector<int>& indices) {
    if (source.kind != SourceModel::Kind::explicit_rho) return source;
    const Matrix& full = source.rho->matrix();
    Matrix sub(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(indices.size()));
    for (size_t a = 0; a < indices.size(); ++a)
        for (size_t b = 0; b < indices.size(); ++b)
            sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                full(indices[a], indices[b]);
    SourceModel out = source;
    out.rho = CoherenceMatrix::from_matrix(std::move(sub));
    return out;
}

inline json spot_to_json(const SpotEstimate& s) {
    return {{"centroid_m", s.centroid},
            {"refined_position_m", s.refined_position},
            {"deflection_sin", s.deflection_sin},
            {"residual_rmse", s.residual_rmse},
            {"roi", json::array({s.roi.begin, s.roi.end})},
            {"converged", s.converged}};
}

inline json result_to_json(int i, int j, const ReconstructionResult& r) {
    json spots = json::array();
    for (const auto& s : r.refined_spots) spots.push_back(spot_to_json(s));
    return {{"pair", json::array({i, j})},
            {"rho_hat", matrix_to_json(r.rho_hat)},
            {"intensity_scale", r.intensity_scale},
            {"log_likelihood", r.log_likelihood},
            {"iterations_used", r.iterations_used},
            {"converged", r.converged},
            {"refined_spots", spots}};
}

inline json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

} // namespace detail

// Per-frame noise seeds derive from the master seed as seed_i = master ^ i,
// with calibration frame i numbered i and the k-th pair frame N + k.
inline uint64_t frame_seed(uint64_t master, int frame_index) {
    return master ^ static_cast<uint64_t>(frame_index);
}

inline std::string cal_frame_name(int i) { return "cal_" + std::to_string(i) + ".frame"; }
inline std::string pair_frame_name(int i, int j) {
    return "pair_" + std::to_string(i) + "_" + std::to_string(j) + ".frame";
}
inline std::string pair_result_name(int i, int j) {
    return "pair_" + std::to_string(i) + "_" + std::to_string(j) + ".result.json";
}

// Writes one calibration frame per plan point, one joint frame per plan
// pair, and a manifest describing them. Deterministic for a fixed
// (config, seed).
inline json run_simulate(const ExperimentConfig& cfg, const fs::path& outdir) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (!fs::is_directory(outdir))
        throw DataError("cannot create output directory " + outdir.string());

    const auto apertures = cfg.plan.apertures(cfg.geometry);
    const int n = static_cast<int>(apertures.size());
    const int width = cfg.plan.aperture_width_mirrors;

    std::vector<double> centers;
    for (const auto& a : apertures) centers.push_back(a.first);
    const SamplingPlan plan = plan_pairs(centers, apertures.front().second);

    json manifest;
    manifest["config"] = serialize_config(cfg);
    // the manifest lives inside the output directory; recording the
    // runtime path would break byte-identical reruns into fresh dirs
    manifest["config"].erase("output_dir");
    manifest["points"] = json::array();
    manifest["pairs"] = json::array();

    for (int i = 0; i < n; ++i) {
        const MaskPattern mask =
            MaskPattern::from_runs({{cfg.plan.points_mirrors[static_cast<size_t>(i)], width}},
                                   cfg.plan.grid_size);
        const uint64_t seed = frame_seed(cfg.seed, i);
        const SourceModel src = detail::source_for_points(cfg.source, {i});
        DetectorFrame frame =
            simulate_frame(src, mask, cfg.geometry, cfg.photons_per_frame, seed, cfg.noise);
        frame.mask_id = "cal_" + std::to_string(i);
        detail::write_frame_atomic(outdir / cal_frame_name(i), frame);
        manifest["points"].push_back({{"index", i},
                                      {"start_mirror", cfg.plan.points_mirrors[static_cast<size_t>(i)]},
                                      {"center_m", apertures[static_cast<size_t>(i)].first},
                                      {"width_m", apertures[static_cast<size_t>(i)].second},
                                      {"frame", cal_frame_name(i)},
                                      {"seed", seed}});
    }
    for (size_t k = 0; k < plan.pairs.size(); ++k) {
        const auto [i, j] = plan.pairs[k];
        const MaskPattern mask = MaskPattern::from_runs(
            {{cfg.plan.points_mirrors[static_cast<size_t>(i)], width},
             {cfg.plan.points_mirrors[static_cast<size_t>(j)], width}},
            cfg.plan.grid_size);
        const uint64_t seed = frame_seed(cfg.seed, n + static_cast<int>(k));
        const SourceModel src = detail::source_for_points(cfg.source, {i, j});
        DetectorFrame frame =
            simulate_frame(src, mask, cfg.geometry, cfg.photons_per_frame, seed, cfg.noise);
        frame.mask_id = "pair_" + std::to_string(i) + "_" + std::to_string(j);
        detail::write_frame_atomic(outdir / pair_frame_name(i, j), frame);
        manifest["pairs"].push_back(
            {{"i", i}, {"j", j}, {"frame", pair_frame_name(i, j)}, {"seed", seed}});
    }
    detail::write_text_atomic(outdir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

inline json load_manifest(const fs::path& manifest_path) {
    if (!fs::exists(manifest_path)) throw DataError("manifest not found: " + manifest_path.string());
    return detail::load_json(manifest_path);
}

// Hartmann sensing step: spot estimates for every calibration frame.
inline json run_calibrate(const fs::path& manifest_path) {
    const json manifest = load_manifest(manifest_path);
    const fs::path dir = manifest_path.parent_path();
    const ExperimentConfig cfg = parse_config(manifest.at("config"));

    json spots = json::array();
    for (const json& point : manifest.at("points")) {
        const fs::path frame_path = dir / point.at("frame").get<std::string>();
        if (!fs::exists(frame_path))
            throw DataError("manifest references missing frame " + frame_path.string());
        const DetectorFrame frame = read_frame(frame_path);
        const Aperture aperture{point.at("center_m").get<double>(),
                                point.at("width_m").get<double>()};
        const PixelRange roi = default_roi(frame, cfg.geometry, aperture.second);
        const double bg = background_level(frame, roi);
        const double cog = cog_centroid(frame, roi, bg);
        SpotEstimate est = refine_spot(frame, cfg.geometry, aperture, cog);
        est.centroid = cog;
        json rec = detail::spot_to_json(est);
        rec["point"] = point.at("index");
        spots.push_back(rec);
    }
    detail::write_text_atomic(dir / "spots.json", spots.dump(2) + "\n");
    return spots;
}

// ML reconstruction step: one result per plan pair, dispatched to a
// bounded worker pool. Output is independent of the worker count.
inline bool run_reconstruct(const fs::path& manifest_path, int workers = 1) {
    const json manifest = load_manifest(manifest_path);
    const fs::path dir = manifest_path.parent_path();
    const ExperimentConfig cfg = parse_config(manifest.at("config"));
    const json& pairs = manifest.at("pairs");
    const json& points = manifest.at("points");

    std::vector<json> results(pairs.size());
    std::vector<std::string> failures(pairs.size());
    std::atomic<size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= pairs.size()) return;
            const json& pr = pairs.at(k);
            const int i = pr.at("i").get<int>();
            const int j = pr.at("j").get<int>();
            try {
                std::vector<DetectorFrame> cal;
                std::vector<Aperture> apertures;
                for (int idx : {i, j}) {
                    const json& point = points.at(static_cast<size_t>(idx));
                    cal.push_back(read_frame(dir / point.at("frame").get<std::string>()));
                    apertures.emplace_back(point.at("center_m").get<double>(),
                                           point.at("width_m").get<double>());
                }
                const DetectorFrame joint = read_frame(dir / pr.at("frame").get<std::string>());
                const ReconstructionResult r =
                    reconstruct_pair(cal, joint, apertures, cfg.geometry, cfg.ml);
                results[k] = detail::result_to_json(i, j, r);
            } catch (const Error& e) {
                failures[k] = "pair (" + std::to_string(i) + ", " + std::to_string(j) + "): " +
                              e.what();
            }
        }
    };
    workers = std::max(1, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures)
        if (!f.empty()) throw DataError(f);

    bool all_converged = true;
    for (size_t k = 0; k < pairs.size(); ++k) {
        const int i = pairs.at(k).at("i").get<int>();
        const int j = pairs.at(k).at("j").get<int>();
        detail::write_text_atomic(dir / pair_result_name(i, j), results[k].dump(2) + "\n");
        if (!results[k].at("converged").get<bool>()) all_converged = false;
    }
    return all_converged;
}

// Stitching + van Cittert-Zernike fit: assembles the N x N mutual
// intensity, the degree-of-coherence table, and the core-diameter fit
// report.
inline json run_stitch_fit(const fs::path& dir) {
    const json manifest = load_manifest(dir / "manifest.json");
    const ExperimentConfig cfg = parse_config(manifest.at("config"));
    const json& points = manifest.at("points");
    const int n = static_cast<int>(points.size());

    std::vector<double> intensities;
    std::vector<double> centers;
    for (const json& point : points) {
        const DetectorFrame frame = read_frame(dir / point.at("frame").get<std::string>());
        intensities.push_back(frame.total_counts());
        centers.push_back(point.at("center_m").get<double>());
    }

    std::map<std::pair<int, int>, ReconstructionResult> pair_results;
    for (const json& pr : manifest.at("pairs")) {
        const int i = pr.at("i").get<int>();
        const int j = pr.at("j").get<int>();
        const fs::path rp = dir / pair_result_name(i, j);
        if (!fs::exists(rp))
            throw DataError("incomplete results: missing " + rp.string());
        const json rj = detail::load_json(rp);
        ReconstructionResult r;
        r.rho_hat = json_to_matrix(rj.at("rho_hat"));
        r.converged = rj.at("converged").get<bool>();
        pair_results[{i, j}] = r;
    }

    const StitchedMatrix stitched = stitch(pair_results, intensities);

    double max_imag = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            max_imag = std::max(max_imag, std::abs(stitched.J(i, j).imag()));

    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            samples.emplace_back(std::abs(centers[static_cast<size_t>(j)] -
                                          centers[static_cast<size_t>(i)]),
                                 std::abs(stitched.mu(i, j)));
    const CoreDiameterFit fit =
        fit_core_diameter(samples, cfg.geometry.wavelength, cfg.source.collimator_focal);

    json report;
    report["J"] = matrix_to_json(stitched.J);
    report["mu"] = matrix_to_json(stitched.mu);
    report["psd_projection_distance"] = stitched.psd_projection_distance;
    report["consistent"] = stitched.consistent;
    report["max_abs_imag_J"] = max_imag;
    json residuals = json::array();
    json sample_rows = json::array();
    for (const auto& [sep, mu] : samples) {
        const double model = vcz_mu(fit.w_hat, cfg.geometry.wavelength,
                                    cfg.source.collimator_focal, sep);
        residuals.push_back(mu - model);
        sample_rows.push_back({{"separation_m", sep}, {"mu_abs", mu}});
    }
    report["fit"] = {{"w_hat_m", fit.w_hat}, {"rss", fit.rss}, {"residuals", residuals}};
    report["samples"] = sample_rows;
    detail::write_text_atomic(dir / "stitched.json", report.dump(2) + "\n");

    {
        std::ostringstream csv;
        csv << "x_i_m,x_j_m,abs_J,arg_J,abs_mu\n";
        char buf[256];
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                              centers[static_cast<size_t>(i)], centers[static_cast<size_t>(j)],
                              std::abs(stitched.J(i, j)), std::arg(stitched.J(i, j)),
                              std::abs(stitched.mu(i, j)));
                csv << buf;
            }
        detail::write_text_atomic(dir / "stitched.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "separation_m,abs_mu_measured,abs_mu_fit\n";
        char buf[256];
        for (const auto& [sep, mu] : samples) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", sep, mu,
                          vcz_mu(fit.w_hat, cfg.geometry.wavelength, cfg.source.collimator_focal,
                                 sep));
            csv << buf;
        }
        detail::write_text_atomic(dir / "mu_vs_separation.csv", csv.str());
    }
    return report;
}

// Full pipeline. Returns true when every pair reconstruction converged.
inline bool run_all(const ExperimentConfig& cfg, const fs::path& outdir, int workers = 1) {
    run_simulate(cfg, outdir);
    run_calibrate(outdir / "manifest.json");
    const bool converged = run_reconstruct(outdir / "manifest.json", workers);
    run_stitch_fit(outdir);
    return converged;
}

} // namespace cohart

#endif
