#ifndef COHART_CONFIG_HPP
#define COHART_CONFIG_HPP

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cohart/basis.hpp"
#include "cohart/coherence.hpp"
#include "cohart/errors.hpp"
#include "cohart/geometry.hpp"
#include "cohart/mle.hpp"
#include "cohart/source.hpp"
#include "cohart/units.hpp"

namespace cohart {

using json = nlohmann::json;

inline double length_field(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_length(v.get<std::string>());
    throw ConfigError("field '" + key + "' must be a number (meters) or a unit string");
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(row);
    }
    return rows;
}

inline Matrix json_to_matrix(const json& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) throw ConfigError("matrix field is empty");
    Matrix m(n, static_cast<Eigen::Index>(rows.at(0).size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = rows.at(static_cast<size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != m.cols())
            throw ConfigError("matrix field has ragged rows");
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const json& c = row.at(static_cast<size_t>(j));
            m(i, j) = std::complex<double>(c.at(0).get<double>(), c.at(1).get<double>());
        }
    }
    return m;
}

// DMD addressing plan: each sampling point is the starting mirror index
// of a run of aperture_width_mirrors open mirrors.
struct PlanConfig {
    std::vector<int> points_mirrors = {482, 502, 522, 542};
    int aperture_width_mirrors = 10;
    int grid_size = 1024;

    void validate() const {
        if (points_mirrors.size() < 2) throw ConfigError("plan needs at least two points");
        if (aperture_width_mirrors < 1) throw ConfigError("aperture width must be >= 1 mirror");
        if (grid_size < 2) throw ConfigError("plan grid_size must be >= 2");
        for (size_t i = 0; i < points_mirrors.size(); ++i) {
            const int s = points_mirrors[i];
            if (s < 0 || s + aperture_width_mirrors > grid_size)
                throw ConfigError("plan point " + std::to_string(i) + " falls off the DMD grid");
            if (i > 0 && s < points_mirrors[i - 1] + aperture_width_mirrors)
                throw ConfigError("plan apertures overlap or are out of order");
        }
    }

    std::vector<Aperture> apertures(const SensorGeometry& g) const {
        std::vector<Aperture> out;
        for (int s : points_mirrors) {
            const double center =
                (s + 0.5 * aperture_width_mirrors - 0.5 * grid_size) * g.mirror_pitch;
            out.emplace_back(center, aperture_width_mirrors * g.mirror_pitch);
        }
        return out;
    }
};

struct ExperimentConfig {
    SensorGeometry geometry;
    SourceModel source;
    PlanConfig plan;
    double photons_per_frame = 1e6;
    uint64_t seed = 1;
    bool noise = true;
    MlConfig ml;
    std::string output_dir = "out";

    void validate() const {
        geometry.validate();
        source.validate();
        plan.validate();
        ml.validate();
        if (!(photons_per_frame > 0)) throw ConfigError("photons_per_frame must be positive");
    }
};

inline ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    try {
        if (doc.contains("geometry")) {
            const json& g = doc.at("geometry");
            SensorGeometry& geo = cfg.geometry;
            geo.wavelength = length_field(g, "wavelength", geo.wavelength);
            geo.detector_distance = length_field(g, "detector_distance", geo.detector_distance);
            geo.mirror_width = length_field(g, "mirror_width", geo.mirror_width);
            geo.mirror_pitch = length_field(g, "mirror_pitch", geo.mirror_pitch);
            if (g.contains("incidence_angle_deg"))
                geo.incidence_angle =
                    g.at("incidence_angle_deg").get<double>() * std::numbers::pi / 180.0;
            if (g.contains("deflection_angle_deg"))
                geo.deflection_angle =
                    g.at("deflection_angle_deg").get<double>() * std::numbers::pi / 180.0;
            geo.detector_pixel_pitch =
                length_field(g, "detector_pixel_pitch", geo.detector_pixel_pitch);
            if (g.contains("detector_pixel_count"))
                geo.detector_pixel_count = g.at("detector_pixel_count").get<int>();
            if (g.contains("detector_origin"))
                geo.detector_origin = length_field(g, "detector_origin", 0.0);
            else
                center_detector(geo);
        } else {
            center_detector(cfg.geometry);
        }
        if (doc.contains("source")) {
            const json& s = doc.at("source");
            const std::string kind = s.value("kind", "vcz_circular");
            if (kind == "vcz_circular") {
                cfg.source.kind = SourceModel::Kind::vcz_circular;
                cfg.source.core_diameter =
                    length_field(s, "core_diameter", cfg.source.core_diameter);
                cfg.source.collimator_focal =
                    length_field(s, "collimator_focal", cfg.source.collimator_focal);
            } else if (kind == "explicit_rho") {
                cfg.source.kind = SourceModel::Kind::explicit_rho;
                cfg.source.rho = CoherenceMatrix::from_matrix(json_to_matrix(s.at("rho")));
            } else {
                throw ConfigError("unknown source kind '" + kind + "'");
            }
        }
        if (doc.contains("plan")) {
            const json& p = doc.at("plan");
            if (p.contains("points_mirrors"))
                cfg.plan.points_mirrors = p.at("points_mirrors").get<std::vector<int>>();
            if (p.contains("aperture_width_mirrors"))
                cfg.plan.aperture_width_mirrors = p.at("aperture_width_mirrors").get<int>();
            if (p.contains("grid_size")) cfg.plan.grid_size = p.at("grid_size").get<int>();
        }
        if (doc.contains("photons_per_frame"))
            cfg.photons_per_frame = doc.at("photons_per_frame").get<double>();
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<uint64_t>();
        if (doc.contains("noise")) cfg.noise = doc.at("noise").get<bool>();
        if (doc.contains("ml")) {
            const json& m = doc.at("ml");
            if (m.contains("max_iterations"))
                cfg.ml.max_iterations = m.at("max_iterations").get<int>();
            if (m.contains("tolerance"))
                cfg.ml.likelihood_tolerance = m.at("tolerance").get<double>();
            if (m.contains("dilution")) cfg.ml.dilution = m.at("dilution").get<double>();
            if (m.contains("min_eigenvalue_clip"))
                cfg.ml.min_eigenvalue_clip = m.at("min_eigenvalue_clip").get<double>();
            if (m.contains("outer_refinement_rounds"))
                cfg.ml.outer_refinement_rounds = m.at("outer_refinement_rounds").get<int>();
        }
        if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline json serialize_config(const ExperimentConfig& cfg) {
    json doc;
    doc["geometry"] = {
        {"wavelength", cfg.geometry.wavelength},
        {"detector_distance", cfg.geometry.detector_distance},
        {"mirror_width", cfg.geometry.mirror_width},
        {"mirror_pitch", cfg.geometry.mirror_pitch},
        {"incidence_angle_deg", cfg.geometry.incidence_angle * 180.0 / std::numbers::pi},
        {"deflection_angle_deg", cfg.geometry.deflection_angle * 180.0 / std::numbers::pi},
        {"detector_pixel_pitch", cfg.geometry.detector_pixel_pitch},
        {"detector_pixel_count", cfg.geometry.detector_pixel_count},
        {"detector_origin", cfg.geometry.detector_origin},
    };
    if (cfg.source.kind == SourceModel::Kind::vcz_circular) {
        doc["source"] = {{"kind", "vcz_circular"},
                         {"core_diameter", cfg.source.core_diameter},
                         {"collimator_focal", cfg.source.collimator_focal}};
    } else {
        doc["source"] = {{"kind", "explicit_rho"}, {"rho", matrix_to_json(cfg.source.rho->matrix())}};
    }
    doc["plan"] = {{"points_mirrors", cfg.plan.points_mirrors},
                   {"aperture_width_mirrors", cfg.plan.aperture_width_mirrors},
                   {"grid_size", cfg.plan.grid_size}};
    doc["photons_per_frame"] = cfg.photons_per_frame;
    doc["seed"] = cfg.seed;
    doc["noise"] = cfg.noise;
    doc["ml"] = {{"max_iterations", cfg.ml.max_iterations},
                 {"tolerance", cfg.ml.likelihood_tolerance},
                 {"dilution", cfg.ml.dilution},
                 {"min_eigenvalue_clip", cfg.ml.min_eigenvalue_clip},
                 {"outer_refinement_rounds", cfg.ml.outer_refinement_rounds}};
    doc["output_dir"] = cfg.output_dir;
    return doc;
}

} // namespace cohart

#endif
