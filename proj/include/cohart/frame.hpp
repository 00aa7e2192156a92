#ifndef COHART_FRAME_HPP
#define COHART_FRAME_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cohart/errors.hpp"

namespace cohart {

// One 1-D detector exposure: nonnegative photon counts per pixel plus
// the metadata needed to interpret them standalone.
struct DetectorFrame {
    std::vector<double> counts;
    double exposure_photons = 0.0;
    std::string mask_id;
    std::optional<uint64_t> noise_seed;
    double pixel_pitch = 0.0;  // meters
    double origin = 0.0;       // position of pixel 0 center (m)

    int pixel_count() const { return static_cast<int>(counts.size()); }
    double pixel_position(int p) const { return origin + p * pixel_pitch; }

    double total_counts() const {
        double s = 0.0;
        for (double c : counts) s += c;
        return s;
    }

    void validate() const {
        for (double c : counts)
            if (c < 0) throw DataError("negative count in detector frame");
    }
};

// Frame file format: first line a JSON header, then one count per line
// in pixel order. Round-trips losslessly.
inline void write_frame(const std::filesystem::path& path, const DetectorFrame& frame) {
    nlohmann::json header = {
        {"pixel_count", frame.pixel_count()},
        {"pixel_pitch_m", frame.pixel_pitch},
        {"origin_m", frame.origin},
        {"exposure_photons", frame.exposure_photons},
        {"mask", frame.mask_id},
        {"seed", frame.noise_seed ? nlohmann::json(*frame.noise_seed) : nlohmann::json(nullptr)},
    };
    std::ofstream out(path);
    if (!out) throw DataError("cannot open frame file for writing: " + path.string());
    out << header.dump() << '\n';
    char buf[64];
    for (double c : frame.counts) {
        std::snprintf(buf, sizeof(buf), "%.17g", c);
        out << buf << '\n';
    }
    if (!out) throw DataError("failed writing frame file: " + path.string());
}

inline DetectorFrame read_frame(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open frame file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty frame file: " + path.string());
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad frame header in " + path.string() + ": " + e.what());
    }
    DetectorFrame frame;
    try {
        frame.pixel_pitch = header.at("pixel_pitch_m").get<double>();
        frame.origin = header.at("origin_m").get<double>();
        frame.exposure_photons = header.at("exposure_photons").get<double>();
        frame.mask_id = header.at("mask").get<std::string>();
        if (!header.at("seed").is_null())
            frame.noise_seed = header.at("seed").get<uint64_t>();
        const int n = header.at("pixel_count").get<int>();
        frame.counts.reserve(static_cast<size_t>(n));
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            frame.counts.push_back(std::stod(line));
        }
        if (frame.pixel_count() != n)
            throw DataError("frame " + path.string() + " has " +
                            std::to_string(frame.pixel_count()) + " counts, header says " +
                            std::to_string(n));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad frame header in " + path.string() + ": " + e.what());
    }
    frame.validate();
    return frame;
}

} // namespace cohart

#endif
