#ifndef COHART_GEOMETRY_HPP
#define COHART_GEOMETRY_HPP

#include <numbers>
#include <vector>

#include "cohart/errors.hpp"

namespace cohart {

// Physical layout of the DMD Hartmann sensor. All lengths in meters,
// angles in radians.
struct SensorGeometry {
    double wavelength = 633e-9;
    double detector_distance = 0.18;       // DMD to camera
    double mirror_width = 7.2e-6;          // micromirror active width
    double mirror_pitch = 7.6e-6;          // micromirror spacing
    double incidence_angle = 24.0 * std::numbers::pi / 180.0;
    double deflection_angle = 12.0 * std::numbers::pi / 180.0; // nominal reflected direction
    double detector_pixel_pitch = 16e-6;
    int detector_pixel_count = 1280;
    double detector_origin = 0.0;          // position of pixel 0 center

    double wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }

    double pixel_position(int p) const {
        return detector_origin + p * detector_pixel_pitch;
    }

    std::vector<double> pixel_positions() const {
        std::vector<double> xs(static_cast<size_t>(detector_pixel_count));
        for (int p = 0; p < detector_pixel_count; ++p) xs[static_cast<size_t>(p)] = pixel_position(p);
        return xs;
    }

    // Characteristic half-width of a single-aperture spot for aperture
    // width a, from the sinc envelope scale of the forward model.
    double spot_scale(double aperture_width) const {
        return wavelength * detector_distance / aperture_width;
    }

    void validate() const {
        if (wavelength <= 0 || detector_distance <= 0 || mirror_width <= 0 ||
            mirror_pitch <= 0 || detector_pixel_pitch <= 0)
            throw ConfigError("geometry lengths must be strictly positive");
        if (mirror_width > mirror_pitch)
            throw ConfigError("mirror_width must not exceed mirror_pitch");
        if (detector_pixel_count < 2)
            throw ConfigError("detector_pixel_count must be >= 2");
    }
};

// Centers the detector on a given field position.
inline void center_detector(SensorGeometry& g, double center = 0.0) {
    g.detector_origin = center - 0.5 * (g.detector_pixel_count - 1) * g.detector_pixel_pitch;
}

} // namespace cohart

#endif
