#ifndef COHART_BASIS_HPP
#define COHART_BASIS_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cohart/errors.hpp"
#include "cohart/geometry.hpp"

namespace cohart {

// One rect-windowed plane-wave mode: the field transmitted by a single
// Hartmann aperture carrying a single local k vector.
struct ApertureMode {
    double center = 0.0;         // x0 on the DMD plane (m)
    double width = 0.0;          // a (m)
    double wavenumber = 0.0;     // k = 2*pi/lambda (1/m)
    double deflection_sin = 0.0; // sin(alpha) for this mode
};

struct ModeBasis {
    std::vector<ApertureMode> modes;

    int dimension() const { return static_cast<int>(modes.size()); }
};

using Aperture = std::pair<double, double>; // (center, width) in meters

// Builds the computational basis: one mode per aperture, all at the
// quasi-monochromatic wavenumber, with per-aperture deflection sines.
inline ModeBasis build_mode_basis(std::span<const Aperture> apertures,
                                  const SensorGeometry& geometry,
                                  std::span<const double> deflection_sins) {
    if (apertures.empty())
        throw DomainError("mode basis needs at least one aperture");
    if (deflection_sins.size() != apertures.size())
        throw DomainError("need exactly one deflection per aperture");
    ModeBasis basis;
    basis.modes.reserve(apertures.size());
    const double k = geometry.wavenumber();
    for (size_t j = 0; j < apertures.size(); ++j) {
        const auto& [center, width] = apertures[j];
        if (width <= 0)
            throw DomainError("aperture width must be positive");
        if (std::abs(deflection_sins[j]) >= 1.0)
            throw DomainError("non-physical deflection: |sin(alpha)| >= 1");
        for (const auto& m : basis.modes)
            if (m.center == center)
                throw DomainError("duplicate aperture centers in basis");
        basis.modes.push_back({center, width, k, deflection_sins[j]});
    }
    return basis;
}

inline ModeBasis build_mode_basis(const std::vector<Aperture>& apertures,
                                  const SensorGeometry& geometry,
                                  const std::vector<double>& deflection_sins) {
    return build_mode_basis(std::span<const Aperture>(apertures), geometry,
                            std::span<const double>(deflection_sins));
}

} // namespace cohart

#endif
