#ifndef COHART_SOURCE_HPP
#define COHART_SOURCE_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cohart/basis.hpp"
#include "cohart/bessel.hpp"
#include "cohart/coherence.hpp"
#include "cohart/errors.hpp"

namespace cohart {

// |mu| predicted by the van Cittert-Zernike theorem for an incoherent
// circular planar source of diameter w behind a collimator of focal
// length f: |2 J1(t)/t| with t = pi w s / (lambda f).
inline double vcz_mu(double w, double lambda, double f, double separation) {
    if (!(w > 0 && lambda > 0 && f > 0) || separation < 0)
        throw DomainError("vcz_mu arguments must be positive (separation >= 0)");
    const double t = std::numbers::pi * w * separation / (lambda * f);
    return std::abs(jinc(t));
}

// Partially coherent source description: either the van Cittert-Zernike
// circular-fiber model or an explicitly supplied coherence matrix.
struct SourceModel {
    enum class Kind { vcz_circular, explicit_rho };

    Kind kind = Kind::vcz_circular;
    double core_diameter = 200e-6;  // w (vcz only)
    double collimator_focal = 0.1;  // f (vcz only)
    std::function<double(double)> amplitude; // u(x); defaults to 1
    std::optional<CoherenceMatrix> rho;      // explicit only

    double u(double x) const { return amplitude ? amplitude(x) : 1.0; }

    void validate() const {
        if (kind == Kind::vcz_circular) {
            if (!(core_diameter > 0) || !(collimator_focal > 0))
                throw ConfigError("vcz source needs positive core diameter and focal length");
        } else if (!rho) {
            throw ConfigError("explicit source needs a coherence matrix");
        }
    }
};

// Mutual intensity sampled at the aperture centers:
//   J_ij = u(x_i) u(x_j) * 2 J1(t)/t,  t = pi w |x_i - x_j| / (lambda f)
// with J_ii = u(x_i)^2 as the t -> 0 limit.
inline CoherenceMatrix rho_from_source(const SourceModel& source,
                                       std::span<const Aperture> apertures,
                                       const SensorGeometry& geometry) {
    source.validate();
    if (source.kind == SourceModel::Kind::explicit_rho) {
        if (static_cast<size_t>(source.rho->dimension()) != apertures.size())
            throw DomainError("explicit rho dimension does not match aperture count");
        return *source.rho;
    }
    const int d = static_cast<int>(apertures.size());
    Matrix J(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double xi = apertures[static_cast<size_t>(i)].first;
            const double xj = apertures[static_cast<size_t>(j)].first;
            const double t = std::numbers::pi * source.core_diameter * std::abs(xi - xj) /
                             (geometry.wavelength * source.collimator_focal);
            J(i, j) = source.u(xi) * source.u(xj) * jinc(t);
        }
    }
    try {
        return CoherenceMatrix::from_matrix(std::move(J));
    } catch (const DomainError& e) {
        throw DataError(std::string("vcz mutual intensity failed positivity check: ") + e.what());
    }
}

} // namespace cohart

#endif
