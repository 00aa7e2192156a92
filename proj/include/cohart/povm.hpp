#ifndef COHART_POVM_HPP
#define COHART_POVM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "cohart/basis.hpp"
#include "cohart/coherence.hpp"
#include "cohart/errors.hpp"
#include "cohart/geometry.hpp"

namespace cohart {

inline double sinc(double x) {
    if (std::abs(x) < 1e-9) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// Fresnel-propagated amplitude of a single aperture mode at detector
// positions xi:
//   psi'(xi) = exp(i k x0 sin a) exp(i k (xi-x0)^2 / 2z)
//              * sinc[(a/(lambda z)) (xi - x0 + z sin a)]
// The envelope peaks at xi = x0 - z sin(alpha).
inline Eigen::VectorXcd propagate_mode(const ApertureMode& mode,
                                       const SensorGeometry& geometry,
                                       std::span<const double> pixels) {
    const double z = geometry.detector_distance;
    if (z <= 0) throw DomainError("propagation distance must be positive");
    const double k = mode.wavenumber;
    const double x0 = mode.center;
    const double sa = mode.deflection_sin;
    const double env_scale = mode.width / (geometry.wavelength * z);
    const std::complex<double> tilt = std::exp(std::complex<double>(0.0, k * x0 * sa));
    Eigen::VectorXcd out(static_cast<Eigen::Index>(pixels.size()));
    for (size_t p = 0; p < pixels.size(); ++p) {
        const double dx = pixels[p] - x0;
        const std::complex<double> fresnel =
            std::exp(std::complex<double>(0.0, k * dx * dx / (2.0 * z)));
        out(static_cast<Eigen::Index>(p)) = tilt * fresnel * sinc(env_scale * (dx + z * sa));
    }
    return out;
}

// Per-pixel rank-1 measurement matrices (Pi_xi)_ij = psi'_i psi'_j^*,
// stored as the d x n amplitude table. Each mode row is normalized to
// unit integrated intensity over the detector; absolute brightness
// lives in the exposure model.
struct PovmSet {
    Eigen::MatrixXcd amplitudes; // d x n_pixels
    std::vector<double> pixel_positions;
    double pixel_pitch = 0.0;

    int dimension() const { return static_cast<int>(amplitudes.rows()); }
    int pixel_count() const { return static_cast<int>(amplitudes.cols()); }

    Matrix element(int p) const {
        const Eigen::VectorXcd c = amplitudes.col(p);
        return c * c.adjoint();
    }

    // G = sum_xi Pi_xi
    Matrix overlap() const { return amplitudes * amplitudes.adjoint(); }
};

inline PovmSet build_povm(const ModeBasis& basis, const SensorGeometry& geometry) {
    geometry.validate();
    PovmSet povm;
    povm.pixel_positions = geometry.pixel_positions();
    povm.pixel_pitch = geometry.detector_pixel_pitch;
    const int d = basis.dimension();
    const int n = geometry.detector_pixel_count;
    povm.amplitudes.resize(d, n);
    for (int j = 0; j < d; ++j) {
        Eigen::VectorXcd psi = propagate_mode(basis.modes[static_cast<size_t>(j)], geometry,
                                              povm.pixel_positions);
        const double norm2 = psi.squaredNorm() * povm.pixel_pitch;
        if (!(norm2 > 0))
            throw DomainError("mode has zero intensity on the detector");
        povm.amplitudes.row(j) = psi.transpose() / std::sqrt(norm2);
    }
    return povm;
}

// Born rule I(xi) = Tr(rho Pi_xi) = psi^dag rho psi, clamped at zero
// against roundoff.
inline Eigen::VectorXd born_intensity(const CoherenceMatrix& rho, const PovmSet& povm) {
    if (rho.dimension() != povm.dimension())
        throw DomainError("born_intensity: state and POVM dimensions differ");
    const int n = povm.pixel_count();
    Eigen::VectorXd intensity(n);
    const Matrix& r = rho.matrix();
    for (int p = 0; p < n; ++p) {
        const Eigen::VectorXcd c = povm.amplitudes.col(p);
        intensity(p) = (c.adjoint() * r * c).value().real();
    }
    // PSD rho keeps negatives at roundoff scale; clamp them away.
    return intensity.cwiseMax(0.0);
}

} // namespace cohart

#endif
