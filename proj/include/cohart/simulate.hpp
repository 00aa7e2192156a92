#ifndef COHART_SIMULATE_HPP
#define COHART_SIMULATE_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "cohart/coherence.hpp"
#include "cohart/errors.hpp"
#include "cohart/frame.hpp"
#include "cohart/mask.hpp"
#include "cohart/povm.hpp"
#include "cohart/source.hpp"

namespace cohart {

// Simulates one detector exposure for a flat (zero-slope) incoming
// wavefront through the given mask. Expected counts are the Born-rule
// intensity normalized to the photon budget; noise is per-pixel Poisson.
// Identical seed gives an identical frame.
inline DetectorFrame simulate_frame(const SourceModel& source, const MaskPattern& mask,
                                    const SensorGeometry& geometry, double exposure_photons,
                                    std::optional<uint64_t> seed, bool noise = true) {
    if (!(exposure_photons > 0))
        throw DomainError("exposure_photons must be positive");
    if (mask.open_mirrors.empty())
        throw DataError("no signal: mask has no open mirrors");
    const auto apertures = apertures_from_mask(mask, geometry);
    const std::vector<double> zeros(apertures.size(), 0.0);
    const ModeBasis basis = build_mode_basis(apertures, geometry, zeros);
    const PovmSet povm = build_povm(basis, geometry);
    const CoherenceMatrix rho = rho_from_source(source, apertures, geometry);
    const Eigen::VectorXd intensity = born_intensity(rho, povm);
    const double total = intensity.sum();
    if (!(total > 0)) throw DataError("no signal reaches the detector");

    DetectorFrame frame;
    frame.exposure_photons = exposure_photons;
    frame.pixel_pitch = geometry.detector_pixel_pitch;
    frame.origin = geometry.detector_origin;
    frame.noise_seed = noise ? seed : std::nullopt;
    frame.counts.resize(static_cast<size_t>(intensity.size()));
    if (noise) {
        std::mt19937_64 rng(seed.value_or(std::random_device{}()));
        for (Eigen::Index p = 0; p < intensity.size(); ++p) {
            const double mean = exposure_photons * intensity(p) / total;
            if (mean > 0) {
                std::poisson_distribution<long> pois(mean);
                frame.counts[static_cast<size_t>(p)] = static_cast<double>(pois(rng));
            } else {
                frame.counts[static_cast<size_t>(p)] = 0.0;
            }
        }
    } else {
        for (Eigen::Index p = 0; p < intensity.size(); ++p)
            frame.counts[static_cast<size_t>(p)] = exposure_photons * intensity(p) / total;
    }
    return frame;
}

// Stochastic-ensemble oracle for the Born rule: draws coherent field
// realizations from rho's eigen-decomposition (eigenmode with
// probability eigenvalue/trace, random global phase) and averages the
// per-pixel intensities. Converges to born_intensity as n grows.
inline Eigen::VectorXd sample_ensemble(const CoherenceMatrix& rho, const PovmSet& povm,
                                       int n_realizations, uint64_t seed) {
    if (n_realizations < 1)
        throw DomainError("sample_ensemble needs at least one realization");
    if (rho.dimension() != povm.dimension())
        throw DomainError("sample_ensemble: state and POVM dimensions differ");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    const double tr = rho.trace();
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -CoherenceMatrix::psd_tol * tr)
        throw DomainError("sample_ensemble: rho is not positive semidefinite");
    std::vector<double> probs(static_cast<size_t>(ev.size()));
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        probs[static_cast<size_t>(k)] = ev(k) < 1e-12 * tr ? 0.0 : ev(k) / tr;
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> pick(probs.begin(), probs.end());
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    const int n_pixels = povm.pixel_count();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_pixels);
    for (int r = 0; r < n_realizations; ++r) {
        const int k = pick(rng);
        const std::complex<double> global = std::polar(1.0, phase(rng));
        const Eigen::VectorXcd coeff = global * std::sqrt(tr) * es.eigenvectors().col(k);
        // intensity of this realization: |sum_j c_j psi'_j(xi)|^2
        const Eigen::VectorXcd field = povm.amplitudes.adjoint() * coeff;
        mean += field.cwiseAbs2();
    }
    return mean / n_realizations;
}

} // namespace cohart

#endif
