#ifndef COHART_MLE_HPP
#define COHART_MLE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "cohart/coherence.hpp"
#include "cohart/errors.hpp"
#include "cohart/frame.hpp"
#include "cohart/geometry.hpp"
#include "cohart/optim.hpp"
#include "cohart/povm.hpp"
#include "cohart/spot.hpp"

namespace cohart {

struct MlConfig {
    int max_iterations = 5000;
    double likelihood_tolerance = 1e-10; // stop on relative log-likelihood gain below this
    double dilution = 1.0;               // initial step damping, in (0, 1]
    double min_eigenvalue_clip = 1e-12;
    int outer_refinement_rounds = 2;
    // Test hook: called with every accepted iterate.
    std::function<void(const Matrix&)> iterate_observer;

    void validate() const {
        if (max_iterations < 1) throw ConfigError("ml.max_iterations must be >= 1");
        if (!(likelihood_tolerance > 0)) throw ConfigError("ml.tolerance must be positive");
        if (!(dilution > 0) || dilution > 1.0) throw ConfigError("ml.dilution must be in (0, 1]");
    }
};

struct ReconstructionResult {
    Matrix rho_hat;               // Hermitian PSD, trace 1
    double intensity_scale = 0.0; // profiled-out photon scale
    double log_likelihood = 0.0;
    int iterations_used = 0;
    bool converged = false;
    std::vector<SpotEstimate> refined_spots;
    std::vector<double> ll_history;
};

// Poisson log-likelihood sum_xi [n log(lambda) - lambda] with the
// intensity scale profiled out analytically: lambda_xi = s Tr(rho Pi_xi),
// s = sum(n) / sum(Tr(rho Pi)). Zero-prediction pixels with counts give
// the -inf sentinel.
inline double log_likelihood(const CoherenceMatrix& rho, const DetectorFrame& frame,
                             const PovmSet& povm) {
    if (frame.pixel_count() != povm.pixel_count())
        throw DomainError("log_likelihood: frame and POVM pixel counts differ");
    frame.validate();
    const Eigen::VectorXd predicted = born_intensity(rho, povm);
    const double pred_sum = predicted.sum();
    const double n_total = frame.total_counts();
    if (!(pred_sum > 0)) return -std::numeric_limits<double>::infinity();
    const double scale = n_total / pred_sum;
    double ll = 0.0;
    for (int p = 0; p < povm.pixel_count(); ++p) {
        const double n = frame.counts[static_cast<size_t>(p)];
        if (n == 0) continue;
        const double lam = scale * predicted(p);
        if (lam <= 0) return -std::numeric_limits<double>::infinity();
        ll += n * std::log(lam);
    }
    return ll - n_total;
}

// R(rho) = sum_xi [n_xi / Tr(rho Pi_xi)] Pi_xi. Hermitian PSD.
inline Matrix r_operator(const CoherenceMatrix& rho, const DetectorFrame& frame,
                         const PovmSet& povm) {
    if (frame.pixel_count() != povm.pixel_count())
        throw DomainError("r_operator: frame and POVM pixel counts differ");
    const Eigen::VectorXd predicted = born_intensity(rho, povm);
    const int d = povm.dimension();
    Matrix R = Matrix::Zero(d, d);
    for (int p = 0; p < povm.pixel_count(); ++p) {
        const double n = frame.counts[static_cast<size_t>(p)];
        if (n == 0) continue;
        if (!(predicted(p) > 0))
            throw DataError("singular model: counts at a pixel with zero predicted intensity");
        const Eigen::VectorXcd c = povm.amplitudes.col(p);
        R.noalias() += (n / predicted(p)) * (c * c.adjoint());
    }
    return 0.5 * (R + R.adjoint());
}

namespace detail {

// Pseudo-inverse square root of the Hermitian PSD overlap G = sum Pi,
// with eigenvalues below floor_rel * max treated as outside the support.
inline Matrix pinv_sqrt(const Matrix& G, double floor_rel = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (G + G.adjoint()));
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cutoff = floor_rel * ev.maxCoeff();
    if (!(ev.maxCoeff() > 0))
        throw DataError("ill-posed measurement: POVM overlap G is zero");
    Eigen::VectorXd inv = ev;
    int support = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cutoff) {
            inv(i) = 1.0 / std::sqrt(ev(i));
            ++support;
        } else {
            inv(i) = 0.0;
        }
    }
    if (support == 0) throw DataError("ill-posed measurement: G singular on the signal support");
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix normalize_state(Matrix m) {
    m = 0.5 * (m + m.adjoint());
    const double tr = m.trace().real();
    if (!(tr > 0)) throw DataError("ml update produced a non-positive-trace state");
    return m / tr;
}

// log_likelihood minus the rho-independent constant sum n log n - N,
// i.e. sum_xi n log(lambda/n). Long-double accumulation: near the
// optimum this is orders of magnitude smaller than the full likelihood,
// so step comparisons stay resolvable where the raw value has exhausted
// double precision.
inline long double relative_log_likelihood(const CoherenceMatrix& rho, const DetectorFrame& frame,
                                           const PovmSet& povm) {
    const Eigen::VectorXd predicted = born_intensity(rho, povm);
    const double pred_sum = predicted.sum();
    if (!(pred_sum > 0)) return -std::numeric_limits<long double>::infinity();
    const long double scale = static_cast<long double>(frame.total_counts()) / pred_sum;
    long double acc = 0.0L;
    for (int p = 0; p < povm.pixel_count(); ++p) {
        const double n = frame.counts[static_cast<size_t>(p)];
        if (n == 0) continue;
        const long double lam = scale * static_cast<long double>(predicted(p));
        if (!(lam > 0)) return -std::numeric_limits<long double>::infinity();
        acc += static_cast<long double>(n) * (std::log(lam) - std::log(static_cast<long double>(n)));
    }
    return acc;
}

} // namespace detail

// Biased-scheme maximum-likelihood iteration
//   rho <- normalize[ G^{-1/2} R(rho) rho R(rho) G^{-1/2} ],  G = sum Pi,
// with step dilution when a full step would decrease the likelihood.
// The reported log-likelihood sequence is non-decreasing.
inline ReconstructionResult mle_iterate(const CoherenceMatrix& rho0, const DetectorFrame& frame,
                                        const PovmSet& povm, const MlConfig& config) {
    config.validate();
    if (rho0.dimension() != povm.dimension())
        throw DomainError("mle_iterate: state and POVM dimensions differ");
    const Matrix g_inv_sqrt = detail::pinv_sqrt(povm.overlap());

    ReconstructionResult result;
    Matrix rho = rho0.normalized().matrix();
    frame.validate();
    long double ll_offset = -static_cast<long double>(frame.total_counts());
    for (double n : frame.counts)
        if (n > 0) ll_offset += static_cast<long double>(n) * std::log(static_cast<long double>(n));
    auto ll_of = [&](const Matrix& m) {
        return detail::relative_log_likelihood(CoherenceMatrix::from_matrix(m), frame, povm);
    };
    auto report = [&](long double rel) { return static_cast<double>(rel + ll_offset); };
    long double ll = ll_of(rho);
    result.ll_history.push_back(report(ll));

    for (int it = 0; it < config.max_iterations; ++it) {
        const Matrix R = r_operator(CoherenceMatrix::from_matrix(rho), frame, povm);
        Matrix candidate = detail::normalize_state(g_inv_sqrt * R * rho * R * g_inv_sqrt);
        long double ll_candidate = ll_of(candidate);
        if (ll_candidate < ll) {
            double eps = config.dilution;
            bool improved = false;
            for (int h = 0; h < 30; ++h) {
                eps *= 0.5;
                const Matrix diluted =
                    detail::normalize_state((1.0 - eps) * rho + eps * candidate);
                const long double ll_diluted = ll_of(diluted);
                if (ll_diluted >= ll) {
                    candidate = diluted;
                    ll_candidate = ll_diluted;
                    improved = true;
                    break;
                }
            }
            if (!improved) break; // no improving step at minimal dilution: keep best state
        }
        rho = candidate;
        const long double gain = ll_candidate - ll;
        ll = ll_candidate;
        result.ll_history.push_back(report(ll));
        result.iterations_used = it + 1;
        if (config.iterate_observer) config.iterate_observer(rho);
        if (gain < config.likelihood_tolerance *
                       std::max(1.0L, std::abs(ll + ll_offset))) {
            result.converged = true;
            break;
        }
    }
    // Boundary polish: multiplicative updates approach rank-deficient
    // optima only asymptotically, so try clipping the smallest
    // eigenvalues outright; keep a clipped state only if the likelihood
    // does not decrease.
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
        const Eigen::VectorXd ev = es.eigenvalues(); // ascending
        for (Eigen::Index k = ev.size() - 1; k >= 1; --k) {
            Eigen::VectorXd clipped = ev;
            clipped.head(k).setZero();
            const Matrix candidate = detail::normalize_state(
                es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint());
            const long double ll_candidate = ll_of(candidate);
            if (ll_candidate >= ll) {
                rho = candidate;
                if (ll_candidate > ll) {
                    ll = ll_candidate;
                    result.ll_history.push_back(report(ll));
                    if (config.iterate_observer) config.iterate_observer(rho);
                }
                break;
            }
        }
    }
    result.rho_hat = rho;
    result.log_likelihood = report(ll);
    {
        // profiled intensity scale at the optimum
        const Eigen::VectorXd predicted =
            born_intensity(CoherenceMatrix::from_matrix(rho), povm);
        result.intensity_scale = frame.total_counts() / predicted.sum();
    }
    return result;
}

namespace detail {

// Total RMSE between the normalized joint frame and the normalized
// Born-rule prediction for the given peak positions.
inline double joint_model_rmse(const DetectorFrame& frame, const SensorGeometry& geometry,
                               const std::vector<Aperture>& apertures,
                               const std::vector<double>& peaks, const Matrix& rho) {
    std::vector<double> sines(apertures.size());
    for (size_t j = 0; j < apertures.size(); ++j)
        sines[j] = deflection_from_position(peaks[j], apertures[j].first, geometry);
    const ModeBasis basis = build_mode_basis(apertures, geometry, sines);
    const PovmSet povm = build_povm(basis, geometry);
    const Eigen::VectorXd model = born_intensity(CoherenceMatrix::from_matrix(rho), povm);
    const double msum = model.sum();
    const double dsum = frame.total_counts();
    if (!(msum > 0) || !(dsum > 0)) throw DataError("joint refinement: empty model or data");
    double sq = 0.0;
    for (int p = 0; p < frame.pixel_count(); ++p) {
        const double diff = frame.counts[static_cast<size_t>(p)] / dsum - model(p) / msum;
        sq += diff * diff;
    }
    return std::sqrt(sq / frame.pixel_count());
}

} // namespace detail

// Two-step protocol for one aperture pair (general d): calibrate spot
// positions from single-aperture frames, build the POVM, run the ML
// iteration on the joint frame, then alternately re-refine the spot
// positions against the joint frame and re-run the ML step.
inline ReconstructionResult reconstruct_pair(const std::vector<DetectorFrame>& calibration_frames,
                                             const DetectorFrame& joint_frame,
                                             const std::vector<Aperture>& apertures,
                                             const SensorGeometry& geometry,
                                             const MlConfig& config) {
    if (calibration_frames.size() != apertures.size())
        throw DataError("reconstruct_pair: need one calibration frame per aperture");
    const int d = static_cast<int>(apertures.size());

    // Step 1: Hartmann sensing on the calibration frames.
    std::vector<SpotEstimate> spots;
    std::vector<double> peaks;
    for (int j = 0; j < d; ++j) {
        const DetectorFrame& cal = calibration_frames[static_cast<size_t>(j)];
        const PixelRange roi = default_roi(cal, geometry, apertures[static_cast<size_t>(j)].second);
        const double bg = background_level(cal, roi);
        const double cog = cog_centroid(cal, roi, bg);
        SpotEstimate est = refine_spot(cal, geometry, apertures[static_cast<size_t>(j)], cog);
        est.centroid = cog;
        peaks.push_back(est.refined_position);
        spots.push_back(est);
    }

    // Step 2: ML reconstruction with an outer loop over spot positions.
    const int rounds = std::max(1, config.outer_refinement_rounds);
    ReconstructionResult result;
    for (int round = 0; round < rounds; ++round) {
        std::vector<double> sines(static_cast<size_t>(d));
        for (int j = 0; j < d; ++j)
            sines[static_cast<size_t>(j)] =
                deflection_from_position(peaks[static_cast<size_t>(j)],
                                         apertures[static_cast<size_t>(j)].first, geometry);
        const ModeBasis basis = build_mode_basis(apertures, geometry, sines);
        const PovmSet povm = build_povm(basis, geometry);
        const Matrix mixed = Matrix::Identity(d, d) / d;
        result = mle_iterate(CoherenceMatrix::from_matrix(mixed), joint_frame, povm, config);

        if (round + 1 < rounds) {
            // refine each spot position against the joint frame
            const double px = geometry.detector_pixel_pitch;
            for (int j = 0; j < d; ++j) {
                auto objective = [&](double peak) {
                    std::vector<double> trial = peaks;
                    trial[static_cast<size_t>(j)] = peak;
                    return detail::joint_model_rmse(joint_frame, geometry, apertures, trial,
                                                    result.rho_hat);
                };
                const double p0 = peaks[static_cast<size_t>(j)];
                const MinimizeResult m =
                    golden_section_minimize(objective, p0 - 0.5 * px, p0 + 0.5 * px, 1e-4 * px, 200);
                if (m.fx <= objective(p0)) peaks[static_cast<size_t>(j)] = m.x;
            }
        }
    }
    for (int j = 0; j < d; ++j) {
        spots[static_cast<size_t>(j)].refined_position = peaks[static_cast<size_t>(j)];
        spots[static_cast<size_t>(j)].deflection_sin = deflection_from_position(
            peaks[static_cast<size_t>(j)], apertures[static_cast<size_t>(j)].first, geometry);
    }
    result.refined_spots = spots;
    return result;
}

} // namespace cohart

#endif
