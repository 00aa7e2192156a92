#ifndef COHART_SPOT_HPP
#define COHART_SPOT_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "cohart/basis.hpp"
#include "cohart/errors.hpp"
#include "cohart/frame.hpp"
#include "cohart/geometry.hpp"
#include "cohart/optim.hpp"
#include "cohart/povm.hpp"

namespace cohart {

struct PixelRange {
    int begin = 0; // inclusive
    int end = 0;   // exclusive

    int size() const { return end - begin; }
};

struct SpotEstimate {
    double centroid = 0.0;         // COG position (m)
    double refined_position = 0.0; // model-fit peak position (m)
    double deflection_sin = 0.0;
    double residual_rmse = 0.0;
    PixelRange roi;
    bool converged = true;
};

// Window of fixed half-width around the brightest pixel.
inline PixelRange roi_around_max(const DetectorFrame& frame, int half_width_pixels) {
    const auto it = std::max_element(frame.counts.begin(), frame.counts.end());
    const int peak = static_cast<int>(it - frame.counts.begin());
    PixelRange roi;
    roi.begin = std::max(0, peak - half_width_pixels);
    roi.end = std::min(frame.pixel_count(), peak + half_width_pixels + 1);
    return roi;
}

// Default ROI: half-width = 3x the nominal spot scale of the aperture.
inline PixelRange default_roi(const DetectorFrame& frame, const SensorGeometry& geometry,
                              double aperture_width, double scale_factor = 3.0) {
    const double scale_px = geometry.spot_scale(aperture_width) / frame.pixel_pitch;
    return roi_around_max(frame, static_cast<int>(std::ceil(scale_factor * scale_px)));
}

// Median count outside the ROI; COG bias compensation for uniform
// background.
inline double background_level(const DetectorFrame& frame, const PixelRange& roi) {
    std::vector<double> outside;
    for (int p = 0; p < frame.pixel_count(); ++p)
        if (p < roi.begin || p >= roi.end) outside.push_back(frame.counts[static_cast<size_t>(p)]);
    if (outside.empty()) return 0.0;
    const size_t mid = outside.size() / 2;
    std::nth_element(outside.begin(), outside.begin() + static_cast<long>(mid), outside.end());
    double hi = outside[mid];
    if (outside.size() % 2 == 0) {
        std::nth_element(outside.begin(), outside.begin() + static_cast<long>(mid) - 1,
                         outside.end());
        hi = 0.5 * (hi + outside[mid - 1]);
    }
    return hi;
}

// Center of gravity over the ROI, in detector coordinates. An optional
// background is subtracted with clamping at zero.
inline double cog_centroid(const DetectorFrame& frame, const PixelRange& roi,
                           double background = 0.0) {
    if (roi.size() <= 0 || roi.begin < 0 || roi.end > frame.pixel_count())
        throw DataError("cog_centroid: empty or out-of-range ROI");
    double wsum = 0.0;
    double csum = 0.0;
    for (int p = roi.begin; p < roi.end; ++p) {
        const double c = std::max(0.0, frame.counts[static_cast<size_t>(p)] - background);
        wsum += c * frame.pixel_position(p);
        csum += c;
    }
    if (!(csum > 0)) throw DataError("cog_centroid: zero total counts in ROI");
    return wsum / csum;
}

// sin(alpha) from the envelope peak condition xi_peak = x0 - z sin(alpha).
inline double deflection_from_position(double peak_position, double aperture_center,
                                       const SensorGeometry& geometry) {
    const double z = geometry.detector_distance;
    if (z <= 0) throw DomainError("detector distance must be positive");
    if (std::abs(peak_position - aperture_center) >= z)
        throw DomainError("peak displacement exceeds propagation distance");
    return (aperture_center - peak_position) / z;
}

namespace detail {

// RMSE between the frame ROI and the single-mode model profile with the
// envelope peak at `peak`, both normalized to unit sum.
inline double spot_model_rmse(const DetectorFrame& frame, const SensorGeometry& geometry,
                              const Aperture& aperture, const PixelRange& roi, double peak) {
    ApertureMode mode;
    mode.center = aperture.first;
    mode.width = aperture.second;
    mode.wavenumber = geometry.wavenumber();
    mode.deflection_sin = (aperture.first - peak) / geometry.detector_distance;
    std::vector<double> xs(static_cast<size_t>(roi.size()));
    for (int p = roi.begin; p < roi.end; ++p)
        xs[static_cast<size_t>(p - roi.begin)] = frame.pixel_position(p);
    const Eigen::VectorXcd psi = propagate_mode(mode, geometry, xs);
    Eigen::VectorXd model = psi.cwiseAbs2();
    const double msum = model.sum();
    double dsum = 0.0;
    for (int p = roi.begin; p < roi.end; ++p) dsum += frame.counts[static_cast<size_t>(p)];
    if (!(msum > 0) || !(dsum > 0))
        throw DataError("spot refinement: empty model or data in ROI");
    double sq = 0.0;
    for (int p = roi.begin; p < roi.end; ++p) {
        const double diff =
            frame.counts[static_cast<size_t>(p)] / dsum - model(p - roi.begin) / msum;
        sq += diff * diff;
    }
    return std::sqrt(sq / roi.size());
}

} // namespace detail

// Refines a spot position by golden-section minimization of the RMSE
// between the measured profile and the forward-model profile, bracketed
// at +/- 2 pixels around the initial guess. Never returns a position
// with worse RMSE than the initial one.
inline SpotEstimate refine_spot(const DetectorFrame& frame, const SensorGeometry& geometry,
                                const Aperture& aperture, double initial) {
    const double span_lo = frame.pixel_position(0);
    const double span_hi = frame.pixel_position(frame.pixel_count() - 1);
    if (initial < span_lo || initial > span_hi)
        throw DataError("refine_spot: initial position outside detector span");
    const PixelRange roi = default_roi(frame, geometry, aperture.second);
    const double px = frame.pixel_pitch;
    auto objective = [&](double peak) {
        return detail::spot_model_rmse(frame, geometry, aperture, roi, peak);
    };
    const MinimizeResult m =
        golden_section_minimize(objective, initial - 2.0 * px, initial + 2.0 * px, 1e-4 * px, 200);
    const double rmse_initial = objective(initial);

    SpotEstimate est;
    est.centroid = initial;
    est.roi = roi;
    est.converged = m.converged;
    if (m.fx <= rmse_initial) {
        est.refined_position = m.x;
        est.residual_rmse = m.fx;
    } else {
        est.refined_position = initial;
        est.residual_rmse = rmse_initial;
    }
    est.deflection_sin = deflection_from_position(est.refined_position, aperture.first, geometry);
    return est;
}

} // namespace cohart

#endif
