#ifndef COHART_STITCH_HPP
#define COHART_STITCH_HPP

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "cohart/bessel.hpp"
#include "cohart/coherence.hpp"
#include "cohart/errors.hpp"
#include "cohart/mle.hpp"
#include "cohart/optim.hpp"
#include "cohart/source.hpp"

namespace cohart {

// The N(N-1)/2 two-aperture samples needed for an N x N mutual
// intensity matrix, enumerated in row-major order.
struct SamplingPlan {
    std::vector<double> points; // aperture centers, strictly increasing (m)
    double aperture_width = 0.0;
    std::vector<std::pair<int, int>> pairs; // (i, j), i < j

    int point_count() const { return static_cast<int>(points.size()); }
};

inline SamplingPlan plan_pairs(const std::vector<double>& points, double width) {
    const int n = static_cast<int>(points.size());
    if (n < 2) throw DomainError("sampling plan needs at least two points");
    if (!(width > 0)) throw DomainError("aperture width must be positive");
    for (int i = 1; i < n; ++i) {
        if (!(points[static_cast<size_t>(i)] > points[static_cast<size_t>(i - 1)]))
            throw DomainError("sampling points must be strictly increasing");
        if (points[static_cast<size_t>(i)] - points[static_cast<size_t>(i - 1)] < width)
            throw DomainError("overlapping apertures in sampling plan");
    }
    SamplingPlan plan;
    plan.points = points;
    plan.aperture_width = width;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) plan.pairs.emplace_back(i, j);
    return plan;
}

struct StitchedMatrix {
    Matrix J;  // N x N mutual intensity, physical intensity units
    Matrix mu; // complex degree of coherence
    double psd_projection_distance = 0.0;
    bool consistent = true; // false when the projection moved J by > 10% Frobenius
};

// Assembles the N x N mutual intensity from pairwise reconstructions:
// diagonal from single-aperture integrated intensities, off-diagonals
// from each pair's scale-free degree of coherence rescaled by
// sqrt(J_ii J_jj), then Frobenius-nearest PSD projection.
inline StitchedMatrix stitch(const std::map<std::pair<int, int>, ReconstructionResult>& pair_results,
                             const std::vector<double>& single_aperture_intensities) {
    const int n = static_cast<int>(single_aperture_intensities.size());
    if (n < 2) throw DataError("stitch needs at least two points");
    for (double v : single_aperture_intensities)
        if (!(v > 0)) throw DataError("stitch: single-aperture intensities must be positive");

    Matrix J = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) J(i, i) = single_aperture_intensities[static_cast<size_t>(i)];
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto it = pair_results.find({i, j});
            if (it == pair_results.end())
                throw DataError("incomplete plan: missing pair (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
            const Matrix& rho = it->second.rho_hat;
            if (rho.rows() != 2)
                throw DataError("stitch expects 2x2 pairwise reconstructions");
            const double p0 = rho(0, 0).real();
            const double p1 = rho(1, 1).real();
            if (!(p0 > 0) || !(p1 > 0))
                throw DataError("pairwise reconstruction has a vanishing diagonal");
            const std::complex<double> mu_pair = rho(0, 1) / std::sqrt(p0 * p1);
            J(i, j) = mu_pair * std::sqrt(J(i, i).real() * J(j, j).real());
            J(j, i) = std::conj(J(i, j));
        }
    }

    StitchedMatrix out;
    double distance = 0.0;
    out.J = project_psd(J, &distance);
    // keep the supplied intensities on the diagonal exactly
    for (int i = 0; i < n; ++i) out.J(i, i) = single_aperture_intensities[static_cast<size_t>(i)];
    out.psd_projection_distance = distance;
    out.consistent = distance <= 0.1 * J.norm();

    out.mu = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.mu(i, j) = out.J(i, j) / std::sqrt(out.J(i, i).real() * out.J(j, j).real());
    return out;
}

struct CoreDiameterFit {
    double w_hat = 0.0; // fitted core diameter (m)
    double rss = 0.0;   // residual sum of squares
};

// Least-squares fit of the source core diameter w in the van
// Cittert-Zernike |mu| model, over w in [1 um, 5 mm]: coarse log-spaced
// scan followed by a golden-section polish.
inline CoreDiameterFit fit_core_diameter(const std::vector<std::pair<double, double>>& samples,
                                         double lambda, double f) {
    if (samples.size() < 2) throw DataError("core-diameter fit needs at least two samples");
    int distinct = 0;
    std::vector<double> seps;
    for (const auto& [s, mu] : samples) {
        bool seen = false;
        for (double q : seps)
            if (std::abs(q - s) < 1e-12) seen = true;
        if (!seen) {
            seps.push_back(s);
            if (s > 0) ++distinct;
        }
    }
    if (distinct < 2)
        throw DataError("unidentifiable fit: need at least two distinct nonzero separations");

    auto rss_of = [&](double w) {
        double rss = 0.0;
        for (const auto& [s, mu] : samples) {
            const double r = vcz_mu(w, lambda, f, s) - mu;
            rss += r * r;
        }
        return rss;
    };
    const double w_lo = 1e-6;
    const double w_hi = 5e-3;
    const int n_scan = 400;
    double best_w = w_lo;
    double best_rss = rss_of(w_lo);
    for (int i = 1; i <= n_scan; ++i) {
        const double w = w_lo * std::pow(w_hi / w_lo, static_cast<double>(i) / n_scan);
        const double r = rss_of(w);
        if (r < best_rss) {
            best_rss = r;
            best_w = w;
        }
    }
    const double step = std::pow(w_hi / w_lo, 1.0 / n_scan);
    const MinimizeResult m = golden_section_minimize(
        rss_of, std::max(w_lo, best_w / step), std::min(w_hi, best_w * step), 1e-12, 300);
    CoreDiameterFit fit;
    if (m.fx < best_rss) {
        fit.w_hat = m.x;
        fit.rss = m.fx;
    } else {
        fit.w_hat = best_w;
        fit.rss = best_rss;
    }
    return fit;
}

} // namespace cohart

#endif
