#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "cohart/stitch.hpp"

using namespace cohart;

namespace {

ReconstructionResult pair_result(std::complex<double> mu, double p0 = 0.5) {
    ReconstructionResult r;
    r.rho_hat = Matrix(2, 2);
    const double p1 = 1.0 - p0;
    const std::complex<double> c = mu * std::sqrt(p0 * p1);
    r.rho_hat << p0, c, std::conj(c), p1;
    r.converged = true;
    return r;
}

Matrix random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    return 0.5 * (m + Matrix(m.adjoint()));
}

} // namespace

TEST_CASE("plan_pairs") {
    SUBCASE("pair counts N(N-1)/2") {
        CHECK(plan_pairs({0.0, 152e-6}, 76e-6).pairs.size() == 1);
        CHECK(plan_pairs({0.0, 152e-6, 304e-6, 456e-6}, 76e-6).pairs.size() == 6);
        std::vector<double> ten;
        for (int i = 0; i < 10; ++i) ten.push_back(i * 152e-6);
        CHECK(plan_pairs(ten, 76e-6).pairs.size() == 45);
    }
    SUBCASE("row-major enumeration") {
        const SamplingPlan p = plan_pairs({0.0, 1e-4, 2e-4}, 5e-5);
        REQUIRE(p.pairs.size() == 3);
        CHECK(p.pairs[0] == std::pair<int, int>{0, 1});
        CHECK(p.pairs[1] == std::pair<int, int>{0, 2});
        CHECK(p.pairs[2] == std::pair<int, int>{1, 2});
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(plan_pairs({0.0}, 76e-6), DomainError);
        CHECK_THROWS_AS(plan_pairs({0.0, 50e-6}, 76e-6), DomainError);  // overlap
        CHECK_THROWS_AS(plan_pairs({0.0, -1e-4}, 76e-6), DomainError);  // not increasing
        CHECK_THROWS_AS(plan_pairs({0.0, 1e-4}, 0.0), DomainError);
    }
}

TEST_CASE("stitch") {
    SUBCASE("diagonal kept exactly; Hermitian; |mu| bounded") {
        std::map<std::pair<int, int>, ReconstructionResult> results;
        results[{0, 1}] = pair_result({0.7, 0.1});
        results[{0, 2}] = pair_result({0.2, -0.05}, 0.6);
        results[{1, 2}] = pair_result({0.65, 0.0}, 0.45);
        const std::vector<double> intensities = {2.0e6, 1.5e6, 0.9e6};
        const StitchedMatrix s = stitch(results, intensities);
        for (int i = 0; i < 3; ++i) CHECK(s.J(i, i).real() == intensities[static_cast<size_t>(i)]);
        CHECK((s.J - Matrix(s.J.adjoint())).norm() <= 1e-12 * s.J.norm());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(std::abs(s.mu(i, j)) <= 1.0 + 1e-6);
    }
    SUBCASE("N = 2 reproduces the pair's degree of coherence") {
        const std::complex<double> mu{0.6, 0.2};
        std::map<std::pair<int, int>, ReconstructionResult> results;
        results[{0, 1}] = pair_result(mu, 0.35);
        const StitchedMatrix s = stitch(results, {3.0, 5.0});
        CHECK(std::abs(s.mu(0, 1) - mu) < 1e-12);
        CHECK(s.psd_projection_distance <= 1e-12);
        CHECK(s.consistent);
    }
    SUBCASE("all mu zero: diagonal matrix, zero projection distance") {
        std::map<std::pair<int, int>, ReconstructionResult> results;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) results[{i, j}] = pair_result(0.0);
        const StitchedMatrix s = stitch(results, {1.0, 2.0, 3.0, 4.0});
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (i != j) CHECK(std::abs(s.J(i, j)) == 0.0);
        CHECK(s.psd_projection_distance == 0.0);
        CHECK(s.consistent);
    }
    SUBCASE("wildly inconsistent pairs get flagged") {
        // pairwise "fully coherent" with phases that cannot come from any
        // PSD matrix: mu_01 = mu_12 = 1 but mu_02 = -1
        std::map<std::pair<int, int>, ReconstructionResult> results;
        results[{0, 1}] = pair_result(1.0);
        results[{1, 2}] = pair_result(1.0);
        results[{0, 2}] = pair_result(-1.0);
        const StitchedMatrix s = stitch(results, {1.0, 1.0, 1.0});
        CHECK(s.psd_projection_distance > 0.1 * s.J.norm());
        CHECK(!s.consistent);
    }
    SUBCASE("errors") {
        std::map<std::pair<int, int>, ReconstructionResult> results;
        results[{0, 1}] = pair_result(0.5);
        CHECK_THROWS_AS(stitch(results, {1.0, 1.0, 1.0}), DataError);  // missing pairs
        CHECK_THROWS_AS(stitch(results, {1.0, 0.0}), DataError);      // zero intensity
        CHECK_THROWS_AS(stitch(results, {1.0}), DataError);           // N < 2
    }
}

TEST_CASE("project_psd") {
    std::mt19937_64 rng(17);
    SUBCASE("output PSD; idempotent; identity on PSD input") {
        for (int k = 0; k < 10; ++k) {
            const Matrix a = random_hermitian(4, rng);
            double dist = 0.0;
            const Matrix p = project_psd(a, &dist);
            Eigen::SelfAdjointEigenSolver<Matrix> es(p);
            CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
            CHECK(dist >= 0.0);
            double dist2 = 0.0;
            const Matrix pp = project_psd(p, &dist2);
            CHECK((pp - p).norm() <= 1e-12 * p.norm());
            CHECK(dist2 <= 1e-12 * p.norm());
        }
    }
    SUBCASE("projection distance is the Frobenius norm of the change") {
        const Matrix a = random_hermitian(5, rng);
        double dist = 0.0;
        const Matrix p = project_psd(a, &dist);
        CHECK(dist == doctest::Approx((p - a).norm()).epsilon(1e-12));
    }
    SUBCASE("non-expansive on random pairs") {
        for (int k = 0; k < 10; ++k) {
            const Matrix a = random_hermitian(4, rng);
            const Matrix b = random_hermitian(4, rng);
            CHECK((project_psd(a, nullptr) - project_psd(b, nullptr)).norm() <=
                  (a - b).norm() * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("vcz_mu") {
    const double lambda = 633e-9;
    const double f = 0.1;
    SUBCASE("separation 0 gives 1") {
        CHECK(vcz_mu(200e-6, lambda, f, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero at the first J1 zero") {
        const double w = 200e-6;
        const double s0 = 3.8317059702 * lambda * f / (std::numbers::pi * w);
        CHECK(vcz_mu(w, lambda, f, s0) < 1e-9);
    }
    SUBCASE("non-increasing up to the first zero") {
        const double w = 200e-6;
        const double s0 = 3.8317059702 * lambda * f / (std::numbers::pi * w);
        double prev = vcz_mu(w, lambda, f, 0.0);
        for (int k = 1; k <= 50; ++k) {
            const double v = vcz_mu(w, lambda, f, s0 * k / 50.0);
            CHECK(v <= prev + 1e-14);
            prev = v;
        }
    }
    SUBCASE("narrower fiber keeps more coherence below the first zero") {
        const double s400 = 3.8317059702 * lambda * f / (std::numbers::pi * 400e-6);
        for (int k = 1; k < 20; ++k) {
            const double s = s400 * k / 20.0;
            CHECK(vcz_mu(105e-6, lambda, f, s) > vcz_mu(400e-6, lambda, f, s));
        }
    }
    SUBCASE("bad arguments rejected") {
        CHECK_THROWS_AS(vcz_mu(0.0, lambda, f, 1e-4), DomainError);
        CHECK_THROWS_AS(vcz_mu(200e-6, lambda, f, -1e-4), DomainError);
    }
}

TEST_CASE("fit_core_diameter") {
    const double lambda = 633e-9;
    const double f = 0.1;
    const std::vector<double> seps = {152e-6, 304e-6, 456e-6};

    SUBCASE("noiseless samples recover w to 0.1%") {
        const double w_true = 200e-6;
        std::vector<std::pair<double, double>> samples;
        for (double s : seps) samples.emplace_back(s, vcz_mu(w_true, lambda, f, s));
        const CoreDiameterFit fit = fit_core_diameter(samples, lambda, f);
        CHECK(fit.w_hat == doctest::Approx(w_true).epsilon(1e-3));
        CHECK(fit.rss < 1e-12);
    }
    SUBCASE("property: exact recovery across random true diameters") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> draw(30e-6, 2e-3);
        for (int k = 0; k < 20; ++k) {
            const double w_true = draw(rng);
            std::vector<std::pair<double, double>> samples;
            for (double s : seps) samples.emplace_back(s, vcz_mu(w_true, lambda, f, s));
            const CoreDiameterFit fit = fit_core_diameter(samples, lambda, f);
            CHECK(fit.w_hat == doctest::Approx(w_true).epsilon(1e-3));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(fit_core_diameter({{152e-6, 0.7}}, lambda, f), DataError);
        CHECK_THROWS_AS(
            fit_core_diameter({{0.0, 1.0}, {0.0, 1.0}, {0.0, 0.99}}, lambda, f), DataError);
    }
}
