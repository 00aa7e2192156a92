#ifndef COHART_BESSEL_HPP
#define COHART_BESSEL_HPP

#include <cmath>
#include <cstdlib>

namespace cohart {

namespace detail {

// Ascending power series, reliable for moderate arguments.
inline double bessel_j1_series(double t) {
    const double q = 0.25 * t * t;
    double term = 0.5 * t; // m = 0 term: (t/2) / (0! 1!)
    double sum = term;
    for (int m = 1; m < 80; ++m) {
        term *= -q / (static_cast<double>(m) * (m + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Miller downward recurrence for t > 0, stable where the series loses
// accuracy. Normalized with J0 + 2*sum_{k>=1} J_{2k} = 1.
inline double bessel_j1_miller(double t) {
    int start = static_cast<int>(t + 12.0 * std::cbrt(t)) + 24;
    if (start % 2) ++start;
    double jp = 0.0;   // J_{m+1}
    double jc = 1e-30; // J_m
    double j1 = 0.0;
    double even_sum = jc; // running sum of even-order values (includes J_0 at the end)
    for (int m = start; m >= 1; --m) {
        const double jm = (2.0 * m / t) * jc - jp; // J_{m-1}
        jp = jc;
        jc = jm;
        if ((m - 1) % 2 == 0) even_sum += jc;
        if (m - 1 == 1) j1 = jc;
        if (std::abs(jc) > 1e100) {
            jc *= 1e-100;
            jp *= 1e-100;
            j1 *= 1e-100;
            even_sum *= 1e-100;
        }
    }
    const double norm = 2.0 * even_sum - jc; // jc == J_0 here
    return j1 / norm;
}

} // namespace detail

// Bessel function of the first kind, order one. Relative error <= 1e-10
// for |t| <= 50. Odd: J1(-t) = -J1(t).
inline double bessel_j1(double t) {
    const double a = std::abs(t);
    double v = (a <= 12.0) ? detail::bessel_j1_series(a) : detail::bessel_j1_miller(a);
    return t < 0 ? -v : v;
}

// 2*J1(t)/t with the removable singularity filled in: jinc(0) = 1.
inline double jinc(double t) {
    const double a = std::abs(t);
    if (a < 1e-8) return 1.0 - t * t / 8.0;
    return 2.0 * bessel_j1(t) / t;
}

} // namespace cohart

#endif
