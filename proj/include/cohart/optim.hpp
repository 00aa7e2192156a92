#ifndef COHART_OPTIM_HPP
#define COHART_OPTIM_HPP

#include <cmath>
#include <utility>

namespace cohart {

struct MinimizeResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Golden-section search for a minimum of f on [a, b].
template <typename F>
MinimizeResult golden_section_minimize(F&& f, double a, double b, double tol,
                                       int max_iterations = 200) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    if (a > b) std::swap(a, b);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    MinimizeResult r;
    while (r.iterations < max_iterations) {
        ++r.iterations;
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a < tol) {
            r.converged = true;
            break;
        }
    }
    if (fc < fd) {
        r.x = c;
        r.fx = fc;
    } else {
        r.x = d;
        r.fx = fd;
    }
    return r;
}

} // namespace cohart

#endif
