#include "acsbayes/rng.hpp"

#include <cmath>

namespace acsbayes {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw std::invalid_argument("gamma: shape must be positive and finite");
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform_pos(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

long Rng::poisson_small(double lambda) {
    // Knuth sequential search; requires exp(-lambda) well above underflow
    const double limit = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform_pos();
    } while (p > limit);
    return k - 1;
}

long Rng::poisson(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("poisson: lambda must be positive and finite");
    if (lambda > 1e6)
        throw std::invalid_argument("poisson: lambda too large for exact sampling");
    long total = 0;
    while (lambda > 25.0) {
        total += poisson_small(20.0);
        lambda -= 20.0;
    }
    return total + poisson_small(lambda);
}

} // namespace acsbayes
