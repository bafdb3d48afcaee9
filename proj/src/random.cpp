#include "sievelab/random.hpp"

namespace sievelab {

namespace {

// Hoermann's PTRD (transformed rejection with decomposition), exact for mean >= 10.
std::uint64_t poisson_ptrd(RandomStream& rng, double mu) {
    const double smu = std::sqrt(mu);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);

    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        double us = 0.5 - std::fabs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        double k = kf;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mu - mu - std::lgamma(k + 1.0)) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

std::uint64_t poisson_inversion(RandomStream& rng, double mu) {
    const double p0 = std::exp(-mu);
    double p = p0;
    double f = rng.uniform();
    std::uint64_t k = 0;
    while (f > p) {
        f -= p;
        ++k;
        p = p * mu / static_cast<double>(k);
        if (p <= 0.0) break;  // numerical floor; unreachable for mu <= 30
    }
    return k;
}

}  // namespace

std::uint64_t RandomStream::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean <= 30.0) return poisson_inversion(*this, mean);
    return poisson_ptrd(*this, mean);
}

}  // namespace sievelab
