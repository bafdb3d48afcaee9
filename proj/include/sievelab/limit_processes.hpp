#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "sievelab/errors.hpp"
#include "sievelab/random.hpp"

namespace sievelab {

// Positive stable draw with E e^{-z S} = e^{-z^alpha}, alpha in (0,1)
// (Kanter's representation).
double sample_positive_stable(double alpha, RandomStream& rng);

// Grid-sampled alpha-stable subordinator with Laplace transform
// exp(-Gamma(1-alpha) t z^alpha); values[i] = X(i * step).
struct SubordinatorPath {
    double alpha = 0.5;
    double step = 1e-3;
    std::vector<double> values{0.0};

    double time_at(std::size_t i) const { return static_cast<double>(i) * step; }
    // X evaluated at the last grid point <= t; bias bounded by one increment
    double value_before(double t) const;
    void extend_until(double level, RandomStream& rng, std::size_t max_steps = 100'000'000);
};

SubordinatorPath make_subordinator_path(double alpha, double step);
// fixed horizon, horizon/step grid points
SubordinatorPath sample_subordinator_path(double alpha, double horizon, double step,
                                          RandomStream& rng);

struct InverseEval {
    double value;       // first grid time with X > s
    double bias_bound;  // grid step
};
InverseEval inverse_subordinator_eval(const SubordinatorPath& path, double s);

// E X_alpha^<-(u) = u^alpha / (Gamma(1-alpha) Gamma(1+alpha))
double expected_inverse_crossing(double alpha, double u);

struct MarkedPoint {
    double t;  // time in [0, T]
    double j;  // mark, > delta
};

// Poisson random measure with mean measure LEB x nu_{alpha,c},
// nu_{alpha,c}((x,inf]) = x^{-alpha}/c, truncated to marks above delta.
struct MarkedPointSet {
    double alpha = 0.5, c = 1.0, delta = 1e-3, T = 1.0;
    std::vector<MarkedPoint> points;

    MarkedPointSet thinned(double coarser_delta) const;  // exact subset
};

MarkedPointSet sample_prm(double alpha, double c, double delta, double T, RandomStream& rng);

// R^{(delta)}_{alpha,c}(u): straddle count of PRM points over an independent
// subordinator path. delta <= 0 or step <= 0 pick the defaults
// (delta = 1e-3 u, step = 1e-4 * expected crossing time).
std::uint64_t sample_R(double alpha, double c, double u, RandomStream& rng, double delta = 0.0,
                       double step = 0.0);

// coupled straddle counts at several levels from one path and one point set
std::vector<std::uint64_t> sample_R_joint(double alpha, double c,
                                          const std::vector<double>& u_list, RandomStream& rng,
                                          double delta_rel = 1e-3, double step = 0.0);

// int_{[0,u]} (u-s)^{-gamma} dX_alpha^<-(s) via the time change s = X_alpha(r);
// refines the grid when the path lands too close under the level u.
double sample_frac_integral_inverse(double alpha, double gamma_exp, double u, RandomStream& rng,
                                    double step = 0.0);

struct GaussianGridSample {
    double beta = 0.0;
    std::vector<double> grid;
    std::vector<double> values;
};

// centered Gaussian process with E V(t)V(s) = t^{1-beta} - (t-s)^{1-beta}, s <= t
class GaussianProcessSampler {
public:
    GaussianProcessSampler(double beta, std::vector<double> grid);
    GaussianGridSample sample(RandomStream& rng) const;
    const std::vector<double>& grid() const { return grid_; }

private:
    double beta_;
    std::vector<double> grid_;
    std::vector<double> chol_;  // lower triangular, row major
};

GaussianGridSample sample_V(double beta, const std::vector<double>& grid, RandomStream& rng);

// characteristic function of Z_alpha(1):
// exp{-|z|^alpha Gamma(1-alpha) (cos(pi alpha/2) + i sin(pi alpha/2) sign z)}
std::complex<double> stable_levy_char_fn(double alpha, double z);

// one increment of Z_alpha over dt, alpha in (1,2)
double sample_stable_levy_increment(double alpha, double dt, RandomStream& rng);

// values of Z_alpha at i * step, i = 0 .. horizon/step
std::vector<double> sample_stable_levy_path(double alpha, double horizon, double step,
                                            RandomStream& rng);

enum class Driver { brownian, stable };

// int_{[0,u]} (u-s)^{-beta} dZ(s); Riemann-Stieltjes with the grid refined
// geometrically toward s = u
double sample_frac_integral_levy(Driver driver, double alpha, double beta, double u,
                                 double step, RandomStream& rng);

}  // namespace sievelab
