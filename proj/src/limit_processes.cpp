#include "sievelab/limit_processes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sievelab {

namespace {

constexpr double kPi = std::numbers::pi;

double subordinator_increment_scale(double alpha, double step) {
    return std::pow(std::tgamma(1.0 - alpha) * step, 1.0 / alpha);
}

double default_inverse_step(double alpha, double u) {
    return 1e-4 * expected_inverse_crossing(alpha, u);
}

}  // namespace

double sample_positive_stable(double alpha, RandomStream& rng) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("positive stable index must lie in (0,1)");
    }
    const double u = kPi * rng.uniform();
    const double e = rng.exponential();
    const double a = std::sin((1.0 - alpha) * u) *
                     std::pow(std::sin(alpha * u), alpha / (1.0 - alpha)) /
                     std::pow(std::sin(u), 1.0 / (1.0 - alpha));
    return std::pow(a / e, (1.0 - alpha) / alpha);
}

double SubordinatorPath::value_before(double t) const {
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t / step),
                                                values.size() - 1);
    return values[i];
}

void SubordinatorPath::extend_until(double level, RandomStream& rng, std::size_t max_steps) {
    const double scale = subordinator_increment_scale(alpha, step);
    while (values.back() <= level) {
        if (values.size() > max_steps) {
            throw GridTooFineError("subordinator path exceeded step budget");
        }
        values.push_back(values.back() + scale * sample_positive_stable(alpha, rng));
    }
}

SubordinatorPath make_subordinator_path(double alpha, double step) {
    if (!(step > 0.0)) throw ValidationError("grid step must be positive");
    SubordinatorPath path;
    path.alpha = alpha;
    path.step = step;
    return path;
}

SubordinatorPath sample_subordinator_path(double alpha, double horizon, double step,
                                          RandomStream& rng) {
    SubordinatorPath path = make_subordinator_path(alpha, step);
    if (horizon <= 0.0) return path;
    const double n_steps = std::ceil(horizon / step);
    if (n_steps > 1e7) throw GridTooFineError("more than 1e7 grid points requested");
    const double scale = subordinator_increment_scale(alpha, step);
    const std::size_t n = static_cast<std::size_t>(n_steps);
    path.values.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        path.values.push_back(path.values.back() + scale * sample_positive_stable(alpha, rng));
    }
    return path;
}

InverseEval inverse_subordinator_eval(const SubordinatorPath& path, double s) {
    auto it = std::upper_bound(path.values.begin(), path.values.end(), s);
    if (it == path.values.end()) {
        throw NotCoveredError("path never exceeds the requested level");
    }
    const std::size_t i = static_cast<std::size_t>(it - path.values.begin());
    return {path.time_at(i), path.step};
}

double expected_inverse_crossing(double alpha, double u) {
    return std::pow(u, alpha) / (std::tgamma(1.0 - alpha) * std::tgamma(1.0 + alpha));
}

MarkedPointSet MarkedPointSet::thinned(double coarser_delta) const {
    MarkedPointSet out = *this;
    out.delta = coarser_delta;
    out.points.clear();
    for (const auto& pt : points) {
        if (pt.j > coarser_delta) out.points.push_back(pt);
    }
    return out;
}

MarkedPointSet sample_prm(double alpha, double c, double delta, double T, RandomStream& rng) {
    if (!(delta > 0.0 && T > 0.0 && c > 0.0)) {
        throw ValidationError("sample_prm needs delta, T, c > 0");
    }
    MarkedPointSet set;
    set.alpha = alpha;
    set.c = c;
    set.delta = delta;
    set.T = T;
    const double mean = T * std::pow(delta, -alpha) / c;
    const std::uint64_t n = rng.poisson(mean);
    set.points.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double t = T * rng.uniform();
        const double j = delta * std::pow(rng.uniform(), -1.0 / alpha);
        set.points.push_back({t, j});
    }
    return set;
}

std::uint64_t sample_R(double alpha, double c, double u, RandomStream& rng, double delta,
                       double step) {
    const auto counts = sample_R_joint(alpha, c, {u}, rng,
                                       delta > 0.0 ? delta / u : 1e-3, step);
    return counts.front();
}

std::vector<std::uint64_t> sample_R_joint(double alpha, double c,
                                          const std::vector<double>& u_list, RandomStream& rng,
                                          double delta_rel, double step) {
    if (u_list.empty()) return {};
    const double u_max = *std::max_element(u_list.begin(), u_list.end());
    const double u_min = *std::min_element(u_list.begin(), u_list.end());
    if (step <= 0.0) step = default_inverse_step(alpha, u_max);

    SubordinatorPath path = make_subordinator_path(alpha, step);
    path.extend_until(u_max, rng);
    const double tau_max = inverse_subordinator_eval(path, u_max).value;

    // one point set at the finest truncation; per-level counts use thinning
    const MarkedPointSet set = sample_prm(alpha, c, delta_rel * u_min, tau_max + step, rng);

    std::vector<std::uint64_t> counts;
    counts.reserve(u_list.size());
    for (double u : u_list) {
        const double delta_u = delta_rel * u;
        std::uint64_t r = 0;
        for (const auto& pt : set.points) {
            if (pt.j <= delta_u) continue;
            const double x = path.value_before(pt.t);
            if (x <= u && u < x + pt.j) ++r;
        }
        counts.push_back(r);
    }
    return counts;
}

double sample_frac_integral_inverse(double alpha, double gamma_exp, double u, RandomStream& rng,
                                    double step) {
    if (!(alpha > 0.0 && alpha < 1.0) || !(gamma_exp >= 0.0 && gamma_exp < 1.0)) {
        throw ValidationError("need alpha in (0,1) and exponent in [0,1)");
    }
    if (step <= 0.0) step = default_inverse_step(alpha, u);
    for (int attempt = 0; attempt < 10; ++attempt, step *= 0.5) {
        SubordinatorPath path = make_subordinator_path(alpha, step);
        path.extend_until(u, rng);
        const std::size_t cross = path.values.size() - 1;  // first index with X > u
        // the path must cross u by a clear jump, else the kernel sum is unreliable
        if (u - path.values[cross - 1] < 10.0 * std::pow(step, 1.0 / alpha)) continue;
        double acc = 0.0;
        for (std::size_t i = 0; i < cross; ++i) {
            acc += std::pow(u - path.values[i], -gamma_exp);
        }
        return acc * step;
    }
    throw GridTooCoarseError("no clean level crossing after repeated refinement");
}

GaussianProcessSampler::GaussianProcessSampler(double beta, std::vector<double> grid)
    : beta_(beta), grid_(std::move(grid)) {
    if (!(beta_ >= 0.0 && beta_ < 1.0)) throw ValidationError("beta must lie in [0,1)");
    const std::size_t m = grid_.size();
    if (m == 0 || m > 2000) throw ValidationError("grid size must be in [1, 2000]");
    for (std::size_t i = 0; i < m; ++i) {
        if (grid_[i] <= 0.0 || (i > 0 && grid_[i] <= grid_[i - 1])) {
            throw ValidationError("grid must be positive and strictly ascending");
        }
    }
    // cov(s,t) = t^{1-b} - (t-s)^{1-b} for s <= t
    std::vector<double> cov(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double t = grid_[i], s = grid_[j];
            const double v = std::pow(t, 1.0 - beta_) - std::pow(t - s, 1.0 - beta_);
            cov[i * m + j] = cov[j * m + i] = v;
        }
    }
    double max_diag = 0.0;
    for (std::size_t i = 0; i < m; ++i) max_diag = std::max(max_diag, cov[i * m + i]);
    for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
        std::vector<double> a = cov;
        for (std::size_t i = 0; i < m; ++i) a[i * m + i] += jitter * max_diag;
        chol_.assign(m * m, 0.0);
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double sum = a[i * m + j];
                for (std::size_t k = 0; k < j; ++k) sum -= chol_[i * m + k] * chol_[j * m + k];
                if (i == j) {
                    if (sum <= 0.0) {
                        ok = false;
                        break;
                    }
                    chol_[i * m + i] = std::sqrt(sum);
                } else {
                    chol_[i * m + j] = sum / chol_[j * m + j];
                }
            }
        }
        if (ok) return;
    }
    throw NotPsdError("covariance not positive definite after jitter escalation");
}

GaussianGridSample GaussianProcessSampler::sample(RandomStream& rng) const {
    const std::size_t m = grid_.size();
    std::vector<double> z(m);
    for (auto& x : z) x = rng.normal();
    GaussianGridSample out;
    out.beta = beta_;
    out.grid = grid_;
    out.values.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) acc += chol_[i * m + j] * z[j];
        out.values[i] = acc;
    }
    return out;
}

GaussianGridSample sample_V(double beta, const std::vector<double>& grid, RandomStream& rng) {
    return GaussianProcessSampler(beta, grid).sample(rng);
}

std::complex<double> stable_levy_char_fn(double alpha, double z) {
    if (z == 0.0) return {1.0, 0.0};
    const double g = std::tgamma(1.0 - alpha);
    const double mag = std::pow(std::fabs(z), alpha) * g;
    const std::complex<double> exponent(-mag * std::cos(kPi * alpha / 2.0),
                                        -mag * std::sin(kPi * alpha / 2.0) * (z > 0 ? 1 : -1));
    return std::exp(exponent);
}

double sample_stable_levy_increment(double alpha, double dt, RandomStream& rng) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw ValidationError("stable index must lie in (1,2)");
    // Chambers-Mallows-Stuck for the S(alpha, beta=-1, scale, 0) law matching the
    // target characteristic function; Gamma(1-alpha) < 0 and cos(pi alpha/2) < 0
    // here, so the scale is real and positive.
    const double tan_half = std::tan(kPi * alpha / 2.0);
    const double b0 = std::atan(-tan_half) / alpha;
    const double s_ab = std::pow(1.0 + tan_half * tan_half, 0.5 / alpha);
    const double scale =
        std::pow(std::tgamma(1.0 - alpha) * std::cos(kPi * alpha / 2.0), 1.0 / alpha);

    const double v = kPi * (rng.uniform() - 0.5);
    const double e = rng.exponential();
    const double x = s_ab * std::sin(alpha * (v + b0)) / std::pow(std::cos(v), 1.0 / alpha) *
                     std::pow(std::cos(v - alpha * (v + b0)) / e, (1.0 - alpha) / alpha);
    return std::pow(dt, 1.0 / alpha) * scale * x;
}

std::vector<double> sample_stable_levy_path(double alpha, double horizon, double step,
                                            RandomStream& rng) {
    if (!(step > 0.0 && horizon >= 0.0)) throw ValidationError("bad path grid");
    std::vector<double> values{0.0};
    const std::size_t n = static_cast<std::size_t>(std::ceil(horizon / step));
    values.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        values.push_back(values.back() + sample_stable_levy_increment(alpha, step, rng));
    }
    return values;
}

double sample_frac_integral_levy(Driver driver, double alpha, double beta, double u,
                                 double step, RandomStream& rng) {
    if (driver == Driver::stable) {
        if (!(beta >= 0.0 && beta <= 2.0 / alpha - 1.0)) {
            throw ValidationError("stable driver needs beta in [0, 2/alpha - 1]");
        }
    } else if (!(beta >= 0.0 && beta < 0.5)) {
        throw ValidationError("brownian driver needs beta in [0, 1/2)");
    }
    if (step <= 0.0) step = 1e-4 * u;
    auto increment = [&](double dt) {
        return driver == Driver::brownian ? std::sqrt(dt) * rng.normal()
                                          : sample_stable_levy_increment(alpha, dt, rng);
    };
    // left-endpoint kernel; the last decades toward s = u get a 10x finer step each
    const double seg_bounds[] = {0.0, 0.9 * u, 0.99 * u, 0.999 * u, u};
    double acc = 0.0;
    double h = step;
    for (int seg = 0; seg < 4; ++seg, h *= 0.1) {
        double s = seg_bounds[seg];
        const double end = seg_bounds[seg + 1];
        while (s < end - 1e-15 * u) {
            const double dt = std::min(h, end - s);
            acc += std::pow(u - s, -beta) * increment(dt);
            s += dt;
        }
    }
    return acc;
}

}  // namespace sievelab
