#include "sievelab/factor_models.hpp"

#include <algorithm>
#include <cmath>

namespace sievelab {

namespace {

constexpr double kCrossBound = 0.45867514538708193;  // |log(1 - e^{-1})|

template <typename F>
double simpson(F&& f, double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

template <typename F>
double adaptive_simpson_rec(F&& f, double a, double b, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double l = simpson(f, a, m);
    const double r = simpson(f, m, b);
    if (depth <= 0 || std::fabs(l + r - whole) <= 15.0 * tol) {
        return l + r + (l + r - whole) / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, l, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, r, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12) {
    if (!(b > a)) return 0.0;
    return adaptive_simpson_rec(f, a, b, simpson(f, a, b), tol, 48);
}

// |log(1 - exp(-v))| for v >= 1; decays like exp(-v)
double cross_log(double v) {
    const double e = std::exp(-v);
    return e > 0.0 ? -std::log1p(-e) : 0.0;
}

}  // namespace

TailSpec TailSpec::pareto(double a) {
    if (!(a > 0.0)) throw ValidationError("pareto tail index must be > 0");
    return TailSpec{TailKind::pareto, a, 0.0};
}
TailSpec TailSpec::pareto2_logvariance() {
    return TailSpec{TailKind::pareto2_logvariance, 2.0, 0.0};
}
TailSpec TailSpec::slow_logtail() { return TailSpec{TailKind::slow_logtail, 0.0, 0.0}; }
TailSpec TailSpec::slow_loglogtail() { return TailSpec{TailKind::slow_loglogtail, 0.0, 0.0}; }
TailSpec TailSpec::point_mass_at(double v) {
    if (!(v >= 1.0)) throw ValidationError("point mass must sit in [1, inf)");
    return TailSpec{TailKind::point_mass, 0.0, v};
}

double TailSpec::tail(double x) const {
    if (x < 1.0) return 1.0;
    switch (kind) {
        case TailKind::pareto:
            return std::pow(x, -alpha);
        case TailKind::pareto2_logvariance:
            return 1.0 / (x * x);
        case TailKind::slow_logtail:
            return 1.0 / (1.0 + std::log(x));
        case TailKind::slow_loglogtail:
            return 1.0 / (1.0 + std::log1p(std::log(x)));
        case TailKind::point_mass:
            return x < value ? 1.0 : 0.0;
    }
    return 0.0;
}

double TailSpec::quantile(double u) const {
    switch (kind) {
        case TailKind::pareto:
            return std::pow(u, -1.0 / alpha);
        case TailKind::pareto2_logvariance:
            return 1.0 / std::sqrt(u);
        case TailKind::slow_logtail:
            return std::min(std::exp(1.0 / u - 1.0), 1e300);
        case TailKind::slow_loglogtail: {
            const double inner = std::exp(1.0 / u - 1.0) - 1.0;
            return inner > 690.0 ? 1e300 : std::exp(inner);
        }
        case TailKind::point_mass:
            return value;
    }
    return 1.0;
}

double TailSpec::index() const {
    switch (kind) {
        case TailKind::pareto:
            return alpha;
        case TailKind::pareto2_logvariance:
            return 2.0;
        case TailKind::slow_logtail:
        case TailKind::slow_loglogtail:
            return 0.0;
        case TailKind::point_mass:
            return kInf;
    }
    return kInf;
}

double TailSpec::mean() const {
    switch (kind) {
        case TailKind::pareto:
            return alpha > 1.0 ? alpha / (alpha - 1.0) : kInf;
        case TailKind::pareto2_logvariance:
            return 2.0;
        case TailKind::slow_logtail:
        case TailKind::slow_loglogtail:
            return kInf;
        case TailKind::point_mass:
            return value;
    }
    return kInf;
}

double TailSpec::second_moment() const {
    switch (kind) {
        case TailKind::pareto:
            return alpha > 2.0 ? alpha / (alpha - 2.0) : kInf;
        case TailKind::pareto2_logvariance:
        case TailKind::slow_logtail:
        case TailKind::slow_loglogtail:
            return kInf;
        case TailKind::point_mass:
            return value * value;
    }
    return kInf;
}

double TailSpec::trunc_second_moment(double x) const {
    if (x < 1.0) return 0.0;
    switch (kind) {
        case TailKind::pareto:
            if (alpha == 2.0) return 2.0 * std::log(x);
            return alpha * (std::pow(x, 2.0 - alpha) - 1.0) / (2.0 - alpha);
        case TailKind::pareto2_logvariance:
            return 2.0 * std::log(x);
        case TailKind::slow_logtail:
        case TailKind::slow_loglogtail: {
            // E[V^2 1{V<=x}] = 1 - x^2 tail(x) + int_1^x 2v tail(v) dv
            const double lx = std::log(x);
            const double integral = adaptive_simpson(
                [this](double y) { return 2.0 * std::exp(2.0 * y) * tail(std::exp(y)); }, 0.0,
                lx, 1e-10 * std::max(1.0, x * x * tail(x)));
            return 1.0 - x * x * tail(x) + integral;
        }
        case TailKind::point_mass:
            return value <= x ? value * value : 0.0;
    }
    return 0.0;
}

FactorFamily::FactorFamily(double p, double q, TailSpec left, TailSpec right, double w0)
    : p_(p), q_(q), w0_(w0), left_(left), right_(right) {
    if (!(p >= 0.0 && q >= 0.0 && p + q <= 1.0 + 1e-15)) {
        throw ValidationError("branch weights need p, q >= 0 and p + q <= 1");
    }
    if (!(w0 > 0.0 && w0 < 1.0)) throw ValidationError("filler w0 must lie in (0,1)");
    cross_mean_right_ = q_ > 0.0 ? cross_expect(right_, false) : 0.0;
    cross_m2_right_ = q_ > 0.0 ? cross_expect(right_, true) : 0.0;

    // int_0^1 tail_G, split at the discontinuity/kink points
    std::vector<double> cuts{0.0, 1.0};
    const double filler_eta = -std::log1p(-w0_);
    if (filler_eta < 1.0) cuts.push_back(filler_eta);
    if (p_ > 0.0 && left_.kind == TailKind::point_mass) {
        const double img = cross_log(left_.value);
        if (img < 1.0) cuts.push_back(img);
    }
    cuts.push_back(kCrossBound);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        acc += adaptive_simpson([this](double y) { return tail_G(y); }, cuts[i], cuts[i + 1],
                                1e-11);
    }
    integral_tail_G_01_ = acc;
}

double FactorFamily::cross_expect(const TailSpec& spec, bool squared) const {
    // E f(V) with f(v) = |log(1 - e^{-v})| (or its square), V ~ spec on [1, inf)
    if (spec.kind == TailKind::point_mass) {
        const double h = cross_log(spec.value);
        return squared ? h * h : h;
    }
    // E f(V) = f(1) + int_1^inf f'(v) P{V > v} dv; the integrand dies like e^{-v}
    auto deriv = [squared](double v) {
        const double e = std::exp(-v);
        const double h = -std::log1p(-e);
        const double hp = -e / (1.0 - e);
        return squared ? 2.0 * h * hp : hp;
    };
    const double f1 = squared ? kCrossBound * kCrossBound : kCrossBound;
    return f1 + adaptive_simpson([&](double v) { return deriv(v) * spec.tail(v); }, 1.0, 60.0,
                                 1e-13);
}

double FactorFamily::sample_factor(RandomStream& rng) const {
    const LogPair lp = sample_log_pair(rng);
    double w = std::exp(-lp.vlog);
    if (w <= 0.0) w = std::numeric_limits<double>::min();
    if (w >= 1.0) w = 1.0 - 1e-16;
    return w;
}

LogPair FactorFamily::sample_log_pair(RandomStream& rng) const {
    const double b = rng.uniform();
    if (b < p_) {
        const double v = left_.quantile(rng.uniform());
        return {v, cross_log(v)};
    }
    if (b < p_ + q_) {
        const double v = right_.quantile(rng.uniform());
        return {cross_log(v), v};
    }
    return {-std::log(w0_), -std::log1p(-w0_)};
}

double FactorFamily::tail_F(double x) const {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return p_ * left_.tail(x);
    // below 1 the right branch and filler contribute through |log W| < 1
    const double img = -std::log1p(-std::exp(-x));  // |log W| > x  <=>  V2 < img
    double acc = p_;
    acc += q_ * (1.0 - right_.tail(img));
    if (-std::log(w0_) > x) acc += 1.0 - p_ - q_;
    return acc;
}

double FactorFamily::tail_G(double y) const {
    if (y <= 0.0) return 1.0;
    if (y >= 1.0) return q_ * right_.tail(y);
    const double img = -std::log1p(-std::exp(-y));
    double acc = q_;
    acc += p_ * (1.0 - left_.tail(img));
    if (-std::log1p(-w0_) > y) acc += 1.0 - p_ - q_;
    return acc;
}

double FactorFamily::mean_log_factor() const {
    if (p_ > 0.0 && !std::isfinite(left_.mean())) return kInf;
    double acc = (1.0 - p_ - q_) * (-std::log(w0_));
    if (p_ > 0.0) acc += p_ * left_.mean();
    acc += q_ * cross_mean_right_;
    return acc;
}

double FactorFamily::variance_log_factor() const {
    const double mu = mean_log_factor();
    if (!std::isfinite(mu)) return kInf;
    if (p_ > 0.0 && !std::isfinite(left_.second_moment())) return kInf;
    double m2 = (1.0 - p_ - q_) * std::log(w0_) * std::log(w0_);
    if (p_ > 0.0) m2 += p_ * left_.second_moment();
    m2 += q_ * cross_m2_right_;
    return m2 - mu * mu;
}

double FactorFamily::trunc_second_moment(double x) const {
    if (!(x >= 1.0)) throw ValidationError("trunc_second_moment needs x >= 1");
    // right branch and filler have |log W| < 1, so they are fully inside
    double acc = (1.0 - p_ - q_) * std::log(w0_) * std::log(w0_);
    acc += q_ * cross_m2_right_;
    acc += p_ * left_.trunc_second_moment(x);
    return acc;
}

double FactorFamily::norming_c(double t) const {
    if (p_ <= 0.0) throw NoRootError("norming_c needs a heavy left branch");
    const bool second_moment_mode = left_.kind == TailKind::pareto2_logvariance;
    const double alpha = second_moment_mode ? 2.0 : left_.index();
    if (!std::isfinite(alpha) || alpha <= 0.0) {
        throw NoRootError("left tail index unusable for norming_c");
    }
    if (!second_moment_mode && left_.kind == TailKind::pareto) {
        return std::pow(p_ * t, 1.0 / alpha);  // l(x) == p exactly
    }
    auto ell = [&](double c) {
        return second_moment_mode ? trunc_second_moment(c) : std::pow(c, alpha) * tail_F(c);
    };
    auto h = [&](double c) { return t * ell(c) / std::pow(c, alpha); };
    double lo = 1.0, hi = 1e12;
    if (h(lo) < 1.0 || h(hi) > 1.0) {
        throw NoRootError("no bracket for norming_c on [1, 1e12]");
    }
    for (int i = 0; i < 200 && (hi - lo) > 1e-10 * lo; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) >= 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double FactorFamily::integral_tail_G(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= 1.0) {
        return adaptive_simpson([this](double y) { return tail_G(y); }, 0.0, t, 1e-11);
    }
    double upper;
    switch (right_.kind) {
        case TailKind::pareto:
        case TailKind::pareto2_logvariance: {
            const double b = right_.index();
            upper = b == 1.0 ? q_ * std::log(t) : q_ * (std::pow(t, 1.0 - b) - 1.0) / (1.0 - b);
            break;
        }
        case TailKind::point_mass:
            upper = q_ * (std::min(t, right_.value) - 1.0);
            break;
        default:
            upper = q_ * adaptive_simpson([this](double y) { return right_.tail(y); }, 1.0, t,
                                          1e-11);
            break;
    }
    return integral_tail_G_01_ + upper;
}

double FactorFamily::norming_q(double t) const {
    const double mu = mean_log_factor();
    if (!std::isfinite(mu)) throw InfiniteMeanError("norming_q needs E|log W| < inf");
    return std::sqrt(integral_tail_G(t) / mu);
}

double FactorFamily::norming_g(double t, Theorem3Case c) const {
    const double mu = mean_log_factor();
    if (!std::isfinite(mu)) throw InfiniteMeanError("norming_g needs E|log W| < inf");
    switch (c) {
        case Theorem3Case::a: {
            const double s2 = variance_log_factor();
            if (!std::isfinite(s2)) throw InfiniteMeanError("case (a) needs Var(log W) < inf");
            return std::sqrt(s2 * t / (mu * mu * mu)) * tail_G(t);
        }
        case Theorem3Case::b2:
            return std::pow(mu, -1.5) * norming_c(t) * tail_G(t);
        case Theorem3Case::c2: {
            const double alpha = left_.index();
            return std::pow(mu, -1.0 - 1.0 / alpha) * norming_c(t) * tail_G(t);
        }
        default:
            throw ValidationError("norming_g applies to cases a, b2, c2");
    }
}

double FactorFamily::theorem2_ratio(double t) const {
    if (!(t >= 1.0)) throw ValidationError("theorem2_ratio needs t >= 1");
    return tail_F(t) / tail_G(t);
}

TailProfile FactorFamily::profile() const {
    TailProfile pr{};
    pr.alpha = p_ > 0.0 ? left_.index() : kInf;
    pr.beta = q_ > 0.0 ? right_.index() : kInf;
    pr.c_ratio = (std::isfinite(pr.alpha) && pr.alpha == pr.beta) ? p_ / q_ : 0.0;
    pr.mu = mean_log_factor();
    pr.sigma2 = variance_log_factor();
    return pr;
}

}  // namespace sievelab
