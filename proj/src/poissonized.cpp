#include "sievelab/poissonized.hpp"

#include <algorithm>
#include <cmath>

namespace sievelab {

PoissonizedRun poissonized_occupancy(Environment& env, double t, RandomStream& rng,
                                     std::uint64_t capacity) {
    if (!(t > 0.0)) throw ValidationError("poissonized horizon must be positive");
    const std::uint64_t fixed = static_cast<std::uint64_t>(std::floor(t));
    const std::uint64_t N = rng.poisson(t);

    std::vector<std::uint64_t> grid{std::min(N, fixed)};
    if (N != fixed) grid.push_back(std::max(N, fixed));
    const auto snaps = simulate_occupancy(env, grid, rng, capacity);

    PoissonizedRun run;
    run.t = t;
    run.N = N;
    run.snapshot = N <= fixed ? snaps.front() : snaps.back();
    run.coupled_snapshot = N <= fixed ? snaps.back() : snaps.front();
    return run;
}

std::int64_t depoisson_gap(Environment& env, double t, RandomStream& rng,
                           std::uint64_t capacity) {
    const PoissonizedRun run = poissonized_occupancy(env, t, rng, capacity);
    return static_cast<std::int64_t>(run.snapshot.L) -
           static_cast<std::int64_t>(run.coupled_snapshot.L);
}

std::int64_t poissonization_gap(Environment& env, double t, RandomStream& rng,
                                std::uint64_t capacity) {
    if (!(t > 0.0)) throw ValidationError("poissonization horizon must be positive");
    const double horizon = std::exp(t);
    if (horizon > static_cast<double>(capacity)) {
        throw CapacityExceededError("e^t beyond configured ball capacity");
    }
    const std::uint64_t N = rng.poisson(horizon);
    OccupancySnapshot snap{0, 0, 0, 0};
    if (N > 0) snap = simulate_occupancy(env, {N}, rng, capacity).front();
    const std::uint64_t rho = env.renewal_functional(t);
    return static_cast<std::int64_t>(snap.L) - static_cast<std::int64_t>(rho);
}

double renewal_U_estimate(const FactorFamily& family, double t, std::size_t reps,
                          RandomStream& rng) {
    if (!(t >= 0.0)) throw ValidationError("renewal horizon must be nonnegative");
    double acc = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        Environment env(family, rng.next_u64());
        acc += static_cast<double>(env.nu(t));
    }
    return acc / static_cast<double>(reps);
}

}  // namespace sievelab
