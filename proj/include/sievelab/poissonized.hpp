#pragma once

#include <cstdint>

#include "sievelab/sieve_engine.hpp"

namespace sievelab {

struct PoissonizedRun {
    double t = 0.0;             // intensity horizon
    std::uint64_t N = 0;        // realized Poisson(t) ball count
    OccupancySnapshot snapshot;          // at N balls
    OccupancySnapshot coupled_snapshot;  // at [t] balls, same ball stream
};

// Poisson(t) ball count on the shared environment; both snapshots are prefix
// statistics of one ball stream. K = M = L = 0 when a count realizes as zero.
PoissonizedRun poissonized_occupancy(Environment& env, double t, RandomStream& rng,
                                     std::uint64_t capacity = kDefaultBallCapacity);

// L(t) - L_{[t]} from one coupled run
std::int64_t depoisson_gap(Environment& env, double t, RandomStream& rng,
                           std::uint64_t capacity = kDefaultBallCapacity);

// L(e^t) under a Poisson(e^t) count minus rho(t), both on the same environment
std::int64_t poissonization_gap(Environment& env, double t, RandomStream& rng,
                                std::uint64_t capacity = kDefaultBallCapacity);

// Monte Carlo estimate of the renewal function U(t) = E nu(t); one fresh
// environment per repetition, seeds drawn from rng
double renewal_U_estimate(const FactorFamily& family, double t, std::size_t reps,
                          RandomStream& rng);

}  // namespace sievelab
