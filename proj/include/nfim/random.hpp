#pragma once

#include <cstdint>
#include <random>

namespace nfim {

using Rng = std::mt19937_64;

/// Child seed for stream `index` of `seed`. Per-sample streams keep estimator
/// output independent of how samples are scheduled across workers.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) { return Rng(derive_seed(seed, index)); }

double standard_normal(Rng& rng);

/// Poisson draw; mean 0 yields 0.
int poisson(Rng& rng, double mean);

}  // namespace nfim
