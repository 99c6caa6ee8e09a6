#pragma once

#include "xdr/core/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace xdr {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream splitting: the same (base, tags...) always yields the
/// same child seed, independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(base, tags));
}

Vector standard_normal(Rng& rng, int n);

std::string rng_state(const Rng& rng);
Rng rng_from_state(const std::string& state);

}  // namespace xdr
