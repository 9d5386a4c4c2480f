#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedsurv {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Derive an independent sub-seed from a root seed and a path of stream
/// identifiers, e.g. derive_seed(seed, {experiment, replicate, site}).
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

/// Generator for one stream; every stream with a distinct path is independent.
Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path);

}  // namespace fedsurv
