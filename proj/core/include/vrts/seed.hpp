#pragma once

#include <cstdint>
#include <string_view>

namespace vrts {

// 64-bit FNV-1a. Stable across platforms; used for config hashes and seeds.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Sub-seed derivation. Serial and parallel callers derive identical seeds from
// the same key path, so execution order never changes results.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t a = 0,
                          std::uint64_t b = 0);

}  // namespace vrts
