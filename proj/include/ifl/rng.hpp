#pragma once

// Portable seeded randomness. std::mt19937_64 output is fixed by the
// standard; the real-valued conversions below are spelled out here because
// the <random> distributions are implementation-defined.

#include <cstdint>
#include <random>
#include <string_view>

namespace ifl::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// FNV-1a, used to fold string purposes into seeds.
constexpr std::uint64_t hash(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Independent stream seed for (seed, index, purpose).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::string_view purpose = {}) {
  return splitmix64(splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019ull)) ^ hash(purpose));
}

// [0, 1) with 53 random bits.
inline double uniform01(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

inline double uniform(Engine& e, double lo, double hi) { return lo + (hi - lo) * uniform01(e); }

// Box-Muller; consumes two draws per call.
double standard_normal(Engine& e);

// Uniform integer in [0, bound] without modulo bias.
std::uint64_t uniform_int(Engine& e, std::uint64_t bound);

}  // namespace ifl::rng
