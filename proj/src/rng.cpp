#include "ifl/rng.hpp"

#include <cmath>
#include <numbers>

namespace ifl::rng {

double standard_normal(Engine& e) {
  const double u1 = 1.0 - uniform01(e);  // (0, 1]
  const double u2 = uniform01(e);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t uniform_int(Engine& e, std::uint64_t bound) {
  if (bound == ~std::uint64_t{0}) return e();
  const std::uint64_t range = bound + 1;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
  std::uint64_t v;
  do v = e();
  while (v >= limit);
  return v % range;
}

}  // namespace ifl::rng
