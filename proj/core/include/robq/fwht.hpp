#pragma once

#include "robq/types.hpp"

#include <cstddef>
#include <span>

namespace robq {

constexpr bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place unnormalized Walsh-Hadamard transform: v <- H_d v with
// H_1 = [1], H_d = [H_{d/2} H_{d/2}; H_{d/2} -H_{d/2}]. O(d log d).
// Throws DimensionError unless v.size() is a power of two.
void fwht_inplace(std::span<double> v);

Vector fwht(const Vector& v);

}  // namespace robq
