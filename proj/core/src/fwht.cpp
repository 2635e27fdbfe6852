#include "robq/fwht.hpp"

#include "robq/errors.hpp"

#include <string>

namespace robq {

void fwht_inplace(std::span<double> v) {
  const std::size_t n = v.size();
  if (!is_power_of_two(n)) {
    throw DimensionError("fwht: length " + std::to_string(n) + " is not a power of two");
  }
  double* data = v.data();
  for (std::size_t half = 1; half < n; half <<= 1) {
    for (std::size_t block = 0; block < n; block += 2 * half) {
      double* lo = data + block;
      double* hi = lo + half;
      for (std::size_t j = 0; j < half; ++j) {
        const double a = lo[j];
        const double b = hi[j];
        lo[j] = a + b;
        hi[j] = a - b;
      }
    }
  }
}

Vector fwht(const Vector& v) {
  Vector out = v;
  fwht_inplace(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

}  // namespace robq
