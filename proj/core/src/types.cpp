#include "robq/types.hpp"

#include "robq/errors.hpp"

#include <string>

namespace robq {

void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw ParameterError(std::string(what) + ": non-finite entry");
  }
}

void require_length(const Eigen::Ref<const Vector>& v, std::size_t n, std::string_view what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) +
                         ", got " + std::to_string(v.size()));
  }
}

}  // namespace robq
