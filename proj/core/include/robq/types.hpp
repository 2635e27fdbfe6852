#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace robq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Throws DimensionError / ParameterError on bad input. Every public entry
// point that accepts caller data runs these before touching it.
void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view what);
void require_length(const Eigen::Ref<const Vector>& v, std::size_t n, std::string_view what);

// Dataset of n points in R^d, stored one point per row.
inline std::size_t point_count(const Matrix& X) { return static_cast<std::size_t>(X.rows()); }
inline std::size_t point_dim(const Matrix& X) { return static_cast<std::size_t>(X.cols()); }

}  // namespace robq
