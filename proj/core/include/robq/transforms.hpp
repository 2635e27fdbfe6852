#pragma once

#include "robq/rng.hpp"
#include "robq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace robq {

// Dense m x d map with i.i.d. N(0, 1/m) entries.
class GaussianJlMap {
 public:
  GaussianJlMap(std::size_t m, std::size_t d, std::uint64_t seed);

  Vector apply(const Vector& x) const;

  std::size_t rows() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(matrix_.cols()); }
  std::uint64_t seed() const { return seed_; }
  const Matrix& matrix() const { return matrix_; }

 private:
  std::uint64_t seed_;
  Matrix matrix_;
};

// P H D: random +-1 diagonal, unnormalized Walsh-Hadamard transform on the
// zero-padded input, then m rows sampled uniformly with replacement and
// scaled by 1/sqrt(m). Equivalently sqrt(d_pad/m) times rows of the
// orthonormal Hadamard matrix, which keeps E||Px||^2 = ||x||^2.
class FastJlMap {
 public:
  FastJlMap(std::size_t m, std::size_t d, std::uint64_t seed);

  Vector apply(const Vector& x) const;

  std::size_t rows() const { return sampled_rows_.size(); }
  std::size_t cols() const { return d_; }
  std::size_t padded_dim() const { return d_pad_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& signs() const { return signs_; }
  const std::vector<std::uint32_t>& sampled_rows() const { return sampled_rows_; }
  double scale() const { return scale_; }

 private:
  std::uint64_t seed_;
  std::size_t d_;
  std::size_t d_pad_;
  std::vector<double> signs_;
  std::vector<std::uint32_t> sampled_rows_;
  double scale_;
};

// h(z) = [H D^1 z; ...; H D^m z] with H unnormalized and each D^j an
// i.i.d. N(0, 1) diagonal, so every output coordinate is N(0, ||z||^2).
class SrhtStack {
 public:
  SrhtStack(std::size_t blocks, std::size_t d, std::uint64_t seed);
  // Explicit diagonals, each of length next_power_of_two(d).
  SrhtStack(std::size_t d, std::vector<Vector> diagonals);

  Vector apply(const Vector& z) const;

  std::size_t blocks() const { return diagonals_.size(); }
  std::size_t input_dim() const { return d_; }
  std::size_t padded_dim() const { return d_pad_; }
  std::size_t output_dim() const { return diagonals_.size() * d_pad_; }
  const std::vector<Vector>& diagonals() const { return diagonals_; }

 private:
  std::size_t d_;
  std::size_t d_pad_;
  std::vector<Vector> diagonals_;
};

Vector jl_apply(const GaussianJlMap& map, const Vector& x);
Vector jl_apply(const FastJlMap& map, const Vector& x);
Vector srht_apply(const SrhtStack& h, const Vector& z);

// Target dimensions from the frozen constants.
std::size_t gaussian_jl_rows(double eps);
std::size_t fast_jl_rows(std::size_t d, double eps);

}  // namespace robq
