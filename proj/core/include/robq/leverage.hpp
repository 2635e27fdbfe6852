#pragma once

#include "robq/rng.hpp"
#include "robq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace robq {

struct LeverageScores {
  std::vector<double> tau;
  std::size_t rank = 0;
};

// Exact scores: squared row norms of the left singular vectors spanning the
// column space. Throws DegenerateInputError on an all-zero matrix.
LeverageScores compute_leverage_scores(const Matrix& A);

// Binary tree over leaf weights; internal nodes hold subtree sums so one
// draw costs O(log n).
class SamplerTree {
 public:
  explicit SamplerTree(const std::vector<double>& weights);

  std::size_t sample(Rng& rng) const;
  double total() const { return nodes_[1]; }
  std::size_t size() const { return n_; }
  double weight(std::size_t i) const { return nodes_[leaves_ + i]; }

 private:
  std::size_t n_;
  std::size_t leaves_;
  std::vector<double> nodes_;
};

SamplerTree build_sampler(const LeverageScores& scores);

// S has one row per kept sample: S(t, row_indices[t]) = scales[t].
struct RowSamplingMatrix {
  std::size_t source_rows = 0;
  std::vector<std::size_t> row_indices;
  std::vector<double> scales;
  std::vector<double> probabilities;  // p_i of each kept sample

  std::size_t size() const { return row_indices.size(); }
  Matrix apply(const Matrix& A) const;
  Vector apply(const Vector& b) const;
  Matrix dense() const;
};

// p_i = min(1, eps^-2 u_i c ln max(d, 2)); independent Bernoulli inclusion,
// kept rows scaled by 1/sqrt(p_i).
std::vector<double> inclusion_probabilities(const LeverageScores& scores, std::size_t d, double eps);
RowSamplingMatrix sampling_matrix(const Matrix& A, double eps, std::uint64_t seed);
RowSamplingMatrix sampling_matrix(const LeverageScores& scores, std::size_t d, double eps,
                                  std::uint64_t seed);

// Fixed-size draw with replacement from the tree: `count` rows, row i picked
// with probability p_i = u_i / sum(u), each sample scaled by 1/sqrt(count p_i).
RowSamplingMatrix sample_rows_with_replacement(const LeverageScores& scores, std::size_t count,
                                               std::uint64_t seed);

}  // namespace robq
