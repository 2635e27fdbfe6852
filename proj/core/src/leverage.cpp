#include "robq/leverage.hpp"

#include "robq/constants.hpp"
#include "robq/errors.hpp"
#include "robq/fwht.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robq {

LeverageScores compute_leverage_scores(const Matrix& A) {
  require_finite(A, "compute_leverage_scores");
  if (A.rows() == 0 || A.cols() == 0) throw DimensionError("compute_leverage_scores: empty matrix");
  if (A.isZero(0.0)) throw DegenerateInputError("compute_leverage_scores: all-zero matrix");

  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double tol = sv[0] * static_cast<double>(std::max(A.rows(), A.cols())) *
                     std::numeric_limits<double>::epsilon();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > tol) ++rank;

  const Matrix U = svd.matrixU().leftCols(rank);
  LeverageScores out;
  out.rank = static_cast<std::size_t>(rank);
  out.tau.resize(static_cast<std::size_t>(A.rows()));
  for (Eigen::Index i = 0; i < A.rows(); ++i) out.tau[static_cast<std::size_t>(i)] = U.row(i).squaredNorm();
  return out;
}

SamplerTree::SamplerTree(const std::vector<double>& weights)
    : n_(weights.size()), leaves_(next_power_of_two(std::max<std::size_t>(weights.size(), 1))) {
  if (weights.empty()) throw DegenerateInputError("SamplerTree: no weights");
  nodes_.assign(2 * leaves_, 0.0);
  bool any_positive = false;
  for (std::size_t i = 0; i < n_; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw ParameterError("SamplerTree: weights must be finite and nonnegative");
    }
    any_positive = any_positive || weights[i] > 0.0;
    nodes_[leaves_ + i] = weights[i];
  }
  if (!any_positive) throw DegenerateInputError("SamplerTree: all weights are zero");
  for (std::size_t v = leaves_ - 1; v >= 1; --v) nodes_[v] = nodes_[2 * v] + nodes_[2 * v + 1];
}

std::size_t SamplerTree::sample(Rng& rng) const {
  double target = rng.uniform() * nodes_[1];
  std::size_t v = 1;
  while (v < leaves_) {
    const double left = nodes_[2 * v];
    const double right = nodes_[2 * v + 1];
    // A zero-weight side is never entered, even when rounding pushes the
    // target past the left sum.
    if ((target < left && left > 0.0) || right <= 0.0) {
      v = 2 * v;
    } else {
      target -= left;
      v = 2 * v + 1;
    }
  }
  return v - leaves_;
}

SamplerTree build_sampler(const LeverageScores& scores) { return SamplerTree(scores.tau); }

Matrix RowSamplingMatrix::apply(const Matrix& A) const {
  if (static_cast<std::size_t>(A.rows()) != source_rows) {
    throw DimensionError("RowSamplingMatrix::apply: row count mismatch");
  }
  Matrix out(static_cast<Eigen::Index>(size()), A.cols());
  for (std::size_t t = 0; t < size(); ++t) {
    out.row(static_cast<Eigen::Index>(t)) = scales[t] * A.row(static_cast<Eigen::Index>(row_indices[t]));
  }
  return out;
}

Vector RowSamplingMatrix::apply(const Vector& b) const {
  require_length(b, source_rows, "RowSamplingMatrix::apply");
  Vector out(static_cast<Eigen::Index>(size()));
  for (std::size_t t = 0; t < size(); ++t) {
    out[static_cast<Eigen::Index>(t)] = scales[t] * b[static_cast<Eigen::Index>(row_indices[t])];
  }
  return out;
}

Matrix RowSamplingMatrix::dense() const {
  Matrix S = Matrix::Zero(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(source_rows));
  for (std::size_t t = 0; t < size(); ++t) {
    S(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(row_indices[t])) = scales[t];
  }
  return S;
}

std::vector<double> inclusion_probabilities(const LeverageScores& scores, std::size_t d, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("sampling eps must lie in (0, 1)");
  const double factor = constants::kLeverage * std::log(static_cast<double>(std::max<std::size_t>(d, 2))) /
                        (eps * eps);
  std::vector<double> p(scores.tau.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::min(1.0, factor * scores.tau[i]);
  return p;
}

RowSamplingMatrix sampling_matrix(const LeverageScores& scores, std::size_t d, double eps,
                                  std::uint64_t seed) {
  const auto p = inclusion_probabilities(scores, d, eps);
  RowSamplingMatrix S;
  S.source_rows = p.size();
  Rng rng(seed);
  for (std::size_t i = 0; i < p.size(); ++i) {
    // One draw per row regardless of p_i keeps the stream aligned by row.
    const double u = rng.uniform();
    if (p[i] > 0.0 && u < p[i]) {
      S.row_indices.push_back(i);
      S.scales.push_back(1.0 / std::sqrt(p[i]));
      S.probabilities.push_back(p[i]);
    }
  }
  return S;
}

RowSamplingMatrix sampling_matrix(const Matrix& A, double eps, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("sampling eps must lie in (0, 1)");
  return sampling_matrix(compute_leverage_scores(A), static_cast<std::size_t>(A.cols()), eps, seed);
}

RowSamplingMatrix sample_rows_with_replacement(const LeverageScores& scores, std::size_t count,
                                               std::uint64_t seed) {
  if (count == 0) throw ParameterError("sample_rows_with_replacement: count must be positive");
  const SamplerTree tree = build_sampler(scores);
  Rng rng(seed);
  RowSamplingMatrix S;
  S.source_rows = scores.tau.size();
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t i = tree.sample(rng);
    const double p = tree.weight(i) / tree.total();
    S.row_indices.push_back(i);
    S.scales.push_back(1.0 / std::sqrt(static_cast<double>(count) * p));
    S.probabilities.push_back(p);
  }
  return S;
}

}  // namespace robq
