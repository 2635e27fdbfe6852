#include "robq/transforms.hpp"

#include "robq/constants.hpp"
#include "robq/errors.hpp"
#include "robq/fwht.hpp"

#include <cmath>
#include <span>
#include <string>

namespace robq {

namespace {

void require_positive(std::size_t value, const char* what) {
  if (value == 0) throw ParameterError(std::string(what) + " must be positive");
}

void require_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("eps must lie in (0, 1)");
}

}  // namespace

GaussianJlMap::GaussianJlMap(std::size_t m, std::size_t d, std::uint64_t seed)
    : seed_(seed), matrix_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d)) {
  require_positive(m, "GaussianJlMap rows");
  require_positive(d, "GaussianJlMap cols");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  // Column-major fill so column j depends only on the first (j+1)*m draws.
  for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
      matrix_(i, j) = scale * rng.normal();
    }
  }
}

Vector GaussianJlMap::apply(const Vector& x) const {
  require_length(x, cols(), "GaussianJlMap::apply");
  return matrix_ * x;
}

FastJlMap::FastJlMap(std::size_t m, std::size_t d, std::uint64_t seed)
    : seed_(seed), d_(d), d_pad_(next_power_of_two(d)) {
  require_positive(m, "FastJlMap rows");
  require_positive(d, "FastJlMap cols");
  Rng rng(seed);
  signs_.resize(d_pad_);
  for (auto& s : signs_) s = rng.sign();
  sampled_rows_.resize(m);
  for (auto& row : sampled_rows_) row = static_cast<std::uint32_t>(rng.uniform_index(d_pad_));
  scale_ = 1.0 / std::sqrt(static_cast<double>(m));
}

Vector FastJlMap::apply(const Vector& x) const {
  require_length(x, d_, "FastJlMap::apply");
  std::vector<double> buffer(d_pad_, 0.0);
  for (std::size_t i = 0; i < d_; ++i) buffer[i] = signs_[i] * x[static_cast<Eigen::Index>(i)];
  fwht_inplace(buffer);
  Vector out(static_cast<Eigen::Index>(sampled_rows_.size()));
  for (std::size_t i = 0; i < sampled_rows_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = scale_ * buffer[sampled_rows_[i]];
  }
  return out;
}

SrhtStack::SrhtStack(std::size_t blocks, std::size_t d, std::uint64_t seed)
    : d_(d), d_pad_(next_power_of_two(d)) {
  require_positive(blocks, "SrhtStack blocks");
  require_positive(d, "SrhtStack dimension");
  Rng rng(seed);
  diagonals_.reserve(blocks);
  for (std::size_t j = 0; j < blocks; ++j) {
    Vector diag(static_cast<Eigen::Index>(d_pad_));
    for (Eigen::Index i = 0; i < diag.size(); ++i) diag[i] = rng.normal();
    diagonals_.push_back(std::move(diag));
  }
}

SrhtStack::SrhtStack(std::size_t d, std::vector<Vector> diagonals)
    : d_(d), d_pad_(next_power_of_two(d)), diagonals_(std::move(diagonals)) {
  require_positive(d, "SrhtStack dimension");
  if (diagonals_.empty()) throw ParameterError("SrhtStack needs at least one block");
  for (const auto& diag : diagonals_) {
    require_length(diag, d_pad_, "SrhtStack diagonal");
    require_finite(diag, "SrhtStack diagonal");
  }
}

Vector SrhtStack::apply(const Vector& z) const {
  require_length(z, d_, "SrhtStack::apply");
  Vector out(static_cast<Eigen::Index>(output_dim()));
  const auto pad = static_cast<Eigen::Index>(d_pad_);
  const auto len = static_cast<Eigen::Index>(d_);
  for (std::size_t j = 0; j < diagonals_.size(); ++j) {
    auto block = out.segment(static_cast<Eigen::Index>(j) * pad, pad);
    block.head(len) = diagonals_[j].head(len).cwiseProduct(z);
    block.tail(pad - len).setZero();
    fwht_inplace(std::span<double>(block.data(), d_pad_));
  }
  return out;
}

Vector jl_apply(const GaussianJlMap& map, const Vector& x) { return map.apply(x); }
Vector jl_apply(const FastJlMap& map, const Vector& x) { return map.apply(x); }
Vector srht_apply(const SrhtStack& h, const Vector& z) { return h.apply(z); }

std::size_t gaussian_jl_rows(double eps) {
  require_eps(eps);
  return static_cast<std::size_t>(std::ceil(constants::kGaussianJl / (eps * eps)));
}

std::size_t fast_jl_rows(std::size_t d, double eps) {
  require_eps(eps);
  const double log_d = std::log(static_cast<double>(std::max<std::size_t>(next_power_of_two(d), 2)));
  return static_cast<std::size_t>(std::ceil(constants::kFastJl * log_d / (eps * eps)));
}

}  // namespace robq
