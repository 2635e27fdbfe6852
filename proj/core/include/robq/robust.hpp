#pragma once

#include "robq/errors.hpp"
#include "robq/privacy.hpp"
#include "robq/rng.hpp"

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace robq {

template <class D, class Query>
concept QueryStructure = requires(const D& ds, const Query& q) {
  { ds.answer(q) } -> std::convertible_to<double>;
};

// Seed of replica i: splitmix64 is a bijection, so distinct i give distinct
// seeds for any base.
inline std::uint64_t replica_seed(std::uint64_t seed, std::size_t i) {
  return splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(i));
}

// r independent replicas of a randomized structure. Each query draws k of
// them with replacement and releases a private median of their answers.
template <class D, class Query>
  requires QueryStructure<D, Query>
class RobustWrapper {
 public:
  struct Entry {
    Query query;
    double response;
  };

  // factory(replica_seed) -> D
  template <class Factory>
  RobustWrapper(Factory&& factory, FrameworkParams params, OutputGrid grid, std::uint64_t seed)
      : params_(std::move(params)), grid_(std::move(grid)), rng_(seed, 1) {
    if (params_.Q == 0) throw ParameterError("RobustWrapper: Q must be at least 1");
    if (params_.r == 0 || params_.k == 0) throw ParameterError("RobustWrapper: r and k must be positive");
    replicas_.reserve(params_.r);
    seeds_.reserve(params_.r);
    for (std::size_t i = 0; i < params_.r; ++i) {
      seeds_.push_back(replica_seed(seed, i));
      replicas_.push_back(factory(seeds_.back()));
    }
  }

  double query(const Query& q) { return query(q, grid_); }

  // Same, with a grid chosen by the caller for this query only.
  double query(const Query& q, const OutputGrid& grid) {
    std::lock_guard lock(*mutex_);
    if (used_ >= params_.Q) throw BudgetExhaustedError("RobustWrapper: query budget exhausted");
    std::vector<double> answers(params_.k);
    for (auto& a : answers) a = static_cast<double>(replicas_[rng_.uniform_index(replicas_.size())].answer(q));
    const double out = private_median(answers, grid, params_.eps_med, rng_);
    transcript_.push_back({q, out});
    ++used_;
    return out;
  }

  std::size_t queries_used() const { return used_; }
  std::size_t budget() const { return params_.Q; }
  std::size_t remaining() const { return params_.Q - used_; }
  const FrameworkParams& params() const { return params_; }
  const OutputGrid& grid() const { return grid_; }
  const std::vector<Entry>& transcript() const { return transcript_; }
  const std::vector<std::uint64_t>& replica_seeds() const { return seeds_; }
  const std::vector<D>& replicas() const { return replicas_; }

 private:
  FrameworkParams params_;
  OutputGrid grid_;
  Rng rng_;
  std::vector<D> replicas_;
  std::vector<std::uint64_t> seeds_;
  std::vector<Entry> transcript_;
  std::size_t used_ = 0;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

template <class Query, class Factory>
auto robust_build(Factory&& factory, std::size_t Q, std::size_t n, OutputGrid grid, std::uint64_t seed) {
  using D = std::decay_t<decltype(factory(std::uint64_t{}))>;
  return RobustWrapper<D, Query>(std::forward<Factory>(factory), framework_params(Q, n), std::move(grid), seed);
}

template <class Query, class Factory>
auto robust_build(Factory&& factory, const FrameworkParams& params, OutputGrid grid, std::uint64_t seed) {
  using D = std::decay_t<decltype(factory(std::uint64_t{}))>;
  return RobustWrapper<D, Query>(std::forward<Factory>(factory), params, std::move(grid), seed);
}

}  // namespace robq
