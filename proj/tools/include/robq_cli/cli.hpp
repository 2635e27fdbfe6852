#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace robq::cli {

enum class Command { Attack, Regression, Distance, Kde, Selftest };

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitSelftest = 3;

inline constexpr std::uint64_t kDefaultSeed = 20240611;
inline constexpr const char* kSeedEnv = "ROBQ_SEED";

struct RunConfig {
  Command command = Command::Selftest;
  std::uint64_t seed = kDefaultSeed;
  std::string out;  // empty: CSV to stdout
  std::string config_path;
  bool full = false;
  bool oracle = false;
  std::size_t threads = 1;

  std::optional<double> eps;
  std::optional<double> tau;
  std::optional<std::size_t> queries;

  // attack
  std::size_t d = 1024;
  std::size_t m = 128;
  std::size_t r = 64;
  std::size_t k = 5;
  bool baselines = true;

  // regression / distance / kde inputs
  std::string data;
  std::string labels;
  std::string stream;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string mode;

  // kde
  std::string kernel = "exp";
  double kernel_scale = 1.0;
};

struct ParseOutcome {
  std::optional<RunConfig> config;
  int exit_code = kExitOk;
  std::string message;  // usage text or error
};

// env_seed stands in for the ROBQ_SEED variable so tests need not touch the
// process environment.
ParseOutcome parse_config(const std::vector<std::string>& args, std::optional<std::string> env_seed);
ParseOutcome parse_config(int argc, const char* const* argv);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Returns the number of failed checks; one summary line per suite on `out`.
int run_selftest(std::ostream& out);

}  // namespace robq::cli
