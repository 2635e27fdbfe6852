#include "robq_cli/cli.hpp"

#include "robq/attack.hpp"
#include "robq/distance.hpp"
#include "robq/errors.hpp"
#include "robq/io.hpp"
#include "robq/kde.hpp"
#include "robq/regression.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

namespace robq::cli {

namespace {

const char* const kFooter =
    "Environment:\n"
    "  ROBQ_SEED  seed used when --seed is not given (overrides the config file)\n"
    "Exit status: 0 success, 1 usage error, 2 runtime error, 3 selftest failure";

std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos, 0);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || text.find('-') != std::string::npos) {
    throw CLI::ValidationError(where, "not an unsigned integer: " + text);
  }
  return v;
}

// Applies config-file values to options the command line left unset.
void apply_json(CLI::App& sub, const nlohmann::json& cfg, RunConfig& c) {
  if (!cfg.is_object()) throw CLI::ValidationError("--config", "top level must be an object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw CLI::ValidationError("--config", "unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    if (key == "seed") {
      c.seed = value.is_string() ? parse_seed(value.get<std::string>(), "--config seed") : value.get<std::uint64_t>();
      continue;
    }
    std::string text;
    if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number()) {
      text = value.dump();
    } else {
      throw CLI::ValidationError("--config", "key '" + key + "' must be a scalar");
    }
    opt->add_result(text);
    opt->run_callback();
  }
}

}  // namespace

ParseOutcome parse_config(const std::vector<std::string>& args, std::optional<std::string> env_seed) {
  RunConfig c;
  CLI::App app{"Adversarially robust sketches: attack experiments and query structures", "robq"};
  app.footer(kFooter);
  app.require_subcommand(1);

  std::string seed_text;
  std::string eps_text;

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", seed_text, "RNG seed (default " + std::to_string(kDefaultSeed) + ")");
    s->add_option("--out", c.out, "CSV output path (written atomically; default stdout)");
    s->add_option("--config", c.config_path, "JSON file with option values; flags take precedence");
    s->add_option("--threads", c.threads, "worker thread cap")->check(CLI::PositiveNumber);
    s->add_flag("--oracle", c.oracle, "compute exact answers alongside estimates");
    s->add_flag("--full", c.full, "use the large reference configuration");
    s->add_option("--queries", c.queries, "number of queries / rounds")->check(CLI::PositiveNumber);
    s->add_option("--eps", c.eps, "accuracy parameter")->check(CLI::Range(0.0, 1.0));
    s->footer(kFooter);
  };

  auto* attack = app.add_subcommand("attack", "adaptive norm-estimation attack on JL sketches");
  common(attack);
  attack->add_option("--d", c.d, "dimension")->check(CLI::PositiveNumber);
  attack->add_option("--m", c.m, "sketch rows")->check(CLI::PositiveNumber);
  attack->add_option("--r", c.r, "replicas")->check(CLI::PositiveNumber);
  attack->add_option("--k", c.k, "replicas consulted per query")->check(CLI::PositiveNumber);
  attack->add_flag("!--no-baselines", c.baselines, "skip baseline1/baseline2");

  auto* regression = app.add_subcommand("regression", "dynamic regression cost under a label update stream");
  common(regression);
  regression->add_option("--stream", c.stream, "JSON-lines update stream")->required()->check(CLI::ExistingFile);
  regression->add_option("--data", c.data, "design matrix A (CSV or .bin); default random")->check(CLI::ExistingFile);
  regression->add_option("--labels", c.labels, "initial labels b (one column); default random")->check(CLI::ExistingFile);
  regression->add_option("--rows", c.rows, "rows of the generated A (default 200)");
  regression->add_option("--cols", c.cols, "columns of the generated A (default 20)");
  regression->add_option("--mode", c.mode, "robust|sketch|exact")->check(CLI::IsMember({"robust", "sketch", "exact"}));

  auto* distance = app.add_subcommand("distance", "adaptive distance estimation");
  common(distance);
  distance->add_option("--data", c.data, "points (CSV or .bin); default random")->check(CLI::ExistingFile);
  distance->add_option("--rows", c.rows, "points generated when --data is absent (default 20)");
  distance->add_option("--cols", c.cols, "dimension of generated points (default 128)");
  distance->add_option("--mode", c.mode, "srht|fastjl")->check(CLI::IsMember({"srht", "fastjl"}));
  distance->add_option("--r", c.r, "replicas (fastjl mode)")->check(CLI::PositiveNumber);
  distance->add_option("--k", c.k, "replicas per query (fastjl mode)")->check(CLI::PositiveNumber);

  auto* kde = app.add_subcommand("kde", "adaptive kernel density estimation");
  common(kde);
  kde->add_option("--data", c.data, "points (CSV or .bin); default random")->check(CLI::ExistingFile);
  kde->add_option("--rows", c.rows, "points generated when --data is absent (default 1000)");
  kde->add_option("--cols", c.cols, "dimension of generated points (default 1)");
  kde->add_option("--kernel", c.kernel, "exp|rational")->check([](const std::string& v) {
    return v == "exp" || v == "rational" ? std::string() : "unknown kernel '" + v + "'; supported kernels: exp|rational";
  });
  kde->add_option("--kernel-scale", c.kernel_scale, "kernel constant C")->check(CLI::PositiveNumber);
  kde->add_option("--tau", c.tau, "density promise")->check(CLI::PositiveNumber);
  kde->add_option("--mode", c.mode, "net|robust|sample")->check(CLI::IsMember({"net", "robust", "sample"}));

  auto* selftest = app.add_subcommand("selftest", "run the built-in property checks");
  selftest->footer(kFooter);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  ParseOutcome outcome;
  try {
    app.parse(reversed);
    CLI::App* sub = app.get_subcommands().front();
    if (sub == attack) c.command = Command::Attack;
    else if (sub == regression) c.command = Command::Regression;
    else if (sub == distance) c.command = Command::Distance;
    else if (sub == kde) c.command = Command::Kde;
    else c.command = Command::Selftest;

    if (!c.config_path.empty()) {
      nlohmann::json cfg;
      try {
        cfg = nlohmann::json::parse(read_file(c.config_path));
      } catch (const nlohmann::json::exception& ex) {
        throw CLI::ValidationError("--config", c.config_path + ": " + ex.what());
      } catch (const IoError& ex) {
        throw CLI::ValidationError("--config", ex.what());
      }
      apply_json(*sub, cfg, c);
    }
    if (!seed_text.empty()) {
      c.seed = parse_seed(seed_text, "--seed");
    } else if (env_seed && !env_seed->empty()) {
      c.seed = parse_seed(*env_seed, kSeedEnv);
    }
    if (c.command == Command::Attack && c.full) {
      const auto full = AttackConfig::full();
      if (attack->get_option("--d")->count() == 0) c.d = full.d;
      if (attack->get_option("--m")->count() == 0) c.m = full.m;
      if (attack->get_option("--r")->count() == 0) c.r = full.r;
      if (attack->get_option("--k")->count() == 0) c.k = full.k;
    }
    outcome.config = c;
  } catch (const CLI::CallForHelp&) {
    std::ostringstream os;
    os << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    outcome.exit_code = kExitOk;
    outcome.message = os.str();
  } catch (const CLI::CallForAllHelp&) {
    outcome.exit_code = kExitOk;
    outcome.message = app.help("", CLI::AppFormatMode::All);
  } catch (const CLI::ParseError& ex) {
    outcome.exit_code = kExitUsage;
    outcome.message = std::string("error: ") + ex.what() + "\nRun with --help for usage.";
    if (const auto* s = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      outcome.message += "\n" + s->help();
    }
  }
  return outcome;
}

ParseOutcome parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  std::optional<std::string> env;
  if (const char* v = std::getenv(kSeedEnv)) env = v;
  return parse_config(args, env);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void emit(const RunConfig& c, const std::string& csv, std::ostream& out) {
  if (c.out.empty()) {
    out << csv;
  } else {
    write_file_atomic(c.out, csv);
  }
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) = rng.normal();
  }
  return X;
}

int run_attack_cmd(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  AttackConfig cfg;
  cfg.d = c.d;
  cfg.m = c.m;
  cfg.r = c.r;
  cfg.k = c.k;
  cfg.num_queries = c.queries.value_or(c.full ? AttackConfig::full().num_queries : AttackConfig::desk().num_queries);
  cfg.seed = c.seed;
  const auto records = run_norm_experiment(cfg, c.baselines);
  emit(c, attack_csv(records), out);
  std::ostream& log = c.out.empty() ? err : out;
  log << "attack: queries=" << records.size() << " naive_max_dev=" << max_deviation(records, "naive")
      << " robust_max_dev=" << max_deviation(records, "robust")
      << " robust_in_band=" << fraction_within(records, "robust", 0.85, 1.15)
      << " wall_s=" << seconds_since(t0) << '\n';
  return kExitOk;
}

int run_regression_cmd(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  Rng rng(c.seed, 100);
  Matrix A = c.data.empty() ? random_matrix(c.rows ? c.rows : 200, c.cols ? c.cols : 20, rng) : read_dataset(c.data);
  Vector b;
  if (!c.labels.empty()) {
    const Matrix L = read_dataset(c.labels);
    if (L.cols() != 1) throw DimensionError(c.labels + ": labels must have one column");
    b = L.col(0);
  } else {
    b = random_matrix(static_cast<std::size_t>(A.rows()), 1, rng).col(0);
  }
  require_length(b, static_cast<std::size_t>(A.rows()), "labels");
  const auto updates = read_update_stream(c.stream);
  std::size_t K = 1;
  for (const auto& u : updates) K = std::max(K, u.entries.size());
  const double eps = c.eps.value_or(0.25);
  const std::size_t rounds = std::min(updates.size(), c.queries.value_or(updates.size()));
  const std::string mode = c.mode.empty() ? "robust" : c.mode;

  std::unique_ptr<RobustRegression> robust;
  std::unique_ptr<RegressionSketch> sketch;
  std::unique_ptr<ExactMaintainer> exact_est;
  if (mode == "robust") robust = std::make_unique<RobustRegression>(A, b, eps, K, c.seed);
  if (mode == "sketch") sketch = std::make_unique<RegressionSketch>(A, b, eps, c.seed);
  if (mode == "exact") exact_est = std::make_unique<ExactMaintainer>(A, b);
  ExactMaintainer oracle(A, b);

  std::string csv = "round,estimate,exact\n";
  double worst = 0.0;
  std::size_t inside = 0;
  for (std::size_t t = 0; t < rounds; ++t) {
    const auto& u = updates[t];
    const double est = robust ? robust->update(u) : sketch ? sketch->update(u) : exact_est->update(u);
    csv += std::to_string(t + 1) + ',' + format_double(est) + ',';
    if (c.oracle) {
      const double truth = oracle.update(u);
      csv += format_double(truth);
      const double rel = truth > 1e-12 ? std::abs(est / truth - 1.0) : std::abs(est - truth);
      worst = std::max(worst, rel);
      if (rel <= eps) ++inside;
    }
    csv += '\n';
  }
  emit(c, csv, out);
  std::ostream& log = c.out.empty() ? err : out;
  log << "regression: mode=" << mode << " rounds=" << rounds;
  if (c.oracle) {
    log << " max_rel_err=" << worst << " within_eps=" << (rounds ? static_cast<double>(inside) / static_cast<double>(rounds) : 1.0);
  }
  log << " wall_s=" << seconds_since(t0) << '\n';
  return kExitOk;
}

int run_distance_cmd(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  Rng rng(c.seed, 200);
  const Matrix X = c.data.empty() ? random_matrix(c.rows ? c.rows : 20, c.cols ? c.cols : 128, rng) : read_dataset(c.data);
  const std::size_t Q = c.queries.value_or(10);
  const double eps = c.eps.value_or(0.3);
  const std::string mode = c.mode.empty() ? "srht" : c.mode;
  const auto n = static_cast<std::size_t>(X.rows());

  std::unique_ptr<AdeSrht> srht;
  std::unique_ptr<AdeFastJl> fast;
  if (mode == "srht") {
    AdeSrhtOptions opts;
    opts.threads = c.threads;
    srht = std::make_unique<AdeSrht>(X, Q, eps, c.seed, opts);
  } else {
    AdeOptions opts;
    opts.params = framework_params(c.r, c.k, Q * n, n);
    fast = std::make_unique<AdeFastJl>(X, Q * n, eps, c.seed, opts);
  }
  DistanceChaser chaser(X, Rng(c.seed).substream(201).next_seed());
  std::string csv = "query_index,point_index,estimate,exact\n";
  double worst = 0.0;
  for (std::size_t t = 0; t < Q; ++t) {
    const Vector q = chaser.next();
    std::vector<double> est(n);
    if (srht) {
      est = srht->query(q);
    } else {
      for (std::size_t i = 0; i < n; ++i) est[i] = fast->query({q, i});
    }
    chaser.observe(q, est);
    const auto truth = exact_distances(X, q);
    for (std::size_t i = 0; i < n; ++i) {
      csv += std::to_string(t) + ',' + std::to_string(i) + ',' + format_double(est[i]) + ',';
      if (c.oracle) {
        csv += format_double(truth[i]);
        if (truth[i] > 0.0) worst = std::max(worst, std::abs(est[i] / truth[i] - 1.0));
      }
      csv += '\n';
    }
  }
  emit(c, csv, out);
  std::ostream& log = c.out.empty() ? err : out;
  log << "distance: mode=" << mode << " queries=" << Q << " points=" << n;
  if (c.oracle) log << " max_rel_err=" << worst;
  log << " wall_s=" << seconds_since(t0) << '\n';
  return kExitOk;
}

int run_kde_cmd(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  Rng rng(c.seed, 300);
  Matrix X;
  if (c.data.empty()) {
    X.resize(static_cast<Eigen::Index>(c.rows ? c.rows : 1000), static_cast<Eigen::Index>(c.cols ? c.cols : 1));
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
  } else {
    X = read_dataset(c.data);
  }
  const Kernel kernel = parse_kernel(c.kernel, c.kernel_scale);
  const double eps = c.eps.value_or(0.3);
  const double tau = c.tau.value_or(0.2);
  const std::size_t Q = c.queries.value_or(200);
  const std::string mode = c.mode.empty() ? "net" : c.mode;

  std::unique_ptr<NetWrapper> net;
  std::unique_ptr<KdeSampleEstimator> sample;
  std::unique_ptr<RobustWrapper<KdeSampleEstimator, Vector>> robust;
  if (mode == "net") net = std::make_unique<NetWrapper>(X, eps, tau, kernel, 0.0, 0.0, c.seed);
  if (mode == "sample") sample = std::make_unique<KdeSampleEstimator>(X, eps, tau, 0.01, kernel, c.seed);
  if (mode == "robust") {
    robust = std::make_unique<RobustWrapper<KdeSampleEstimator, Vector>>(robust_kde_build(X, Q, eps, tau, kernel, c.seed));
  }
  KdeChaser chaser(X, Rng(c.seed).substream(301).next_seed());
  std::string csv = "query_index,estimate,exact,promise_met\n";
  double worst = 0.0;
  std::size_t promised = 0;
  for (std::size_t t = 0; t < Q; ++t) {
    const Vector q = chaser.next();
    KdeQueryResult res;
    if (net) res = net->query(q);
    if (sample) res = sample->query(q);
    if (robust) {
      res.value = robust->query(q);
      res.promise_met = res.value >= tau * (1.0 - eps);
    }
    const double truth = kde_exact(X, q, kernel);
    chaser.observe(q, res.value, truth, res.promise_met);
    csv += std::to_string(t) + ',' + format_double(res.value) + ',';
    if (c.oracle) csv += format_double(truth);
    csv += res.promise_met ? ",1\n" : ",0\n";
    if (res.promise_met) {
      ++promised;
      if (c.oracle && truth > 0.0) worst = std::max(worst, std::abs(res.value / truth - 1.0));
    }
  }
  emit(c, csv, out);
  std::ostream& log = c.out.empty() ? err : out;
  log << "kde: mode=" << mode << " kernel=" << kernel.name() << " queries=" << Q << " promise_met=" << promised;
  if (net) log << " net_size=" << net->net_size();
  if (c.oracle) log << " max_rel_err_promised=" << worst;
  log << " wall_s=" << seconds_since(t0) << '\n';
  return kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::Attack: return run_attack_cmd(config, out, err);
      case Command::Regression: return run_regression_cmd(config, out, err);
      case Command::Distance: return run_distance_cmd(config, out, err);
      case Command::Kde: return run_kde_cmd(config, out, err);
      case Command::Selftest: return run_selftest(out) == 0 ? kExitOk : kExitSelftest;
    }
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace robq::cli
