#include "qgsf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qgsf/qgaussian.hpp"

namespace qgsf {

namespace {

using nlohmann::json;

enum ComponentTag : std::uint64_t { kPerturbationTag = 11, kSimPlusTag = 12, kSimMinusTag = 13 };

std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> number_array(const json& j, const char* field) {
  if (!j.is_array()) throw ConfigError(std::string(field) + " must be an array of numbers");
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) throw ConfigError(std::string(field) + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::uint64_t unsigned_field(const json& j, const char* field) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    throw ConfigError(std::string(field) + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

QueueNetworkConfig parse_network(const json& j) {
  static const std::set<std::string> known{"lambda", "p_leave", "R", "dims", "theta_target"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("system: unknown field '" + key + "'");
  for (const char* key : {"lambda", "p_leave", "R", "dims", "theta_target"})
    if (!j.contains(key)) throw ConfigError(std::string("system: missing field '") + key + "'");
  QueueNetworkConfig net;
  net.arrival_rates = number_array(j["lambda"], "system.lambda");
  net.leave_probs = number_array(j["p_leave"], "system.p_leave");
  net.service_constants = number_array(j["R"], "system.R");
  for (const json& v : j["dims"]) net.dims.push_back(unsigned_field(v, "system.dims"));
  net.theta_target = number_array(j["theta_target"], "system.theta_target");
  try {
    net.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return net;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  return algorithm == Algorithm::GqSF1 ? "gqsf1" : "gqsf2";
}

Algorithm parse_algorithm(const std::string& name) {
  // Case and hyphens are ignored, so "Gq-SF1" works as well as "gqsf1".
  std::string key;
  for (char c : name)
    if (c != '-') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "gqsf1") return Algorithm::GqSF1;
  if (key == "gqsf2") return Algorithm::GqSF2;
  throw ConfigError("unknown algorithm '" + name + "' (expected gqsf1 or gqsf2)");
}

double cauchy_q(std::size_t dim) { return 1.0 + 2.0 / (static_cast<double>(dim) + 1.0); }

std::size_t ExperimentConfig::cell_count() const noexcept {
  return algorithms.size() * q_grid.size() * beta_grid.size();
}

void ExperimentConfig::validate() const {
  const std::size_t dim = system.network.total_dim();
  if (algorithms.empty()) throw ConfigError("algorithm list is empty");
  if (q_grid.empty() || beta_grid.empty()) throw ConfigError("q_grid and beta_grid must be non-empty");
  for (const QValue& q : q_grid) {
    try {
      check_q_domain(q.value, dim);
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
  }
  for (double beta : beta_grid)
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta values must be positive");
  if (!(gamma > 0.5 && gamma < 1.0)) throw ConfigError("gamma must lie strictly inside (0.5, 1)");
  if (M == 0 || L == 0) throw ConfigError("M and L must be at least 1");
  if (replications == 0) throw ConfigError("replications must be at least 1");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  if (system.box.dim() != dim) throw ConfigError("box dimension does not match the system");
  if (system.theta0.size() != dim || !system.box.contains(system.theta0))
    throw ConfigError("theta0 must have the system's dimension and lie in the box");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "algorithm", "q_grid",  "beta_grid", "gamma",  "M",      "L",
      "replications", "base_seed", "system", "box", "theta0", "common_random_numbers",
      "workers"};
  for (const auto& [key, _] : root.items())
    if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");

  ExperimentConfig cfg;
  try {
    if (root.contains("system")) {
      const json& sys = root["system"];
      if (sys.is_string()) {
        auto preset = preset_by_name(sys.get<std::string>());
        if (!preset) throw ConfigError("unknown system preset '" + sys.get<std::string>() + "'");
        cfg.system = std::move(*preset);
      } else if (sys.is_object()) {
        QueueNetworkConfig net = parse_network(sys);
        const std::size_t dim = net.total_dim();
        cfg.system = SystemPreset{"inline", std::move(net), BoxConstraint::uniform(dim, 0.1, 0.6),
                                  std::vector<double>(dim, 0.1)};
        if (!root.contains("box") || !root.contains("theta0"))
          throw ConfigError("an inline system requires explicit box and theta0");
      } else {
        throw ConfigError("system must be a preset name or an object");
      }
    }
    const std::size_t dim = cfg.system.network.total_dim();

    if (root.contains("algorithm")) {
      const json& a = root["algorithm"];
      cfg.algorithms.clear();
      if (a.is_string()) {
        cfg.algorithms.push_back(parse_algorithm(a.get<std::string>()));
      } else if (a.is_array()) {
        for (const json& v : a) {
          if (!v.is_string()) throw ConfigError("algorithm entries must be strings");
          cfg.algorithms.push_back(parse_algorithm(v.get<std::string>()));
        }
      } else {
        throw ConfigError("algorithm must be a string or an array of strings");
      }
    }

    if (!root.contains("q_grid") || !root["q_grid"].is_array())
      throw ConfigError("q_grid (array) is required");
    for (const json& v : root["q_grid"]) {
      if (v.is_number()) {
        cfg.q_grid.push_back({v.get<double>(), ""});
      } else if (v.is_string() && v.get<std::string>() == "gaussian") {
        cfg.q_grid.push_back({1.0, "gaussian"});
      } else if (v.is_string() && v.get<std::string>() == "cauchy") {
        cfg.q_grid.push_back({cauchy_q(dim), "cauchy"});
      } else {
        throw ConfigError("q_grid entries must be numbers, \"gaussian\" or \"cauchy\"");
      }
    }
    if (!root.contains("beta_grid")) throw ConfigError("beta_grid (array) is required");
    cfg.beta_grid = number_array(root["beta_grid"], "beta_grid");

    if (root.contains("gamma")) {
      if (!root["gamma"].is_number()) throw ConfigError("gamma must be a number");
      cfg.gamma = root["gamma"].get<double>();
    }
    if (root.contains("M")) cfg.M = unsigned_field(root["M"], "M");
    if (root.contains("L")) cfg.L = unsigned_field(root["L"], "L");
    if (root.contains("replications"))
      cfg.replications = unsigned_field(root["replications"], "replications");
    if (root.contains("base_seed")) cfg.base_seed = unsigned_field(root["base_seed"], "base_seed");
    if (root.contains("workers")) cfg.workers = unsigned_field(root["workers"], "workers");
    if (root.contains("common_random_numbers")) {
      if (!root["common_random_numbers"].is_boolean())
        throw ConfigError("common_random_numbers must be a boolean");
      cfg.common_random_numbers = root["common_random_numbers"].get<bool>();
    }
    if (root.contains("box")) {
      const json& b = root["box"];
      if (b.is_array() && b.size() == 2 && b[0].is_number() && b[1].is_number()) {
        cfg.system.box = BoxConstraint::uniform(dim, b[0].get<double>(), b[1].get<double>());
      } else if (b.is_object() && b.contains("lower") && b.contains("upper")) {
        cfg.system.box = BoxConstraint(number_array(b["lower"], "box.lower"),
                                       number_array(b["upper"], "box.upper"));
      } else {
        throw ConfigError("box must be [lower, upper] or {\"lower\": [...], \"upper\": [...]}");
      }
    }
    if (root.contains("theta0")) cfg.system.theta0 = number_array(root["theta0"], "theta0");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

RngStream replication_stream(std::uint64_t base_seed, std::size_t cell, std::uint64_t replication) {
  return RngStream(base_seed, derive_stream_id({base_seed, cell, replication}));
}

RunResult run_replication(const ExperimentConfig& config, Algorithm algorithm, double q,
                          double beta, const RngStream& stream, const RunOptions& options) {
  const SystemPreset& sys = config.system;
  const QKernel kernel(q, beta, sys.network.total_dim());
  const StepSchedule schedule(config.gamma);
  const LoopSettings loop{config.M, config.L};
  RngStream perturbations = stream.substream(kPerturbationTag);
  RunOptions opts = options;
  if (!opts.target) opts.target = sys.network.theta_target;

  QueueNetwork sim_plus(sys.network, stream.substream(kSimPlusTag));
  RunResult result;
  if (algorithm == Algorithm::GqSF1) {
    result = run_gqsf1(sim_plus, kernel, sys.box, schedule, loop, sys.theta0, perturbations, opts);
  } else {
    QueueNetwork sim_minus(sys.network, stream.substream(config.common_random_numbers
                                                             ? kSimPlusTag
                                                             : kSimMinusTag));
    result = run_gqsf2(sim_plus, sim_minus, kernel, sys.box, schedule, loop, sys.theta0,
                       perturbations, opts);
  }
  result.seed = stream.seed();
  result.stream_id = stream.stream_id();
  return result;
}

std::vector<CellResult> run_experiment(const ExperimentConfig& config) {
  config.validate();
  struct Cell {
    Algorithm algorithm;
    QValue q;
    double beta;
  };
  std::vector<Cell> cells;
  for (Algorithm a : config.algorithms)
    for (const QValue& q : config.q_grid)
      for (double beta : config.beta_grid) cells.push_back({a, q, beta});

  struct Outcome {
    bool ok = false;
    double distance = 0.0;
    double seconds = 0.0;
  };
  const std::uint64_t reps = config.replications;
  std::vector<Outcome> outcomes(cells.size() * reps);

  std::atomic<std::size_t> next{0};
  // Anything other than a RunError is a bug; keep the first and rethrow after the join.
  std::exception_ptr unexpected;
  std::mutex unexpected_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < outcomes.size(); task = next++) {
      const std::size_t cell = task / reps;
      const std::uint64_t rep = task % reps;
      Outcome& out = outcomes[task];
      try {
        const RunResult r = run_replication(config, cells[cell].algorithm, cells[cell].q.value,
                                            cells[cell].beta, replication_stream(config.base_seed, cell, rep));
        out = {true, *r.distance, r.wall_seconds};
      } catch (const RunError&) {
        out = {false, 0.0, 0.0};
      } catch (...) {
        const std::lock_guard lock(unexpected_mutex);
        if (!unexpected) unexpected = std::current_exception();
        next = outcomes.size();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(config.workers, outcomes.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (unexpected) std::rethrow_exception(unexpected);

  std::vector<CellResult> results;
  results.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellResult cr{cells[c].algorithm, cells[c].q, cells[c].beta, config.gamma, config.M,
                  config.L, reps, {}, 0, 0.0, 0.0, 0.0};
    for (std::uint64_t r = 0; r < reps; ++r) {
      const Outcome& o = outcomes[c * reps + r];
      cr.seconds += o.seconds;
      if (o.ok) {
        cr.distances.push_back(o.distance);
      } else {
        ++cr.failures;
      }
    }
    const double n = static_cast<double>(cr.distances.size());
    if (!cr.distances.empty()) {
      double sum = 0.0;
      for (double d : cr.distances) sum += d;
      cr.mean_distance = sum / n;
      double ss = 0.0;
      for (double d : cr.distances) ss += (d - cr.mean_distance) * (d - cr.mean_distance);
      cr.std_distance = cr.distances.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    } else {
      cr.mean_distance = std::nan("");
      cr.std_distance = std::nan("");
    }
    results.push_back(std::move(cr));
  }
  return results;
}

void emit_csv(const std::vector<CellResult>& results, std::ostream& out, const CsvOptions& options) {
  out << "algorithm,q,beta,gamma,M,L,replications,mean_distance,std_distance,failures,seconds\n";
  for (const CellResult& c : results) {
    out << to_string(c.algorithm) << ',' << format_g6(c.q.value) << ',' << format_g6(c.beta) << ','
        << format_g6(c.gamma) << ',' << c.M << ',' << c.L << ',' << c.replications << ','
        << format_g6(c.mean_distance) << ',' << format_g6(c.std_distance) << ',' << c.failures
        << ',' << format_g6(options.include_timing ? c.seconds : 0.0) << '\n';
  }
}

void emit_table(const std::vector<CellResult>& results, std::ostream& out) {
  // Blocks keyed by (algorithm, gamma) in first-seen order.
  std::vector<std::pair<Algorithm, double>> blocks;
  for (const CellResult& c : results) {
    const std::pair<Algorithm, double> key{c.algorithm, c.gamma};
    if (std::find(blocks.begin(), blocks.end(), key) == blocks.end()) blocks.push_back(key);
  }
  for (const auto& [algorithm, gamma] : blocks) {
    std::vector<double> betas;
    std::vector<QValue> qs;
    std::map<std::pair<std::size_t, std::size_t>, const CellResult*> grid;
    for (const CellResult& c : results) {
      if (c.algorithm != algorithm || c.gamma != gamma) continue;
      auto bi = std::find(betas.begin(), betas.end(), c.beta);
      if (bi == betas.end()) bi = betas.insert(betas.end(), c.beta);
      auto qi = std::find_if(qs.begin(), qs.end(), [&](const QValue& v) {
        return v.value == c.q.value && v.alias == c.q.alias;
      });
      if (qi == qs.end()) qi = qs.insert(qs.end(), c.q);
      grid[{static_cast<std::size_t>(qi - qs.begin()), static_cast<std::size_t>(bi - betas.begin())}] = &c;
    }

    auto row_label = [](const QValue& q) -> std::string {
      if (q.alias == "cauchy") return "Cauchy";
      if (q.value == 1.0) return "Gaussian";
      return format_g6(q.value);
    };
    constexpr int kLabelWidth = 10;
    constexpr int kCellWidth = 18;
    out << (algorithm == Algorithm::GqSF1 ? "Gq-SF1" : "Gq-SF2") << " (gamma=" << format_g6(gamma)
        << ")\n";
    out << std::left << std::setw(kLabelWidth) << "q \\ beta";
    for (double b : betas) out << std::setw(kCellWidth) << format_g6(b);
    out << '\n';
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
      out << std::setw(kLabelWidth) << row_label(qs[qi]);
      for (std::size_t bi = 0; bi < betas.size(); ++bi) {
        auto it = grid.find({qi, bi});
        std::string text = "-";
        if (it != grid.end() && !it->second->distances.empty()) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.5f±%.5f", it->second->mean_distance,
                        it->second->std_distance);
          text = buf;
          if (it->second->failures > 0) text += "*";
        } else if (it != grid.end()) {
          text = "diverged";
        }
        // "±" is two bytes in UTF-8 but one column wide.
        const int pad = kCellWidth - static_cast<int>(text.size()) +
                        (text.find("±") != std::string::npos ? 1 : 0);
        out << text << std::string(static_cast<std::size_t>(std::max(pad, 1)), ' ');
      }
      out << '\n';
    }
    out << '\n';
  }
}

std::vector<MomentCheck> moment_verification_grid(double q, std::size_t dim, std::size_t draws,
                                                  RngStream& stream) {
  check_q_domain(q, dim);
  std::vector<MomentSpec> specs;
  auto unit = [&](unsigned b, std::vector<std::pair<std::size_t, unsigned>> powers) {
    MomentSpec s{b, std::vector<unsigned>(dim, 0)};
    for (auto [i, p] : powers) s.powers[i] += p;
    specs.push_back(std::move(s));
  };
  unit(0, {});
  unit(0, {{0, 2}});
  unit(1, {{0, 2}});
  if (dim >= 2) {
    unit(2, {{0, 2}, {1, 2}});
  } else {
    unit(2, {{0, 4}});
  }
  unit(0, {{0, 1}});
  unit(1, {{0, 3}});

  std::vector<MomentCheck> out;
  for (const MomentSpec& s : specs) {
    const bool exists = moment_exists(s, q, dim);
    out.push_back({s, exists, exists ? analytic_moment(s, q, dim) : std::nan(""), 0.0, 0.0});
  }
  std::vector<double> sum(specs.size(), 0.0), sum2(specs.size(), 0.0);
  for (std::size_t k = 0; k < draws; ++k) {
    const Perturbation p = sample_standard(q, dim, stream);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      double v = 1.0 / std::pow(p.rho, specs[s].rho_power);
      for (std::size_t i = 0; i < dim; ++i) v *= std::pow(p.eta[i], specs[s].powers[i]);
      sum[s] += v;
      sum2[s] += v * v;
    }
  }
  const double n = static_cast<double>(draws);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    out[s].mc_mean = sum[s] / n;
    const double var = std::max(0.0, (sum2[s] / n - out[s].mc_mean * out[s].mc_mean) * n / (n - 1.0));
    out[s].mc_std_error = std::sqrt(var / n);
  }
  return out;
}

}  // namespace qgsf
