#include "l2nas/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "l2nas/external_oracle.hpp"
#include "l2nas/serialize.hpp"

namespace l2nas {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Presets and config parsing
// ---------------------------------------------------------------------------

AgentConfig preset_agent_config(const std::string& name) {
  AgentConfig c;
  if (name == "nb") {
    c.k = 64;
    c.tau = 0.9;
    c.batch_size = 8;
    c.noise_xi = 1e-4;
    c.c_max = 10;
    c.exploration = Exploration::eps_greedy(1.0, 0.05, 175);
    c.hidden_width = 128;
    c.actor_lr = 1e-3;
    c.critic_lr = 1e-4;
    c.buffer_capacity = 0;
    c.steps = 1000;
    c.reward = RewardMode::simple();
  } else if (name == "large") {
    c.k = 500;
    c.tau = 0.95;
    c.batch_size = 64;
    c.noise_xi = 5e-5;
    c.c_max = 1;
    c.exploration = Exploration::warmup(3000);
    c.hidden_width = 256;
    c.actor_lr = 1e-3;
    c.critic_lr = 1e-4;
    c.buffer_capacity = 5000;
    c.steps = 20000;
    c.reward = RewardMode::simple();
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (use nb or large)");
  }
  return c;
}

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) config_error(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      config_error("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) config_error(where + " is missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + " has a malformed \"" + key + "\"");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + " has a malformed \"" + key + "\"");
  }
}

SearchSpaceSpec parse_space(const json& j) {
  check_keys(j, {"name", "edges", "ops"}, "space");
  const auto name = get_field<std::string>(j, "name", "space");
  return builtin_space(name, get_or<int>(j, "edges", "space", 0),
                       get_or<int>(j, "ops", "space", 0));
}

OracleConfig parse_oracle(const json& j) {
  check_keys(j, {"type", "path", "seed", "endpoint", "timeout_s"}, "oracle");
  OracleConfig o;
  const auto type = get_field<std::string>(j, "type", "oracle");
  if (type == "tabular") {
    o.type = OracleConfig::Type::kTabular;
    o.path = get_field<std::string>(j, "path", "oracle");
  } else if (type == "synthetic") {
    o.type = OracleConfig::Type::kSynthetic;
    o.seed = get_field<std::uint64_t>(j, "seed", "oracle");
  } else if (type == "external") {
    o.type = OracleConfig::Type::kExternal;
    o.endpoint = get_field<std::string>(j, "endpoint", "oracle");
    o.timeout_s = get_or<double>(j, "timeout_s", "oracle", 600.0);
  } else {
    config_error("oracle type must be tabular, synthetic or external");
  }
  return o;
}

// Partial override of the preset agent settings; reward.acc_env may be the
// string "auto".
void parse_agent(const json& j, AgentConfig& c, bool& acc_env_auto) {
  check_keys(j,
             {"k", "tau", "batch_size", "noise_xi", "c_max", "exploration",
              "hidden_width", "actor_lr", "critic_lr", "buffer_capacity", "steps",
              "reward"},
             "agent");
  c.k = get_or(j, "k", "agent", c.k);
  c.tau = get_or(j, "tau", "agent", c.tau);
  c.batch_size = get_or(j, "batch_size", "agent", c.batch_size);
  c.noise_xi = get_or(j, "noise_xi", "agent", c.noise_xi);
  c.c_max = get_or(j, "c_max", "agent", c.c_max);
  c.hidden_width = get_or(j, "hidden_width", "agent", c.hidden_width);
  c.actor_lr = get_or(j, "actor_lr", "agent", c.actor_lr);
  c.critic_lr = get_or(j, "critic_lr", "agent", c.critic_lr);
  c.buffer_capacity = get_or(j, "buffer_capacity", "agent", c.buffer_capacity);
  c.steps = get_or(j, "steps", "agent", c.steps);
  if (j.contains("exploration")) {
    const json& ex = j["exploration"];
    check_keys(ex, {"type", "eps0", "eps_min", "anneal_end", "warmup_steps"},
               "agent.exploration");
    const auto type = get_field<std::string>(ex, "type", "agent.exploration");
    if (type == "eps_greedy") {
      c.exploration = Exploration::eps_greedy(
          get_or(ex, "eps0", "agent.exploration", 1.0),
          get_or(ex, "eps_min", "agent.exploration", 0.05),
          get_or(ex, "anneal_end", "agent.exploration", 175));
    } else if (type == "warmup") {
      c.exploration = Exploration::warmup(
          get_field<int>(ex, "warmup_steps", "agent.exploration"));
    } else {
      config_error("exploration type must be eps_greedy or warmup");
    }
  }
  if (j.contains("reward")) {
    const json& rw = j["reward"];
    check_keys(rw, {"mode", "acc_env"}, "agent.reward");
    const auto mode = get_field<std::string>(rw, "mode", "agent.reward");
    if (mode == "simple") {
      c.reward = RewardMode::simple();
    } else if (mode == "rescaled") {
      if (!rw.contains("acc_env"))
        config_error("rescaled reward needs \"acc_env\" (number or \"auto\")");
      if (rw["acc_env"].is_string()) {
        if (rw["acc_env"] != "auto")
          config_error("reward acc_env must be a number or \"auto\"");
        acc_env_auto = true;
        c.reward = RewardMode::rescaled(1.0);  // placeholder until resolved
      } else {
        c.reward = RewardMode::rescaled(
            get_field<double>(rw, "acc_env", "agent.reward"));
      }
    } else {
      config_error("reward mode must be simple or rescaled");
    }
  }
}

}  // namespace

RunConfig parse_run_config(const json& j, const std::string& preset) {
  check_keys(j, {"space", "oracle", "agent", "seeds", "out_dir", "jobs"}, "config");
  RunConfig c;
  if (!j.contains("space")) config_error("missing \"space\" section");
  c.space = parse_space(j["space"]);
  if (!j.contains("oracle")) config_error("missing \"oracle\" section");
  c.oracle = parse_oracle(j["oracle"]);
  c.agent = preset_agent_config(preset.empty() ? "nb" : preset);
  if (j.contains("agent")) parse_agent(j["agent"], c.agent, c.acc_env_auto);
  c.seeds = get_or(j, "seeds", "config", std::vector<std::uint64_t>{0});
  if (c.seeds.empty()) config_error("\"seeds\" must not be empty");
  c.out_dir = get_or<std::string>(j, "out_dir", "config", "");
  c.jobs = get_or(j, "jobs", "config", 1);
  if (c.jobs < 1) config_error("\"jobs\" must be >= 1");
  if (!c.acc_env_auto) c.agent.validate();
  return c;
}

RunConfig load_run_config(const std::string& path, const std::string& preset) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw std::runtime_error("config file is not valid JSON: " + path);
  return parse_run_config(j, preset);
}

std::unique_ptr<AccuracyOracle> make_oracle(const RunConfig& config) {
  switch (config.oracle.type) {
    case OracleConfig::Type::kTabular: {
      auto oracle = std::make_unique<TabularOracle>(
          TabularOracle::load(config.oracle.path));
      if (!same_space_shape(oracle->space(), config.space))
        throw std::runtime_error("tabular file's space does not match config: " +
                                 config.oracle.path);
      return oracle;
    }
    case OracleConfig::Type::kSynthetic:
      return std::make_unique<SyntheticOracle>(config.space, config.oracle.seed);
    case OracleConfig::Type::kExternal: {
      double timeout = config.oracle.timeout_s;
      if (const char* env = std::getenv("L2NAS_EVAL_TIMEOUT_S")) {
        try {
          timeout = std::stod(env);
        } catch (const std::exception&) {
          throw std::runtime_error("L2NAS_EVAL_TIMEOUT_S is not a number");
        }
      }
      return std::make_unique<ExternalOracle>(config.space,
                                              config.oracle.endpoint, timeout);
    }
  }
  throw std::logic_error("unreachable oracle type");
}

void resolve_acc_env(RunConfig& config, const AccuracyOracle& oracle) {
  if (!config.acc_env_auto) return;
  const auto env = oracle.acc_env();
  if (!env)
    throw std::runtime_error(
        "reward acc_env is \"auto\" but the oracle reports no acc_env");
  config.agent.reward = RewardMode::rescaled(*env);
  config.acc_env_auto = false;
  config.agent.validate();
}

// ---------------------------------------------------------------------------
// Shared run plumbing
// ---------------------------------------------------------------------------

namespace {

json run_config_to_json(const RunConfig& c) {
  json space = space_to_json(c.space);
  json oracle;
  switch (c.oracle.type) {
    case OracleConfig::Type::kTabular:
      oracle = {{"type", "tabular"}, {"path", c.oracle.path}};
      break;
    case OracleConfig::Type::kSynthetic:
      oracle = {{"type", "synthetic"}, {"seed", c.oracle.seed}};
      break;
    case OracleConfig::Type::kExternal:
      oracle = {{"type", "external"},
                {"endpoint", c.oracle.endpoint},
                {"timeout_s", c.oracle.timeout_s}};
      break;
  }
  return {{"space", space},
          {"oracle", oracle},
          {"agent", agent_config_to_json(c.agent)},
          {"seeds", c.seeds},
          {"out_dir", c.out_dir},
          {"jobs", c.jobs}};
}

void write_json_file(const fs::path& path, const json& j, int indent = 2) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(indent) << '\n';
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  for (double x : xs) ms.mean += x;
  ms.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
    ms.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return ms;
}

// Rank of (acc, key) under (acc desc, key asc) by a storage-free sweep.
std::optional<int> rank_within_space(const SearchSpaceSpec& space,
                                     AccuracyOracle& oracle, double acc,
                                     const std::string& key,
                                     double max_archs = 2e6) {
  if (arch_count(space) > max_archs) return std::nullopt;
  long long ahead = 0;
  try {
    for_each_arch(space, [&](const DiscreteArch& a) {
      const double other = oracle.evaluate_direct(a, Split::kValid);
      if (other > acc) ++ahead;
      else if (other == acc && arch_key(space, a) < key) ++ahead;
      return true;
    });
  } catch (const MissingArchError&) {
    return std::nullopt;  // table does not cover the space
  }
  return static_cast<int>(ahead) + 1;
}

void aggregate_report(RunReport& report) {
  std::vector<double> valids, tests;
  for (const auto& s : report.seeds) {
    valids.push_back(s.best_valid);
    tests.push_back(s.best_test);
  }
  const auto v = mean_std(valids);
  const auto t = mean_std(tests);
  report.mean_valid = v.mean;
  report.std_valid = v.std;
  report.mean_test = t.mean;
  report.std_test = t.std;
}

json seed_result_to_json(const SeedResult& s) {
  return {{"seed", s.seed},
          {"best_key", s.best_key},
          {"best_valid", s.best_valid},
          {"best_test", s.best_test},
          {"best_step", s.best_step},
          {"steps", s.steps},
          {"wall_time_s", s.wall_time_s}};
}

// Self-contained per-seed result file; the step log streams separately.
void write_result_json(const fs::path& dir, const SeedResult& seed,
                       const SearchResult& res, const json& config_echo) {
  json result = seed_result_to_json(seed);
  json state = json::array();
  for (const auto& blk : res.final_state.blocks) {
    json rows = json::array();
    for (int r = 0; r < blk.rows; ++r) {
      json row = json::array();
      for (int c = 0; c < blk.cols; ++c) row.push_back(blk.at(r, c));
      rows.push_back(row);
    }
    state.push_back(rows);
  }
  result["final_state"] = state;
  json tracker = json::array();
  for (const auto& e : res.tracker_entries)
    tracker.push_back({{"key", e.key}, {"acc", e.acc}});
  result["tracker"] = tracker;
  result["config"] = config_echo;
  write_json_file(dir / "result.json", result);
}

SeedResult seed_result_from_search(std::uint64_t seed, const SearchResult& res,
                                   double wall_time_s) {
  SeedResult s;
  s.seed = seed;
  s.best_key = res.best_key;
  s.best_valid = res.best_valid;
  s.best_test = res.best_test;
  s.best_step = res.best_step;
  s.steps = static_cast<int>(res.logs.size());
  s.wall_time_s = wall_time_s;
  s.best_curve = res.best_curve;
  return s;
}

// Runs `fn(i)` for i in [0, n) on up to `jobs` worker threads; the first
// exception wins and is rethrown after all workers join.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  std::vector<std::thread> workers;
  const int worker_count = std::min(jobs, n);
  for (int w = 0; w < worker_count; ++w) {
    workers.emplace_back([&, w] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

using SeedRunner =
    std::function<SearchResult(std::uint64_t seed, const StepSink& sink)>;

RunReport run_seeds(const RunConfig& config, AccuracyOracle& oracle,
                    const SeedRunner& runner, const std::string& command) {
  json config_echo = run_config_to_json(config);
  config_echo["command"] = command;

  fs::path out_dir;
  if (!config.out_dir.empty()) {
    out_dir = config.out_dir;
    fs::create_directories(out_dir);
    write_json_file(out_dir / "config.json", config_echo);
  }

  RunReport report;
  report.seeds.resize(config.seeds.size());
  parallel_for(static_cast<int>(config.seeds.size()), config.jobs, [&](int i) {
    const std::uint64_t seed = config.seeds[static_cast<std::size_t>(i)];
    const auto start = std::chrono::steady_clock::now();
    SearchResult res;
    if (config.out_dir.empty()) {
      res = runner(seed, nullptr);
    } else {
      const fs::path dir = out_dir / ("seed_" + std::to_string(seed));
      fs::create_directories(dir);
      std::ofstream steps(dir / "steps.jsonl", std::ios::binary);
      if (!steps)
        throw std::runtime_error("cannot write " + (dir / "steps.jsonl").string());
      res = runner(seed, [&steps](const StepLog& log) {
        steps << step_log_to_json(log).dump() << '\n';
      });
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    auto& slot = report.seeds[static_cast<std::size_t>(i)];
    slot = seed_result_from_search(seed, res, wall);
    if (!config.out_dir.empty())
      write_result_json(out_dir / ("seed_" + std::to_string(seed)), slot, res,
                        config_echo);
  });

  aggregate_report(report);

  // Ground-truth rank of the best architecture when the space is enumerable.
  // Skipped for external oracles: a full sweep would hammer the evaluator.
  const SeedResult* best = nullptr;
  for (const auto& s : report.seeds)
    if (s.best_step >= 0 && (!best || s.best_valid > best->best_valid)) best = &s;
  if (best && config.oracle.type != OracleConfig::Type::kExternal)
    report.best_rank =
        rank_within_space(config.space, oracle, best->best_valid, best->best_key);

  if (!config.out_dir.empty())
    write_json_file(out_dir / "summary.json", report.to_json());
  return report;
}

}  // namespace

json RunReport::to_json() const {
  json per_seed = json::array();
  for (const auto& s : seeds) per_seed.push_back(seed_result_to_json(s));
  json j = {{"per_seed", per_seed}, {"mean_valid", mean_valid},
            {"std_valid", std_valid}, {"mean_test", mean_test},
            {"std_test", std_test}};
  j["best_rank"] = best_rank ? json(*best_rank) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

RunReport cmd_run(const RunConfig& raw_config) {
  RunConfig config = raw_config;
  auto oracle = make_oracle(config);
  resolve_acc_env(config, *oracle);
  return run_seeds(config, *oracle,
                   [&](std::uint64_t seed, const StepSink& sink) {
                     AgentConfig agent_cfg = config.agent;
                     agent_cfg.seed = seed;
                     Agent agent(config.space, agent_cfg);
                     return run_search(agent, *oracle, agent_cfg.steps, sink);
                   },
                   "run");
}

RunReport cmd_baseline_random(const RunConfig& raw_config) {
  RunConfig config = raw_config;
  auto oracle = make_oracle(config);
  resolve_acc_env(config, *oracle);
  const RewardMode reward = config.agent.reward;

  return run_seeds(config, *oracle,
                   [&](std::uint64_t seed, const StepSink& sink) {
                     Rng rng(seed);
                     SearchResult res;
                     for (int t = 0; t < config.agent.steps; ++t) {
                       const auto arch = random_arch(config.space, rng);
                       const double acc = oracle->query(arch, Split::kValid);
                       StepLog log;
                       log.step = t;
                       log.arch_key = arch_key(config.space, arch);
                       log.valid_acc = acc;
                       log.reward = reward.reward(acc);
                       log.warmup_mode = true;
                       log.phase = "random";
                       if (acc > res.best_valid || res.best_step < 0) {
                         res.best_valid = acc;
                         res.best_key = log.arch_key;
                         res.best_arch = arch;
                         res.best_step = t;
                       }
                       log.best_so_far = res.best_valid;
                       res.best_curve.push_back(res.best_valid);
                       res.logs.push_back(log);
                       if (sink) sink(log);
                     }
                     if (res.best_step >= 0)
                       res.best_test = oracle->query(res.best_arch, Split::kTest);
                     return res;
                   },
                   "baseline-random");
}

TransferReport cmd_transfer(const RunConfig& raw_pretrain,
                            const RunConfig& raw_finetune) {
  RunConfig pretrain = raw_pretrain;
  RunConfig finetune = raw_finetune;
  if (!same_space_shape(pretrain.space, finetune.space))
    throw std::invalid_argument(
        "transfer: pretrain and fine-tune spaces have different shapes");
  if (finetune.agent.exploration.kind != Exploration::Kind::kWarmup)
    throw std::invalid_argument(
        "transfer: fine-tune exploration must be warm-up");

  auto oracle_a = make_oracle(pretrain);
  auto oracle_b = make_oracle(finetune);
  resolve_acc_env(pretrain, *oracle_a);
  resolve_acc_env(finetune, *oracle_b);

  const std::size_t pair_count =
      std::min(pretrain.seeds.size(), finetune.seeds.size());
  if (pair_count == 0) throw std::invalid_argument("transfer: no seed pairs");

  fs::path out_dir;
  const bool writing = !finetune.out_dir.empty();
  if (writing) {
    out_dir = finetune.out_dir;
    fs::create_directories(out_dir);
    json echo = {{"pretrain", run_config_to_json(pretrain)},
                 {"finetune", run_config_to_json(finetune)}};
    write_json_file(out_dir / "config.json", echo);
  }

  const auto make_sink = [&](std::ofstream& stream) -> StepSink {
    if (!writing) return nullptr;
    return [&stream](const StepLog& log) {
      stream << step_log_to_json(log).dump() << '\n';
    };
  };

  TransferReport report;
  for (std::size_t i = 0; i < pair_count; ++i) {
    TransferPair pair;
    pair.pretrain_seed = pretrain.seeds[i];
    pair.finetune_seed = finetune.seeds[i];

    fs::path pair_dir;
    if (writing) {
      pair_dir = out_dir / ("pair_" + std::to_string(i));
      fs::create_directories(pair_dir);
    }

    AgentConfig pre_cfg = pretrain.agent;
    pre_cfg.seed = pair.pretrain_seed;
    Agent agent(pretrain.space, pre_cfg);
    {
      std::ofstream stream;
      if (writing) stream.open(pair_dir / "pretrain_steps.jsonl", std::ios::binary);
      const auto res = run_search(agent, *oracle_a, pre_cfg.steps, make_sink(stream));
      pair.pretrain_best = res.best_valid;
    }
    if (writing) agent.save_checkpoint((pair_dir / "pretrain.ckpt").string());

    FineTuneOverrides overrides;
    overrides.k = finetune.agent.k;
    overrides.steps = finetune.agent.steps;
    overrides.warmup_steps = finetune.agent.exploration.warmup_steps;
    overrides.reward = finetune.agent.reward;
    overrides.seed = pair.finetune_seed;

    SearchResult tuned;
    {
      std::ofstream stream;
      if (writing) stream.open(pair_dir / "finetune_steps.jsonl", std::ios::binary);
      tuned = fine_tune(agent, *oracle_b, overrides, make_sink(stream));
    }
    pair.finetune_best = tuned.best_valid;

    AgentConfig fresh_cfg = finetune.agent;
    fresh_cfg.seed = pair.finetune_seed;
    SearchResult fresh;
    {
      std::ofstream stream;
      if (writing) stream.open(pair_dir / "fresh_steps.jsonl", std::ios::binary);
      Agent control(finetune.space, fresh_cfg);
      fresh = run_search(control, *oracle_b, fresh_cfg.steps, make_sink(stream));
    }
    pair.fresh_best = fresh.best_valid;

    pair.queries_to_reach_fresh_best = overrides.steps + 1;
    for (std::size_t t = 0; t < tuned.best_curve.size(); ++t) {
      if (tuned.best_curve[t] >= pair.fresh_best) {
        pair.queries_to_reach_fresh_best = static_cast<int>(t) + 1;
        break;
      }
    }
    report.pairs.push_back(pair);
  }

  std::vector<double> queries;
  for (const auto& p : report.pairs)
    queries.push_back(static_cast<double>(p.queries_to_reach_fresh_best));
  std::sort(queries.begin(), queries.end());
  const std::size_t n = queries.size();
  report.median_queries_to_reach =
      n % 2 == 1 ? queries[n / 2] : 0.5 * (queries[n / 2 - 1] + queries[n / 2]);

  if (writing) write_json_file(out_dir / "transfer_summary.json", report.to_json());
  return report;
}

json TransferReport::to_json() const {
  json pairs_json = json::array();
  for (const auto& p : pairs)
    pairs_json.push_back({{"pretrain_seed", p.pretrain_seed},
                          {"finetune_seed", p.finetune_seed},
                          {"pretrain_best", p.pretrain_best},
                          {"fresh_best", p.fresh_best},
                          {"finetune_best", p.finetune_best},
                          {"queries_to_reach_fresh_best",
                           p.queries_to_reach_fresh_best}});
  return {{"pairs", pairs_json},
          {"median_queries_to_reach", median_queries_to_reach}};
}

json cmd_enumerate(const SearchSpaceSpec& space, AccuracyOracle& oracle, int k,
                   const std::string& out_path) {
  const auto top = enumerate_top(space, oracle, k);
  const auto mean = mean_arch_vector(space, top);

  json entries = json::array();
  for (const auto& e : top)
    entries.push_back({{"key", e.key},
                       {"valid_acc", e.valid_acc},
                       {"test_acc", e.test_acc}});
  json mean_state = json::array();
  std::size_t off = 0;
  for (const auto& b : space.blocks) {
    json rows = json::array();
    for (int r = 0; r < b.rows; ++r) {
      json row = json::array();
      for (int c = 0; c < b.cols; ++c) row.push_back(mean[off++]);
      rows.push_back(row);
    }
    mean_state.push_back(rows);
  }
  json j = {{"space", space_to_json(space)},
            {"k", k},
            {"entries", entries},
            {"mean_state", mean_state}};
  if (!out_path.empty()) write_json_file(out_path, j);
  return j;
}

namespace {

std::vector<StepLog> read_step_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log file: " + path);
  std::vector<StepLog> logs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error("corrupt log " + path + " line " +
                               std::to_string(line_no));
    try {
      logs.push_back(step_log_from_json(j));
    } catch (const json::exception& e) {
      throw std::runtime_error("corrupt log " + path + " line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return logs;
}

}  // namespace

json cmd_report(const std::vector<std::string>& log_paths,
                const std::string& enumeration_path, int k) {
  json enumeration;
  SearchSpaceSpec enum_space;
  std::vector<double> enum_mean;
  if (!enumeration_path.empty()) {
    if (k < 1)
      throw std::invalid_argument("report: --k is required with --enumeration");
    std::ifstream in(enumeration_path);
    if (!in)
      throw std::runtime_error("cannot open enumeration file: " + enumeration_path);
    enumeration = json::parse(in);
    enum_space = space_from_json(enumeration.at("space"));
    for (const auto& blk : enumeration.at("mean_state"))
      for (const auto& row : blk)
        for (const auto& v : row) enum_mean.push_back(v.get<double>());
  }

  json per_log = json::array();
  std::vector<double> best_valids, best_tests;
  std::vector<std::vector<double>> curves;
  bool have_tests = true;
  for (const auto& path : log_paths) {
    const auto logs = read_step_log(path);
    double best = -1.0;
    std::string best_key;
    int best_step = -1;
    std::vector<double> curve;
    for (const auto& log : logs) {
      if (log.valid_acc > best) {
        best = log.valid_acc;
        best_key = log.arch_key;
        best_step = log.step;
      }
      if (std::abs(log.best_so_far - best) > 1e-12)
        throw std::runtime_error("corrupt log " + path +
                                 ": best_so_far disagrees with recomputation at step " +
                                 std::to_string(log.step));
      curve.push_back(best);
    }
    json entry = {{"log", path},
                  {"steps", logs.size()},
                  {"best_valid", logs.empty() ? json(nullptr) : json(best)},
                  {"best_key", best_key},
                  {"best_step", best_step}};

    // test accuracy lives in the sibling result.json when the run wrote one
    const fs::path sibling = fs::path(path).parent_path() / "result.json";
    if (fs::exists(sibling)) {
      std::ifstream rin(sibling);
      const json r = json::parse(rin, nullptr, false);
      if (!r.is_discarded() && r.contains("best_test")) {
        entry["best_test"] = r["best_test"];
        best_tests.push_back(r["best_test"].get<double>());
      } else {
        have_tests = false;
      }
    } else {
      have_tests = false;
    }

    if (!enum_mean.empty()) {
      TopKTracker tracker(k);
      for (const auto& log : logs)
        tracker.offer(parse_arch_key(enum_space, log.arch_key), log.arch_key,
                      log.valid_acc);
      const auto state = flatten(enum_space, state_from_tracker(enum_space, tracker));
      double mad = 0.0;
      for (std::size_t i = 0; i < state.size(); ++i)
        mad += std::abs(state[i] - enum_mean[i]) / static_cast<double>(state.size());
      entry["state_mad_vs_enumeration"] = mad;
    }

    if (!logs.empty()) best_valids.push_back(best);
    per_log.push_back(entry);
    curves.push_back(std::move(curve));
  }

  const auto v = mean_std(best_valids);
  json report = {{"per_log", per_log},
                 {"mean_valid", v.mean},
                 {"std_valid", v.std}};
  if (have_tests && !best_tests.empty()) {
    const auto t = mean_std(best_tests);
    report["mean_test"] = t.mean;
    report["std_test"] = t.std;
  }

  // mean best-so-far at standard budgets shared by every log
  std::size_t min_steps = SIZE_MAX;
  for (const auto& c : curves) min_steps = std::min(min_steps, c.size());
  json budgets = json::object();
  for (const std::size_t budget : {250UL, 500UL, 1000UL}) {
    if (min_steps < budget || curves.empty()) continue;
    double mean = 0.0;
    for (const auto& c : curves) mean += c[budget - 1];
    budgets[std::to_string(budget)] = mean / static_cast<double>(curves.size());
  }
  report["mean_best_at_budget"] = budgets;
  return report;
}

void import_nb201(const std::string& in_path, const std::string& out_path,
                  const std::string& dataset, std::optional<double> acc_env,
                  bool percent_scale) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot open input file: " + in_path);
  const auto space = builtin_space("nb201");
  const double scale = percent_scale ? 0.01 : 1.0;

  std::map<std::string, AccRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("arch_str") ||
        !j.contains("valid_acc") || !j.contains("test_acc"))
      throw std::runtime_error(
          in_path + " line " + std::to_string(line_no) +
          ": expected {\"arch_str\", \"valid_acc\", \"test_acc\"}");
    DiscreteArch arch;
    try {
      arch = parse_nb201_arch_str(space, j["arch_str"].get<std::string>());
    } catch (const std::exception& e) {
      throw std::runtime_error(in_path + " line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    AccRecord rec{j["valid_acc"].get<double>() * scale,
                  j["test_acc"].get<double>() * scale};
    if (!(rec.valid_acc >= 0.0 && rec.valid_acc <= 1.0) ||
        !(rec.test_acc >= 0.0 && rec.test_acc <= 1.0))
      throw std::runtime_error(in_path + " line " + std::to_string(line_no) +
                               ": accuracy outside [0,1] after scaling");
    if (!records.emplace(arch_key(space, arch), rec).second)
      throw std::runtime_error(in_path + " line " + std::to_string(line_no) +
                               ": duplicate architecture");
  }
  std::optional<double> env = acc_env;
  if (env && percent_scale) env = *env * 0.01;
  TabularOracle(space, dataset, env, std::move(records)).save(out_path);
}

}  // namespace l2nas
