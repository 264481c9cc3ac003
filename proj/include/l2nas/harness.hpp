#ifndef L2NAS_HARNESS_HPP
#define L2NAS_HARNESS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "l2nas/agent.hpp"
#include "l2nas/oracle.hpp"

namespace l2nas {

struct OracleConfig {
  enum class Type { kTabular, kSynthetic, kExternal };
  Type type = Type::kSynthetic;
  std::string path;             // tabular
  std::uint64_t seed = 0;       // synthetic
  std::string endpoint;         // external
  double timeout_s = 600.0;     // external; L2NAS_EVAL_TIMEOUT_S overrides
};

struct RunConfig {
  SearchSpaceSpec space;
  OracleConfig oracle;
  AgentConfig agent;
  bool acc_env_auto = false;  // reward acc_env resolved from oracle metadata
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  int jobs = 1;
};

// Named defaults for the agent section. "nb" is the benchmark-query profile,
// "large" the big-space profile (wide nets, warm-up exploration, capped
// buffer).
AgentConfig preset_agent_config(const std::string& name);

// Strict schema validation: unknown keys, missing required fields and
// out-of-range values all fail before any work starts.
RunConfig parse_run_config(const nlohmann::json& j, const std::string& preset);
RunConfig load_run_config(const std::string& path, const std::string& preset);

// Instantiates the configured oracle. For tabular sources the file's space
// must match the configured one.
std::unique_ptr<AccuracyOracle> make_oracle(const RunConfig& config);

// Resolves reward.acc_env == "auto" against the oracle metadata.
void resolve_acc_env(RunConfig& config, const AccuracyOracle& oracle);

struct SeedResult {
  std::uint64_t seed = 0;
  std::string best_key;
  double best_valid = 0.0;
  double best_test = 0.0;
  int best_step = -1;
  int steps = 0;
  double wall_time_s = 0.0;
  std::vector<double> best_curve;
};

struct RunReport {
  std::vector<SeedResult> seeds;
  double mean_valid = 0.0;
  double std_valid = 0.0;
  double mean_test = 0.0;
  double std_test = 0.0;
  std::optional<int> best_rank;  // rank of the best arch over all seeds

  nlohmann::json to_json() const;
};

// Runs the configured search once per seed (optionally in parallel worker
// threads) and writes per-seed JSONL logs plus summary.json under out_dir.
RunReport cmd_run(const RunConfig& config);

// Uniform-random baseline with the same logging and reporting.
RunReport cmd_baseline_random(const RunConfig& config);

struct TransferPair {
  std::uint64_t pretrain_seed = 0;
  std::uint64_t finetune_seed = 0;
  double pretrain_best = 0.0;
  double fresh_best = 0.0;
  double finetune_best = 0.0;
  // First fine-tune step (1-based query count) whose best-so-far reaches the
  // fresh agent's final best; steps+1 when never reached.
  int queries_to_reach_fresh_best = 0;
};

struct TransferReport {
  std::vector<TransferPair> pairs;
  double median_queries_to_reach = 0.0;

  nlohmann::json to_json() const;
};

// Pretrains per seed pair on the first environment, checkpoints, fine-tunes
// on the second, and runs a fresh-agent control for comparison.
TransferReport cmd_transfer(const RunConfig& pretrain, const RunConfig& finetune);

// Writes the exact top-K listing and the mean of its discretized matrices.
nlohmann::json cmd_enumerate(const SearchSpaceSpec& space, AccuracyOracle& oracle,
                             int k, const std::string& out_path);

// Rebuilds a report from step logs alone. If an enumeration file and K are
// given, also reports the mean absolute deviation between each run's final
// tracker state and the enumerated top-K mean.
nlohmann::json cmd_report(const std::vector<std::string>& log_paths,
                          const std::string& enumeration_path = "", int k = 0);

// Converts public NB-201-style arch strings to the tabular oracle format.
// Input: JSONL lines {"arch_str":..., "valid_acc":..., "test_acc":...}.
void import_nb201(const std::string& in_path, const std::string& out_path,
                  const std::string& dataset, std::optional<double> acc_env,
                  bool percent_scale);

}  // namespace l2nas

#endif  // L2NAS_HARNESS_HPP
