#ifndef L2NAS_AGENT_HPP
#define L2NAS_AGENT_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "l2nas/neural.hpp"
#include "l2nas/oracle.hpp"
#include "l2nas/space.hpp"

namespace l2nas {

// The state is the elementwise mean of the tracker's discrete matrices, so it
// shares the action's per-block layout.
using StateMatrix = ContinuousAction;

struct TopKEntry {
  DiscreteArch arch;
  std::string key;
  double acc = 0.0;
};

// Top-K architectures by accuracy, deduplicated by key, sorted by accuracy
// descending then key ascending. A full tracker admits only strictly better
// entries, so its minimum accuracy never decreases.
class TopKTracker {
 public:
  explicit TopKTracker(int capacity);

  bool offer(const DiscreteArch& arch, const std::string& key, double acc);

  const std::vector<TopKEntry>& entries() const { return entries_; }
  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  double min_acc() const { return entries_.back().acc; }
  double max_acc() const { return entries_.front().acc; }

 private:
  int capacity_;
  std::vector<TopKEntry> entries_;
  std::unordered_set<std::string> keys_;
};

StateMatrix state_from_tracker(const SearchSpaceSpec& space,
                               const TopKTracker& tracker);

struct Experience {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
};

// FIFO store; capacity 0 means unbounded.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Experience e) {
    if (capacity_ > 0 && store_.size() == capacity_) store_.pop_front();
    store_.push_back(std::move(e));
  }

  const Experience& at(std::size_t i) const { return store_[i]; }
  std::size_t size() const { return store_.size(); }
  std::size_t capacity() const { return capacity_; }
  void clear() { store_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<Experience> store_;
};

struct Exploration {
  enum class Kind { kEpsGreedy, kWarmup };
  Kind kind = Kind::kEpsGreedy;
  double eps0 = 1.0;
  double eps_min = 0.05;
  int anneal_end = 175;
  int warmup_steps = 0;

  static Exploration eps_greedy(double eps0 = 1.0, double eps_min = 0.05,
                                int anneal_end = 175) {
    return {Kind::kEpsGreedy, eps0, eps_min, anneal_end, 0};
  }
  static Exploration warmup(int steps) { return {Kind::kWarmup, 0, 0, 1, steps}; }
};

// Cosine-annealed exploration probability: eps0 at t = 0 down to eps_min at
// t = anneal_end, eps_min afterwards.
double epsilon_at(int t, double eps0 = 1.0, double eps_min = 0.05,
                  int anneal_end = 175);

// C = min(floor(buffer_size / batch_size), c_max); 0 until one full batch.
int batches_per_step(std::size_t buffer_size, int batch_size, int c_max);

struct AgentConfig {
  int k = 64;
  double tau = 0.9;
  int batch_size = 8;
  double noise_xi = 1e-4;
  int c_max = 10;
  Exploration exploration = Exploration::eps_greedy();
  int hidden_width = 128;
  double actor_lr = 1e-3;
  double critic_lr = 1e-4;
  std::size_t buffer_capacity = 0;  // 0 = unbounded
  int steps = 1000;
  RewardMode reward = RewardMode::simple();
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainStats {
  int batches = 0;
  double critic_loss = 0.0;
  double mean_q = 0.0;
};

struct StepLog {
  int step = 0;
  std::string arch_key;
  double valid_acc = 0.0;
  double reward = 0.0;
  bool warmup_mode = false;
  double epsilon = 0.0;   // eps-greedy mode
  std::string phase;      // warmup mode: "warmup" or "policy"
  int batches = 0;
  std::optional<double> critic_loss;
  std::optional<double> mean_q;
  double best_so_far = 0.0;
};

struct SearchResult {
  std::string best_key;
  DiscreteArch best_arch;
  double best_valid = 0.0;
  double best_test = 0.0;
  int best_step = -1;
  std::vector<double> best_curve;  // best-so-far validation accuracy per step
  StateMatrix final_state;
  std::vector<TopKEntry> tracker_entries;
  std::vector<StepLog> logs;
};

class Agent {
 public:
  Agent(SearchSpaceSpec space, AgentConfig config);

  const SearchSpaceSpec& space() const { return space_; }
  const AgentConfig& config() const { return config_; }
  const StateMatrix& state() const { return state_; }
  int step_count() const { return t_; }

  ContinuousAction select_action(const StateMatrix& s, int t);
  void record(const StateMatrix& s, const ContinuousAction& a,
              const DiscreteArch& arch, double reward, double acc);
  std::optional<TrainStats> train_step();

  const TopKTracker& tracker() const { return tracker_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  double best_acc() const { return best_acc_; }
  const std::string& best_key() const { return best_key_; }
  const DiscreteArch& best_arch() const { return best_arch_; }
  int best_step() const { return best_step_; }

  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& critic() const { return critic_; }
  Rng& rng() { return rng_; }

  void save_checkpoint(const std::string& path, bool include_buffer = false) const;
  static Agent load_checkpoint(const std::string& path);

  // Warm-starts the networks and optimizer state for a new environment:
  // resets tracker (capacity from config), buffer, step counter, best-so-far
  // and rng; keeps actor/critic weights and Adam moments.
  void reconfigure(const AgentConfig& config);

 private:
  struct FromCheckpoint {};
  Agent(SearchSpaceSpec space, AgentConfig config, FromCheckpoint);

  SearchSpaceSpec space_;
  AgentConfig config_;
  Mlp actor_;
  Mlp critic_;
  AdamState actor_adam_;
  AdamState critic_adam_;
  ReplayBuffer buffer_;
  TopKTracker tracker_;
  StateMatrix state_;
  Rng rng_;
  int t_ = 0;
  double best_acc_ = -1.0;
  std::string best_key_;
  DiscreteArch best_arch_;
  int best_step_ = -1;
};

using StepSink = std::function<void(const StepLog&)>;

// Runs `steps` iterations of select -> discretize -> query -> reward ->
// record -> train on an existing agent. Oracle errors propagate after the
// sink has seen every completed step.
SearchResult run_search(Agent& agent, AccuracyOracle& oracle, int steps,
                        const StepSink& sink = nullptr);

// Fresh-agent convenience entry point; the search space is the oracle's.
SearchResult run_search(AccuracyOracle& oracle, const AgentConfig& config,
                        const StepSink& sink = nullptr);

struct FineTuneOverrides {
  int k = 100;
  int steps = 1000;
  int warmup_steps = 500;
  RewardMode reward = RewardMode::simple();
  std::uint64_t seed = 0;
};

// Transfer protocol: warm-start the checkpointed agent on a new oracle whose
// space has the same shape, with a reset tracker/buffer and warm-up
// exploration.
SearchResult fine_tune(Agent& pretrained, AccuracyOracle& new_oracle,
                       const FineTuneOverrides& overrides,
                       const StepSink& sink = nullptr);

}  // namespace l2nas

#endif  // L2NAS_AGENT_HPP
