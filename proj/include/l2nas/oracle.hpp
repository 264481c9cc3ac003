#ifndef L2NAS_ORACLE_HPP
#define L2NAS_ORACLE_HPP

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "l2nas/space.hpp"

namespace l2nas {

enum class Split { kValid, kTest };

struct MissingArchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accuracy source. query() is memoized per (key, split) and thread-safe;
// evaluations() counts underlying evaluations, so repeat queries are free.
class AccuracyOracle {
 public:
  virtual ~AccuracyOracle() = default;

  // Movable for setup-time handoff only; never move a shared oracle.
  AccuracyOracle(AccuracyOracle&& other) noexcept
      : space_(std::move(other.space_)),
        memo_{std::move(other.memo_[0]), std::move(other.memo_[1])},
        evals_(other.evals_) {}
  AccuracyOracle& operator=(AccuracyOracle&&) = delete;
  AccuracyOracle(const AccuracyOracle&) = delete;
  AccuracyOracle& operator=(const AccuracyOracle&) = delete;

  const SearchSpaceSpec& space() const { return space_; }
  virtual std::string dataset() const { return "unknown"; }
  virtual std::optional<double> acc_env() const { return std::nullopt; }

  double query(const DiscreteArch& arch, Split split);
  double query_key(const std::string& key, Split split);

  // Unmemoized evaluation; used by exhaustive sweeps that must not bloat the
  // memo cache.
  double evaluate_direct(const DiscreteArch& arch, Split split);

  std::size_t evaluations() const;

 protected:
  explicit AccuracyOracle(SearchSpaceSpec space) : space_(std::move(space)) {}
  virtual double evaluate(const DiscreteArch& arch, const std::string& key,
                          Split split) = 0;
  // Sources that cannot distinguish splits memoize per key, so each
  // architecture costs at most one evaluation total.
  virtual bool split_sensitive() const { return true; }

 private:
  SearchSpaceSpec space_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, double> memo_[2];
  std::size_t evals_ = 0;
};

struct AccRecord {
  double valid_acc = 0.0;
  double test_acc = 0.0;
};

// Lookup-table oracle backed by a JSONL file (see file format in README).
class TabularOracle : public AccuracyOracle {
 public:
  TabularOracle(SearchSpaceSpec space, std::string dataset,
                std::optional<double> acc_env,
                std::map<std::string, AccRecord> records);

  static TabularOracle load(const std::string& path);
  void save(const std::string& path) const;

  std::string dataset() const override { return dataset_; }
  std::optional<double> acc_env() const override { return acc_env_; }
  std::size_t size() const { return records_.size(); }
  const std::map<std::string, AccRecord>& records() const { return records_; }

 protected:
  double evaluate(const DiscreteArch& arch, const std::string& key,
                  Split split) override;

 private:
  std::string dataset_;
  std::optional<double> acc_env_;
  std::map<std::string, AccRecord> records_;
};

// Deterministic synthetic accuracy landscape over a single row-argmax block:
// acc = logistic(sum of unary utilities + consecutive-edge pair interactions).
// Tables are keyed integer hashes of (seed, table, indices), so the landscape
// is bit-identical across platforms.
struct SyntheticLandscape {
  std::uint64_t seed = 0;
  int edges = 0;
  int ops = 0;
  std::vector<std::vector<double>> unary;             // [edges][ops] in [-1,1]
  std::vector<std::vector<std::vector<double>>> pair; // [edges-1][ops][ops] in [-0.3,0.3]

  static SyntheticLandscape generate(std::uint64_t seed, int edges, int ops);
};

double synthetic_acc(const SyntheticLandscape& land, const DiscreteArch& arch);

class SyntheticOracle : public AccuracyOracle {
 public:
  SyntheticOracle(SearchSpaceSpec space, std::uint64_t seed);

  std::string dataset() const override;
  // Maximum accuracy of the landscape; the desk-scale stand-in for the best
  // accuracy observed in an environment. Enumerated lazily.
  std::optional<double> acc_env() const override;

  const SyntheticLandscape& landscape() const { return land_; }

 protected:
  double evaluate(const DiscreteArch& arch, const std::string& key,
                  Split split) override;

 private:
  SyntheticLandscape land_;
  mutable std::mutex env_mu_;
  mutable std::optional<double> max_acc_;
};

struct RewardMode {
  enum class Kind { kSimple, kRescaled };
  Kind kind = Kind::kSimple;
  double acc_env = 1.0;

  static RewardMode simple() { return {Kind::kSimple, 1.0}; }
  static RewardMode rescaled(double acc_env) { return {Kind::kRescaled, acc_env}; }

  double reward(double acc) const;
};

// r = 100^acc, a strictly increasing bijection [0,1] -> [1,100].
double reward_simple(double acc);

// r = 100^(acc/acc_env)/100 - 1; zero at acc == acc_env.
double reward_rescaled(double acc, double acc_env);

struct ScoredArch {
  DiscreteArch arch;
  std::string key;
  double valid_acc = 0.0;
  double test_acc = 0.0;
};

// Exact top-K of the whole space by validation accuracy, ties broken by key.
// Throws if the space holds more than max_archs architectures.
std::vector<ScoredArch> enumerate_top(const SearchSpaceSpec& space,
                                      AccuracyOracle& oracle, int k,
                                      double max_archs = 1e7);

// Elementwise mean of the discretized matrices of the given entries, as one
// flattened vector (the ground-truth counterpart of the agent state).
std::vector<double> mean_arch_vector(const SearchSpaceSpec& space,
                                     const std::vector<ScoredArch>& entries);

}  // namespace l2nas

#endif  // L2NAS_ORACLE_HPP
