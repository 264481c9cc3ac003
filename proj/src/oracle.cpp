#include "l2nas/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace l2nas {

using nlohmann::json;

double AccuracyOracle::query(const DiscreteArch& arch, Split split) {
  const std::string key = arch_key(space_, arch);
  const int slot = split_sensitive() && split == Split::kTest ? 1 : 0;
  auto& memo = memo_[slot];
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  const double acc = evaluate(arch, key, split);
  std::lock_guard<std::mutex> lock(mu_);
  const auto [it, fresh] = memo.emplace(key, acc);
  if (fresh) ++evals_;
  return it->second;
}

double AccuracyOracle::query_key(const std::string& key, Split split) {
  return query(parse_arch_key(space_, key), split);
}

double AccuracyOracle::evaluate_direct(const DiscreteArch& arch, Split split) {
  return evaluate(arch, arch_key(space_, arch), split);
}

std::size_t AccuracyOracle::evaluations() const {
  std::lock_guard<std::mutex> lock(mu_);
  return evals_;
}

// ---------------------------------------------------------------------------
// Tabular oracle
// ---------------------------------------------------------------------------

namespace {

void check_acc_range(double acc, const std::string& what, int line_no) {
  if (!(acc >= 0.0 && acc <= 1.0))
    throw std::runtime_error("tabular file line " + std::to_string(line_no) + ": " +
                             what + " " + std::to_string(acc) +
                             " outside [0,1]");
}

json parse_line(const std::string& line, int line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw std::runtime_error("tabular file line " + std::to_string(line_no) +
                             ": not a JSON object");
  return j;
}

}  // namespace

TabularOracle::TabularOracle(SearchSpaceSpec space, std::string dataset,
                             std::optional<double> acc_env,
                             std::map<std::string, AccRecord> records)
    : AccuracyOracle(std::move(space)),
      dataset_(std::move(dataset)),
      acc_env_(acc_env),
      records_(std::move(records)) {}

TabularOracle TabularOracle::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tabular file: " + path);

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line))
    throw std::runtime_error("tabular file is empty: " + path);
  ++line_no;

  const json header = parse_line(line, line_no);
  if (!header.contains("space") || !header["space"].is_string())
    throw std::runtime_error("tabular file line 1: missing \"space\"");
  const std::string space_name = header["space"];
  const int edges = header.value("edges", 0);
  const int ops = header.value("ops", 0);
  SearchSpaceSpec space = builtin_space(space_name, edges, ops);

  std::optional<double> acc_env;
  if (header.contains("acc_env") && !header["acc_env"].is_null()) {
    acc_env = header["acc_env"].get<double>();
    check_acc_range(*acc_env, "acc_env", line_no);
  }
  const std::string dataset = header.value("dataset", "unknown");

  std::map<std::string, AccRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(line, line_no);
    if (!j.contains("key") || !j.contains("valid_acc") || !j.contains("test_acc"))
      throw std::runtime_error("tabular file line " + std::to_string(line_no) +
                               ": needs key, valid_acc, test_acc");
    const std::string key = j["key"];
    AccRecord rec{j["valid_acc"].get<double>(), j["test_acc"].get<double>()};
    check_acc_range(rec.valid_acc, "valid_acc", line_no);
    check_acc_range(rec.test_acc, "test_acc", line_no);
    try {
      parse_arch_key(space, key);
    } catch (const std::exception& e) {
      throw std::runtime_error("tabular file line " + std::to_string(line_no) +
                               ": bad key '" + key + "': " + e.what());
    }
    if (!records.emplace(key, rec).second)
      throw std::runtime_error("tabular file line " + std::to_string(line_no) +
                               ": duplicate key '" + key + "'");
  }
  return TabularOracle(std::move(space), dataset, acc_env, std::move(records));
}

void TabularOracle::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write tabular file: " + path);
  json header;
  header["space"] = space().name;
  if (space().name == "synthetic") {
    header["edges"] = space().block(0).rows;
    header["ops"] = space().block(0).cols;
  }
  header["dataset"] = dataset_;
  header["acc_env"] = acc_env_ ? json(*acc_env_) : json(nullptr);
  out << header.dump() << '\n';
  for (const auto& [key, rec] : records_) {
    json j;
    j["key"] = key;
    j["valid_acc"] = rec.valid_acc;
    j["test_acc"] = rec.test_acc;
    out << j.dump() << '\n';
  }
}

double TabularOracle::evaluate(const DiscreteArch&, const std::string& key,
                               Split split) {
  const auto it = records_.find(key);
  if (it == records_.end())
    throw MissingArchError("no tabular entry for arch '" + key + "'");
  return split == Split::kValid ? it->second.valid_acc : it->second.test_acc;
}

// ---------------------------------------------------------------------------
// Synthetic landscape
// ---------------------------------------------------------------------------

namespace {

double keyed_unit(std::uint64_t seed, std::uint64_t table, std::uint64_t i,
                  std::uint64_t j) {
  return unit_double(mix64(seed, table, i, j));
}

constexpr std::uint64_t kUnaryTable = 1;
constexpr std::uint64_t kPairTable = 2;

}  // namespace

SyntheticLandscape SyntheticLandscape::generate(std::uint64_t seed, int edges,
                                                int ops) {
  if (edges < 1 || ops < 2)
    throw std::invalid_argument("synthetic landscape needs edges >= 1, ops >= 2");
  SyntheticLandscape land;
  land.seed = seed;
  land.edges = edges;
  land.ops = ops;
  land.unary.assign(edges, std::vector<double>(ops));
  for (int e = 0; e < edges; ++e)
    for (int o = 0; o < ops; ++o)
      land.unary[e][o] = -1.0 + 2.0 * keyed_unit(seed, kUnaryTable, e, o);
  land.pair.assign(std::max(0, edges - 1),
                   std::vector<std::vector<double>>(ops, std::vector<double>(ops)));
  for (int e = 0; e + 1 < edges; ++e)
    for (int o = 0; o < ops; ++o)
      for (int o2 = 0; o2 < ops; ++o2)
        land.pair[e][o][o2] =
            -0.3 + 0.6 * keyed_unit(seed, kPairTable, e,
                                    static_cast<std::uint64_t>(o) * ops + o2);
  return land;
}

double synthetic_acc(const SyntheticLandscape& land, const DiscreteArch& arch) {
  if (arch.blocks.size() != 1 || arch.blocks[0].rows != land.edges ||
      arch.blocks[0].cols != land.ops)
    throw std::invalid_argument("synthetic_acc: arch shape mismatch");
  const auto& m = arch.blocks[0];
  std::vector<int> choice(land.edges, 0);
  for (int e = 0; e < land.edges; ++e)
    for (int o = 0; o < land.ops; ++o)
      if (m.at(e, o)) choice[e] = o;
  double raw = 0.0;
  for (int e = 0; e < land.edges; ++e) raw += land.unary[e][choice[e]];
  for (int e = 0; e + 1 < land.edges; ++e) raw += land.pair[e][choice[e]][choice[e + 1]];
  return 1.0 / (1.0 + std::exp(-raw));
}

SyntheticOracle::SyntheticOracle(SearchSpaceSpec space, std::uint64_t seed)
    : AccuracyOracle(std::move(space)) {
  validate_space(this->space());
  if (this->space().block_count() != 1 ||
      this->space().block(0).discretizer != Discretizer::kRowArgmax)
    throw std::invalid_argument(
        "synthetic oracle needs a single row-argmax block");
  land_ = SyntheticLandscape::generate(seed, this->space().block(0).rows,
                                       this->space().block(0).cols);
}

std::string SyntheticOracle::dataset() const {
  return "synthetic-" + std::to_string(land_.seed);
}

std::optional<double> SyntheticOracle::acc_env() const {
  std::lock_guard<std::mutex> lock(env_mu_);
  if (!max_acc_) {
    double best = 0.0;
    for_each_arch(space(), [&](const DiscreteArch& a) {
      best = std::max(best, synthetic_acc(land_, a));
      return true;
    });
    max_acc_ = best;
  }
  return max_acc_;
}

double SyntheticOracle::evaluate(const DiscreteArch& arch, const std::string&,
                                 Split) {
  return synthetic_acc(land_, arch);
}

// ---------------------------------------------------------------------------
// Rewards
// ---------------------------------------------------------------------------

double reward_simple(double acc) {
  if (!(acc >= 0.0 && acc <= 1.0))
    throw std::invalid_argument("reward_simple: accuracy " + std::to_string(acc) +
                                " outside [0,1]");
  return std::pow(100.0, acc);
}

double reward_rescaled(double acc, double acc_env) {
  if (!(acc_env > 0.0))
    throw std::invalid_argument("reward_rescaled: acc_env must be positive");
  if (!(acc >= 0.0))
    throw std::invalid_argument("reward_rescaled: accuracy must be >= 0");
  return std::pow(100.0, acc / acc_env) / 100.0 - 1.0;
}

double RewardMode::reward(double acc) const {
  return kind == Kind::kSimple ? reward_simple(acc) : reward_rescaled(acc, acc_env);
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

std::vector<ScoredArch> enumerate_top(const SearchSpaceSpec& space,
                                      AccuracyOracle& oracle, int k,
                                      double max_archs) {
  if (k < 1) throw std::invalid_argument("enumerate_top: k must be >= 1");
  const double count = arch_count(space);
  if (count > max_archs)
    throw std::runtime_error("space too large to enumerate: " +
                             std::to_string(count) + " architectures (cap " +
                             std::to_string(max_archs) + ")");

  // better = higher accuracy, then lexicographically smaller key
  const auto better = [](const ScoredArch& a, const ScoredArch& b) {
    if (a.valid_acc != b.valid_acc) return a.valid_acc > b.valid_acc;
    return a.key < b.key;
  };

  std::vector<ScoredArch> top;
  for_each_arch(space, [&](const DiscreteArch& arch) {
    ScoredArch s;
    s.arch = arch;
    s.key = arch_key(space, arch);
    s.valid_acc = oracle.evaluate_direct(arch, Split::kValid);
    s.test_acc = oracle.evaluate_direct(arch, Split::kTest);
    if (static_cast<int>(top.size()) < k) {
      top.push_back(std::move(s));
      std::push_heap(top.begin(), top.end(), better);
    } else if (better(s, top.front())) {
      std::pop_heap(top.begin(), top.end(), better);
      top.back() = std::move(s);
      std::push_heap(top.begin(), top.end(), better);
    }
    return true;
  });
  std::sort_heap(top.begin(), top.end(), better);
  return top;
}

std::vector<double> mean_arch_vector(const SearchSpaceSpec& space,
                                     const std::vector<ScoredArch>& entries) {
  std::vector<double> mean(space.total_dim, 0.0);
  if (entries.empty()) return mean;
  for (const auto& e : entries) {
    std::size_t off = 0;
    for (const auto& blk : e.arch.blocks)
      for (const auto bit : blk.data) mean[off++] += bit;
  }
  for (auto& v : mean) v /= static_cast<double>(entries.size());
  return mean;
}

}  // namespace l2nas
