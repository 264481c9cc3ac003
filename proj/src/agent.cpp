#include "l2nas/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "l2nas/serialize.hpp"

namespace l2nas {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Tracker and state
// ---------------------------------------------------------------------------

TopKTracker::TopKTracker(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("tracker capacity must be >= 1");
}

namespace {

bool tracker_better(const TopKEntry& a, const TopKEntry& b) {
  if (a.acc != b.acc) return a.acc > b.acc;
  return a.key < b.key;
}

}  // namespace

bool TopKTracker::offer(const DiscreteArch& arch, const std::string& key,
                        double acc) {
  if (keys_.count(key)) return false;
  const bool full = size() == capacity_;
  if (full && !(acc > entries_.back().acc)) return false;
  if (full) {
    keys_.erase(entries_.back().key);
    entries_.pop_back();
  }
  TopKEntry entry{arch, key, acc};
  const auto it = std::lower_bound(
      entries_.begin(), entries_.end(), entry,
      [](const TopKEntry& a, const TopKEntry& b) { return tracker_better(a, b); });
  entries_.insert(it, std::move(entry));
  keys_.insert(key);
  return true;
}

StateMatrix state_from_tracker(const SearchSpaceSpec& space,
                               const TopKTracker& tracker) {
  StateMatrix state;
  if (tracker.empty()) {
    for (const auto& b : space.blocks)
      state.blocks.push_back(Matrix(b.rows, b.cols, 1.0 / b.cols));
    return state;
  }
  for (const auto& b : space.blocks) state.blocks.push_back(Matrix(b.rows, b.cols));
  const double n = static_cast<double>(tracker.size());
  for (const auto& e : tracker.entries())
    for (std::size_t blk = 0; blk < state.blocks.size(); ++blk)
      for (std::size_t i = 0; i < state.blocks[blk].data.size(); ++i)
        state.blocks[blk].data[i] += e.arch.blocks[blk].data[i] / n;
  return state;
}

// ---------------------------------------------------------------------------
// Exploration schedule and batch rule
// ---------------------------------------------------------------------------

double epsilon_at(int t, double eps0, double eps_min, int anneal_end) {
  if (t < 0) throw std::invalid_argument("epsilon_at: t must be >= 0");
  if (anneal_end < 1 || t >= anneal_end) return eps_min;
  return eps_min + 0.5 * (eps0 - eps_min) *
                       (1.0 + std::cos(std::numbers::pi * t / anneal_end));
}

int batches_per_step(std::size_t buffer_size, int batch_size, int c_max) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  const auto c = buffer_size / static_cast<std::size_t>(batch_size);
  return static_cast<int>(std::min<std::size_t>(c, static_cast<std::size_t>(c_max)));
}

// ---------------------------------------------------------------------------
// Agent
// ---------------------------------------------------------------------------

void AgentConfig::validate() const {
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("config: tau must be in (0,1)");
  if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
  if (noise_xi < 0.0) throw std::invalid_argument("config: noise_xi must be >= 0");
  if (c_max < 1) throw std::invalid_argument("config: c_max must be >= 1");
  if (hidden_width < 1)
    throw std::invalid_argument("config: hidden_width must be >= 1");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw std::invalid_argument("config: learning rates must be positive");
  if (steps < 0) throw std::invalid_argument("config: steps must be >= 0");
  if (exploration.kind == Exploration::Kind::kEpsGreedy) {
    if (exploration.eps0 < 0 || exploration.eps0 > 1 || exploration.eps_min < 0 ||
        exploration.eps_min > exploration.eps0)
      throw std::invalid_argument("config: need 0 <= eps_min <= eps0 <= 1");
    if (exploration.anneal_end < 1)
      throw std::invalid_argument("config: anneal_end must be >= 1");
  } else if (exploration.warmup_steps < 0) {
    throw std::invalid_argument("config: warmup_steps must be >= 0");
  }
  if (reward.kind == RewardMode::Kind::kRescaled &&
      !(reward.acc_env > 0.0 && reward.acc_env <= 1.0))
    throw std::invalid_argument("config: rescaled reward needs acc_env in (0,1]");
}

Agent::Agent(SearchSpaceSpec space, AgentConfig config)
    : space_(std::move(space)),
      config_(config),
      buffer_(config.buffer_capacity),
      tracker_(config.k),
      rng_(config.seed) {
  config_.validate();
  validate_space(space_);
  const int dim = space_.total_dim;
  const int h = config_.hidden_width;
  // Draw order is fixed: actor weights first, then critic weights.
  actor_ = mlp_init({dim, h, h, h, dim}, OutputActivation::kSigmoid, rng_);
  critic_ = mlp_init({dim, h, h, h, 1}, OutputActivation::kIdentity, rng_);
  actor_adam_ = AdamState(actor_, config_.actor_lr);
  critic_adam_ = AdamState(critic_, config_.critic_lr);
  state_ = state_from_tracker(space_, tracker_);
}

Agent::Agent(SearchSpaceSpec space, AgentConfig config, FromCheckpoint)
    : space_(std::move(space)),
      config_(config),
      buffer_(config.buffer_capacity),
      tracker_(config.k),
      rng_(config.seed) {
  state_ = state_from_tracker(space_, tracker_);
}

ContinuousAction Agent::select_action(const StateMatrix& s, int t) {
  const auto& ex = config_.exploration;
  bool explore;
  if (ex.kind == Exploration::Kind::kWarmup)
    explore = t < ex.warmup_steps;
  else
    explore = rng_.chance(epsilon_at(t, ex.eps0, ex.eps_min, ex.anneal_end));
  if (explore) return random_action(space_, rng_);

  Matrix x(1, space_.total_dim);
  x.data = flatten(space_, s);
  const Matrix mu = forward(actor_, x);
  std::vector<double> out = mu.data;
  for (auto& v : out) {
    v += rng_.uniform(-config_.noise_xi, config_.noise_xi);
    v = std::clamp(v, 0.0, 1.0);
  }
  return unflatten(space_, out);
}

void Agent::record(const StateMatrix& s, const ContinuousAction& a,
                   const DiscreteArch& arch, double reward, double acc) {
  buffer_.push({flatten(space_, s), flatten(space_, a), reward});
  const std::string key = arch_key(space_, arch);
  tracker_.offer(arch, key, acc);
  state_ = state_from_tracker(space_, tracker_);
  if (acc > best_acc_) {
    best_acc_ = acc;
    best_key_ = key;
    best_arch_ = arch;
    best_step_ = t_;
  }
  t_ += 1;
}

std::optional<TrainStats> Agent::train_step() {
  const int c_total =
      batches_per_step(buffer_.size(), config_.batch_size, config_.c_max);
  if (c_total == 0) return std::nullopt;

  const int batch = config_.batch_size;
  const int dim = space_.total_dim;
  double loss_sum = 0.0;
  double q_sum = 0.0;

  for (int c = 0; c < c_total; ++c) {
    // One batch sampled with replacement; the critic and actor updates both
    // use it, critic first.
    std::vector<const Experience*> exps(batch);
    for (int b = 0; b < batch; ++b)
      exps[b] = &buffer_.at(rng_.next_below(buffer_.size()));

    Matrix alpha(batch, dim);
    for (int b = 0; b < batch; ++b)
      std::copy(exps[b]->action.begin(), exps[b]->action.end(),
                alpha.data.begin() + static_cast<std::size_t>(b) * dim);

    ForwardCache critic_cache;
    const Matrix q = forward(critic_, alpha, critic_cache);
    Matrix dloss_dq(batch, 1);
    double loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      const auto cl = check_loss(exps[b]->reward, q.at(b, 0), config_.tau);
      loss += cl.loss / batch;
      dloss_dq.at(b, 0) = cl.dloss_dq / batch;
    }
    const auto critic_back = backward(critic_, critic_cache, dloss_dq);
    adam_step(critic_, critic_back.grads, critic_adam_);

    Matrix states(batch, dim);
    for (int b = 0; b < batch; ++b)
      std::copy(exps[b]->state.begin(), exps[b]->state.end(),
                states.data.begin() + static_cast<std::size_t>(b) * dim);

    ForwardCache actor_cache;
    const Matrix mu = forward(actor_, states, actor_cache);
    ForwardCache chain_cache;
    const Matrix q_mu = forward(critic_, mu, chain_cache);
    double mean_q = 0.0;
    for (int b = 0; b < batch; ++b) mean_q += q_mu.at(b, 0) / batch;

    // Ascend mean Q: feed -1/B through the frozen critic down to its input,
    // then through the actor.
    Matrix dq(batch, 1, -1.0 / batch);
    const auto chain_back = backward(critic_, chain_cache, dq);
    const auto actor_back = backward(actor_, actor_cache, chain_back.dinput);
    adam_step(actor_, actor_back.grads, actor_adam_);

    loss_sum += loss;
    q_sum += mean_q;
  }
  return TrainStats{c_total, loss_sum / c_total, q_sum / c_total};
}

void Agent::reconfigure(const AgentConfig& config) {
  config.validate();
  if (config.hidden_width != config_.hidden_width)
    throw std::invalid_argument("reconfigure cannot change hidden_width");
  config_ = config;
  buffer_ = ReplayBuffer(config.buffer_capacity);
  tracker_ = TopKTracker(config.k);
  state_ = state_from_tracker(space_, tracker_);
  rng_ = Rng(config.seed);
  actor_adam_.lr = config.actor_lr;
  critic_adam_.lr = config.critic_lr;
  t_ = 0;
  best_acc_ = -1.0;
  best_key_.clear();
  best_arch_ = DiscreteArch{};
  best_step_ = -1;
}

// ---------------------------------------------------------------------------
// Search loops
// ---------------------------------------------------------------------------

SearchResult run_search(Agent& agent, AccuracyOracle& oracle, int steps,
                        const StepSink& sink) {
  if (!same_space_shape(agent.space(), oracle.space()))
    throw std::invalid_argument("oracle space shape does not match the agent's");

  SearchResult res;
  res.best_curve.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int i = 0; i < steps; ++i) {
    const int t = agent.step_count();
    const StateMatrix s = agent.state();
    const ContinuousAction action = agent.select_action(s, t);
    const DiscreteArch arch = discretize(agent.space(), action);
    const double acc = oracle.query(arch, Split::kValid);
    const double reward = agent.config().reward.reward(acc);
    agent.record(s, action, arch, reward, acc);
    const auto stats = agent.train_step();

    StepLog log;
    log.step = t;
    log.arch_key = arch_key(agent.space(), arch);
    log.valid_acc = acc;
    log.reward = reward;
    const auto& ex = agent.config().exploration;
    if (ex.kind == Exploration::Kind::kWarmup) {
      log.warmup_mode = true;
      log.phase = t < ex.warmup_steps ? "warmup" : "policy";
    } else {
      log.epsilon = epsilon_at(t, ex.eps0, ex.eps_min, ex.anneal_end);
    }
    if (stats) {
      log.batches = stats->batches;
      log.critic_loss = stats->critic_loss;
      log.mean_q = stats->mean_q;
    }
    log.best_so_far = agent.best_acc();
    res.logs.push_back(log);
    if (sink) sink(log);
    res.best_curve.push_back(agent.best_acc());
  }
  res.final_state = agent.state();
  res.tracker_entries = agent.tracker().entries();
  if (agent.best_step() >= 0) {
    res.best_key = agent.best_key();
    res.best_arch = agent.best_arch();
    res.best_valid = agent.best_acc();
    res.best_step = agent.best_step();
    res.best_test = oracle.query(agent.best_arch(), Split::kTest);
  }
  return res;
}

SearchResult run_search(AccuracyOracle& oracle, const AgentConfig& config,
                        const StepSink& sink) {
  Agent agent(oracle.space(), config);
  return run_search(agent, oracle, config.steps, sink);
}

SearchResult fine_tune(Agent& pretrained, AccuracyOracle& new_oracle,
                       const FineTuneOverrides& overrides, const StepSink& sink) {
  if (!same_space_shape(pretrained.space(), new_oracle.space()))
    throw std::invalid_argument(
        "fine_tune: new oracle's space shape differs from the checkpoint's");
  AgentConfig cfg = pretrained.config();
  cfg.k = overrides.k;
  cfg.steps = overrides.steps;
  cfg.exploration = Exploration::warmup(overrides.warmup_steps);
  cfg.reward = overrides.reward;
  cfg.seed = overrides.seed;
  pretrained.reconfigure(cfg);
  return run_search(pretrained, new_oracle, cfg.steps, sink);
}

// ---------------------------------------------------------------------------
// JSON encodings
// ---------------------------------------------------------------------------

json agent_config_to_json(const AgentConfig& c) {
  json ex;
  if (c.exploration.kind == Exploration::Kind::kEpsGreedy) {
    ex = {{"type", "eps_greedy"},
          {"eps0", c.exploration.eps0},
          {"eps_min", c.exploration.eps_min},
          {"anneal_end", c.exploration.anneal_end}};
  } else {
    ex = {{"type", "warmup"}, {"warmup_steps", c.exploration.warmup_steps}};
  }
  json reward;
  if (c.reward.kind == RewardMode::Kind::kSimple)
    reward = {{"mode", "simple"}};
  else
    reward = {{"mode", "rescaled"}, {"acc_env", c.reward.acc_env}};
  return {{"k", c.k},
          {"tau", c.tau},
          {"batch_size", c.batch_size},
          {"noise_xi", c.noise_xi},
          {"c_max", c.c_max},
          {"exploration", ex},
          {"hidden_width", c.hidden_width},
          {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"buffer_capacity", c.buffer_capacity},
          {"steps", c.steps},
          {"reward", reward},
          {"seed", c.seed}};
}

AgentConfig agent_config_from_json(const json& j) {
  AgentConfig c;
  c.k = j.at("k").get<int>();
  c.tau = j.at("tau").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.noise_xi = j.at("noise_xi").get<double>();
  c.c_max = j.at("c_max").get<int>();
  c.hidden_width = j.at("hidden_width").get<int>();
  c.actor_lr = j.at("actor_lr").get<double>();
  c.critic_lr = j.at("critic_lr").get<double>();
  c.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
  c.steps = j.at("steps").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const json& ex = j.at("exploration");
  const std::string kind = ex.at("type").get<std::string>();
  if (kind == "eps_greedy") {
    c.exploration = Exploration::eps_greedy(ex.at("eps0").get<double>(),
                                            ex.at("eps_min").get<double>(),
                                            ex.at("anneal_end").get<int>());
  } else if (kind == "warmup") {
    c.exploration = Exploration::warmup(ex.at("warmup_steps").get<int>());
  } else {
    throw std::invalid_argument("unknown exploration type '" + kind + "'");
  }
  const json& rw = j.at("reward");
  const std::string mode = rw.at("mode").get<std::string>();
  if (mode == "simple") {
    c.reward = RewardMode::simple();
  } else if (mode == "rescaled") {
    c.reward = RewardMode::rescaled(rw.at("acc_env").get<double>());
  } else {
    throw std::invalid_argument("unknown reward mode '" + mode + "'");
  }
  c.validate();
  return c;
}

json space_to_json(const SearchSpaceSpec& space) {
  json blocks = json::array();
  for (const auto& b : space.blocks)
    blocks.push_back(
        {{"rows", b.rows},
         {"cols", b.cols},
         {"op_names", b.op_names},
         {"discretizer",
          b.discretizer == Discretizer::kRowArgmax ? "row_argmax" : "darts_top2"},
         {"node_count", b.node_count}});
  return {{"name", space.name}, {"blocks", blocks}};
}

SearchSpaceSpec space_from_json(const json& j) {
  SearchSpaceSpec space;
  space.name = j.at("name").get<std::string>();
  for (const auto& jb : j.at("blocks")) {
    MatrixBlock b;
    b.rows = jb.at("rows").get<int>();
    b.cols = jb.at("cols").get<int>();
    b.op_names = jb.at("op_names").get<std::vector<std::string>>();
    const std::string d = jb.at("discretizer").get<std::string>();
    if (d == "row_argmax")
      b.discretizer = Discretizer::kRowArgmax;
    else if (d == "darts_top2")
      b.discretizer = Discretizer::kDartsTop2;
    else
      throw std::invalid_argument("unknown discretizer '" + d + "'");
    b.node_count = jb.at("node_count").get<int>();
    space.total_dim += b.rows * b.cols;
    space.blocks.push_back(std::move(b));
  }
  validate_space(space);
  return space;
}

json step_log_to_json(const StepLog& log) {
  json j = {{"step", log.step},
            {"arch_key", log.arch_key},
            {"valid_acc", log.valid_acc},
            {"reward", log.reward},
            {"C", log.batches},
            {"best_so_far", log.best_so_far}};
  j["epsilon_or_phase"] = log.warmup_mode ? json(log.phase) : json(log.epsilon);
  j["critic_loss"] = log.critic_loss ? json(*log.critic_loss) : json(nullptr);
  j["mean_q"] = log.mean_q ? json(*log.mean_q) : json(nullptr);
  return j;
}

StepLog step_log_from_json(const json& j) {
  StepLog log;
  log.step = j.at("step").get<int>();
  log.arch_key = j.at("arch_key").get<std::string>();
  log.valid_acc = j.at("valid_acc").get<double>();
  log.reward = j.at("reward").get<double>();
  log.batches = j.at("C").get<int>();
  log.best_so_far = j.at("best_so_far").get<double>();
  const json& ep = j.at("epsilon_or_phase");
  if (ep.is_string()) {
    log.warmup_mode = true;
    log.phase = ep.get<std::string>();
  } else {
    log.epsilon = ep.get<double>();
  }
  if (!j.at("critic_loss").is_null())
    log.critic_loss = j.at("critic_loss").get<double>();
  if (!j.at("mean_q").is_null()) log.mean_q = j.at("mean_q").get<double>();
  return log;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kMagic = "L2NAS-CKPT";
constexpr int kVersion = 1;

json layer_to_json(const LayerParams& p) {
  return {{"in", p.in}, {"out", p.out}, {"w", p.w}, {"b", p.b}};
}

LayerParams layer_from_json(const json& j) {
  LayerParams p(j.at("in").get<int>(), j.at("out").get<int>());
  p.w = j.at("w").get<std::vector<double>>();
  p.b = j.at("b").get<std::vector<double>>();
  if (p.w.size() != static_cast<std::size_t>(p.in) * p.out ||
      p.b.size() != static_cast<std::size_t>(p.out))
    throw std::runtime_error("checkpoint: layer payload size mismatch");
  return p;
}

json mlp_to_json(const Mlp& net) {
  json layers = json::array();
  for (const auto& p : net.layers) layers.push_back(layer_to_json(p));
  return {{"dims", net.dims},
          {"out_act",
           net.out_act == OutputActivation::kSigmoid ? "sigmoid" : "identity"},
          {"layers", layers}};
}

Mlp mlp_from_json(const json& j) {
  Mlp net;
  net.dims = j.at("dims").get<std::vector<int>>();
  const std::string act = j.at("out_act").get<std::string>();
  if (act == "sigmoid")
    net.out_act = OutputActivation::kSigmoid;
  else if (act == "identity")
    net.out_act = OutputActivation::kIdentity;
  else
    throw std::runtime_error("checkpoint: unknown activation '" + act + "'");
  for (const auto& jl : j.at("layers")) net.layers.push_back(layer_from_json(jl));
  if (net.layers.size() + 1 != net.dims.size())
    throw std::runtime_error("checkpoint: layer count mismatch");
  return net;
}

json adam_to_json(const AdamState& s) {
  json m = json::array(), v = json::array();
  for (const auto& p : s.m) m.push_back(layer_to_json(p));
  for (const auto& p : s.v) v.push_back(layer_to_json(p));
  return {{"lr", s.lr}, {"beta1", s.beta1}, {"beta2", s.beta2},
          {"eps", s.eps}, {"step", s.step}, {"m", m},
          {"v", v}};
}

AdamState adam_from_json(const json& j) {
  AdamState s;
  s.lr = j.at("lr").get<double>();
  s.beta1 = j.at("beta1").get<double>();
  s.beta2 = j.at("beta2").get<double>();
  s.eps = j.at("eps").get<double>();
  s.step = j.at("step").get<long long>();
  for (const auto& jl : j.at("m")) s.m.push_back(layer_from_json(jl));
  for (const auto& jl : j.at("v")) s.v.push_back(layer_from_json(jl));
  return s;
}

}  // namespace

void Agent::save_checkpoint(const std::string& path, bool include_buffer) const {
  json ckpt;
  ckpt["magic"] = kMagic;
  ckpt["version"] = kVersion;
  ckpt["config"] = agent_config_to_json(config_);
  ckpt["space"] = space_to_json(space_);
  ckpt["actor"] = mlp_to_json(actor_);
  ckpt["critic"] = mlp_to_json(critic_);
  ckpt["actor_adam"] = adam_to_json(actor_adam_);
  ckpt["critic_adam"] = adam_to_json(critic_adam_);
  ckpt["rng_state"] = rng_.state();
  ckpt["t"] = t_;
  if (best_step_ >= 0)
    ckpt["best"] = {{"key", best_key_}, {"acc", best_acc_}, {"step", best_step_}};
  else
    ckpt["best"] = nullptr;
  json tracker = json::array();
  for (const auto& e : tracker_.entries())
    tracker.push_back({{"key", e.key}, {"acc", e.acc}});
  ckpt["tracker"] = tracker;
  if (include_buffer) {
    json buf = json::array();
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      const auto& e = buffer_.at(i);
      buf.push_back({{"s", e.state}, {"a", e.action}, {"r", e.reward}});
    }
    ckpt["buffer"] = buf;
  } else {
    ckpt["buffer"] = nullptr;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << ckpt.dump() << '\n';
}

Agent Agent::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json ckpt = json::parse(in, nullptr, false);
  if (ckpt.is_discarded())
    throw std::runtime_error("corrupt checkpoint (not JSON): " + path);
  if (!ckpt.contains("magic") || ckpt["magic"] != kMagic)
    throw std::runtime_error("not an agent checkpoint: " + path);
  if (!ckpt.contains("version") || ckpt["version"].get<int>() != kVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path);

  try {
    SearchSpaceSpec space = space_from_json(ckpt.at("space"));
    AgentConfig config = agent_config_from_json(ckpt.at("config"));
    Agent agent(std::move(space), config, FromCheckpoint{});
    agent.actor_ = mlp_from_json(ckpt.at("actor"));
    agent.critic_ = mlp_from_json(ckpt.at("critic"));
    agent.actor_adam_ = adam_from_json(ckpt.at("actor_adam"));
    agent.critic_adam_ = adam_from_json(ckpt.at("critic_adam"));
    agent.rng_.set_state(ckpt.at("rng_state").get<std::uint64_t>());
    agent.t_ = ckpt.at("t").get<int>();
    for (const auto& je : ckpt.at("tracker")) {
      const std::string key = je.at("key").get<std::string>();
      agent.tracker_.offer(parse_arch_key(agent.space_, key), key,
                           je.at("acc").get<double>());
    }
    agent.state_ = state_from_tracker(agent.space_, agent.tracker_);
    if (!ckpt.at("best").is_null()) {
      agent.best_key_ = ckpt["best"].at("key").get<std::string>();
      agent.best_acc_ = ckpt["best"].at("acc").get<double>();
      agent.best_step_ = ckpt["best"].at("step").get<int>();
      agent.best_arch_ = parse_arch_key(agent.space_, agent.best_key_);
    }
    if (!ckpt.at("buffer").is_null()) {
      for (const auto& je : ckpt["buffer"]) {
        Experience e;
        e.state = je.at("s").get<std::vector<double>>();
        e.action = je.at("a").get<std::vector<double>>();
        e.reward = je.at("r").get<double>();
        if (e.state.size() != static_cast<std::size_t>(agent.space_.total_dim) ||
            e.action.size() != static_cast<std::size_t>(agent.space_.total_dim))
          throw std::runtime_error("buffer entry dimension mismatch");
        agent.buffer_.push(std::move(e));
      }
    }
    if (!all_finite(agent.actor_) || !all_finite(agent.critic_))
      throw std::runtime_error("non-finite network parameters");
    return agent;
  } catch (const json::exception& e) {
    throw std::runtime_error("corrupt checkpoint " + path + ": " + e.what());
  }
}

}  // namespace l2nas
