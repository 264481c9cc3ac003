#include "l2nas/neural.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace l2nas {

namespace {

// Pinned strictly inside (0,1): actions derived from actor outputs must never
// round to an exact 0 or 1.
double sigmoid(double z) {
  constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  constexpr double kAboveZero = std::numeric_limits<double>::min();
  double y;
  if (z >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    y = e / (1.0 + e);
  }
  return std::min(std::max(y, kAboveZero), kBelowOne);
}

void check_dims(const std::vector<int>& dims) {
  if (dims.size() != 5)
    throw std::invalid_argument("mlp dims must be [d_in, h, h, h, d_out]");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("mlp dims must be positive");
  if (dims[1] != dims[2] || dims[2] != dims[3])
    throw std::invalid_argument("mlp hidden layers must share one width");
}

}  // namespace

Mlp mlp_init(const std::vector<int>& dims, OutputActivation out_act, Rng& rng) {
  check_dims(dims);
  Mlp net;
  net.dims = dims;
  net.out_act = out_act;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    LayerParams p(dims[l], dims[l + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (auto& w : p.w) w = rng.uniform(-bound, bound);
    net.layers.push_back(std::move(p));
  }
  return net;
}

Matrix forward(const Mlp& net, const Matrix& x, ForwardCache& cache) {
  if (x.cols != net.input_dim())
    throw std::invalid_argument("forward: input width " + std::to_string(x.cols) +
                                " != d_in " + std::to_string(net.input_dim()));
  cache.input = x;
  cache.pre.clear();
  cache.post.clear();

  const Matrix* a = &cache.input;
  const int layer_count = static_cast<int>(net.layers.size());
  for (int l = 0; l < layer_count; ++l) {
    const auto& p = net.layers[l];
    Matrix z(x.rows, p.out);
    for (int r = 0; r < x.rows; ++r) {
      const double* in_row = &a->data[static_cast<std::size_t>(r) * p.in];
      double* z_row = &z.data[static_cast<std::size_t>(r) * p.out];
      for (int o = 0; o < p.out; ++o) {
        const double* w_row = &p.w[static_cast<std::size_t>(o) * p.in];
        double acc = p.b[o];
        for (int i = 0; i < p.in; ++i) acc += w_row[i] * in_row[i];
        z_row[o] = acc;
      }
    }
    Matrix act = z;
    if (l + 1 < layer_count) {
      for (auto& v : act.data) v = v > 0.0 ? v : 0.0;
    } else if (net.out_act == OutputActivation::kSigmoid) {
      for (auto& v : act.data) v = sigmoid(v);
    }
    cache.pre.push_back(std::move(z));
    cache.post.push_back(std::move(act));
    a = &cache.post.back();
  }
  return cache.post.back();
}

Matrix forward(const Mlp& net, const Matrix& x) {
  ForwardCache cache;
  return forward(net, x, cache);
}

BackwardResult backward(const Mlp& net, const ForwardCache& cache,
                        const Matrix& dloss_dy) {
  const int layer_count = static_cast<int>(net.layers.size());
  if (static_cast<int>(cache.post.size()) != layer_count ||
      !dloss_dy.same_shape(cache.post.back()))
    throw std::invalid_argument("backward: cache/upstream shape mismatch");

  BackwardResult res;
  res.grads.reserve(layer_count);
  for (const auto& p : net.layers) res.grads.emplace_back(p.in, p.out);

  const int batch = cache.input.rows;
  Matrix dz = dloss_dy;
  if (net.out_act == OutputActivation::kSigmoid) {
    const auto& y = cache.post.back();
    for (std::size_t i = 0; i < dz.data.size(); ++i)
      dz.data[i] *= y.data[i] * (1.0 - y.data[i]);
  }

  for (int l = layer_count - 1; l >= 0; --l) {
    const auto& p = net.layers[l];
    auto& g = res.grads[l];
    const Matrix& a_prev = (l == 0) ? cache.input : cache.post[l - 1];

    for (int r = 0; r < batch; ++r) {
      const double* dz_row = &dz.data[static_cast<std::size_t>(r) * p.out];
      const double* a_row = &a_prev.data[static_cast<std::size_t>(r) * p.in];
      for (int o = 0; o < p.out; ++o) {
        const double d = dz_row[o];
        if (d == 0.0) continue;
        g.b[o] += d;
        double* gw_row = &g.w[static_cast<std::size_t>(o) * p.in];
        for (int i = 0; i < p.in; ++i) gw_row[i] += d * a_row[i];
      }
    }

    Matrix da(batch, p.in);
    for (int r = 0; r < batch; ++r) {
      const double* dz_row = &dz.data[static_cast<std::size_t>(r) * p.out];
      double* da_row = &da.data[static_cast<std::size_t>(r) * p.in];
      for (int o = 0; o < p.out; ++o) {
        const double d = dz_row[o];
        if (d == 0.0) continue;
        const double* w_row = &p.w[static_cast<std::size_t>(o) * p.in];
        for (int i = 0; i < p.in; ++i) da_row[i] += d * w_row[i];
      }
    }

    if (l > 0) {
      const auto& z_prev = cache.pre[l - 1];
      for (std::size_t i = 0; i < da.data.size(); ++i)
        if (z_prev.data[i] <= 0.0) da.data[i] = 0.0;
    }
    dz = std::move(da);
  }
  res.dinput = std::move(dz);
  return res;
}

AdamState::AdamState(const Mlp& net, double learning_rate) : lr(learning_rate) {
  for (const auto& p : net.layers) {
    m.emplace_back(p.in, p.out);
    v.emplace_back(p.in, p.out);
  }
}

namespace {

void adam_update(std::vector<double>& theta, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v,
                 const AdamState& s, double bc1, double bc2) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    theta[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state) {
  if (grads.size() != net.layers.size() || state.m.size() != net.layers.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    adam_update(net.layers[l].w, grads[l].w, state.m[l].w, state.v[l].w, state,
                bc1, bc2);
    adam_update(net.layers[l].b, grads[l].b, state.m[l].b, state.v[l].b, state,
                bc1, bc2);
  }
}

CheckLossValue check_loss(double r, double q, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("check_loss: tau must be in (0,1)");
  const double x = r - q;
  if (x > 0.0) return {x * tau, -tau};
  return {x * (tau - 1.0), 1.0 - tau};
}

bool all_finite(const Mlp& net) {
  for (const auto& p : net.layers) {
    for (double w : p.w)
      if (!std::isfinite(w)) return false;
    for (double b : p.b)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

}  // namespace l2nas
