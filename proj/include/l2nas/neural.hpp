#ifndef L2NAS_NEURAL_HPP
#define L2NAS_NEURAL_HPP

#include <vector>

#include "l2nas/matrix.hpp"
#include "l2nas/rng.hpp"

namespace l2nas {

enum class OutputActivation { kSigmoid, kIdentity };

// One dense layer's parameters; also reused as the gradient container.
struct LayerParams {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out

  LayerParams() = default;
  LayerParams(int in_dim, int out_dim)
      : in(in_dim),
        out(out_dim),
        w(static_cast<std::size_t>(in_dim) * out_dim, 0.0),
        b(static_cast<std::size_t>(out_dim), 0.0) {}
};

// Fixed topology: input, three equal ReLU hidden layers, one output layer.
struct Mlp {
  std::vector<int> dims;  // [d_in, h, h, h, d_out]
  OutputActivation out_act = OutputActivation::kIdentity;
  std::vector<LayerParams> layers;

  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }
};

using MlpGrads = std::vector<LayerParams>;

// Per-layer pre-activations and activations for one forward batch.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
};

struct BackwardResult {
  MlpGrads grads;
  Matrix dinput;
};

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
  long long step = 0;
  std::vector<LayerParams> m;
  std::vector<LayerParams> v;

  AdamState() = default;
  AdamState(const Mlp& net, double learning_rate);
};

struct CheckLossValue {
  double loss = 0.0;
  double dloss_dq = 0.0;
};

// Weights ~ Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero.
Mlp mlp_init(const std::vector<int>& dims, OutputActivation out_act, Rng& rng);

// x is a batch (rows) of input vectors (cols). Returns outputs plus the cache
// needed by backward.
Matrix forward(const Mlp& net, const Matrix& x, ForwardCache& cache);
Matrix forward(const Mlp& net, const Matrix& x);

// dloss_dy has the output batch's shape. Returns exact parameter gradients and
// the gradient with respect to the input batch. ReLU subgradient at 0 is 0.
BackwardResult backward(const Mlp& net, const ForwardCache& cache,
                        const Matrix& dloss_dy);

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state);

// Pinball loss rho_tau(r - q) and its derivative in q. The subgradient at
// r == q is (1 - tau).
CheckLossValue check_loss(double r, double q, double tau);

bool all_finite(const Mlp& net);

}  // namespace l2nas

#endif  // L2NAS_NEURAL_HPP
