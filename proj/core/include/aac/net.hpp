#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "aac/rng.hpp"

namespace aac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Activations recorded by a forward pass; required for backward().
// acts[0] is the input batch, acts[l] the post-activation output of layer l-1.
struct NetCache {
  std::vector<Matrix> acts;
};

struct LayerGrads {
  Matrix w;  // same shape as the layer weight (out x in)
  Vector b;
};

using NetGrads = std::vector<LayerGrads>;

// Fully connected net with ReLU hidden activations and a linear output
// layer. Batches are row-major: one sample per row.
class DenseNet {
 public:
  DenseNet() = default;
  // sizes = {in, hidden..., out}; at least one hidden layer.
  DenseNet(std::vector<int> sizes, Rng& rng);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  int num_layers() const { return static_cast<int>(w_.size()); }

  std::vector<Matrix>& weights() { return w_; }
  std::vector<Vector>& biases() { return b_; }
  const std::vector<Matrix>& weights() const { return w_; }
  const std::vector<Vector>& biases() const { return b_; }

  // Batched forward pass. Records activations into `cache` when given.
  Matrix forward(const Matrix& x, NetCache* cache = nullptr) const;
  Vector forward(const Vector& x) const;

  // Reverse pass from dL/d(output). Accumulates parameter gradients
  // (summed over batch rows) into `grads` when given; returns dL/d(input).
  Matrix backward(const NetCache& cache, const Matrix& output_grad,
                  NetGrads* grads) const;

  NetGrads zero_grads() const;
  long param_count() const;

  bool same_shape(const DenseNet& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<Matrix> w_;  // w_[l]: (sizes_[l+1] x sizes_[l])
  std::vector<Vector> b_;
};

// Adam with bias correction; accumulators mirror the net's parameter shapes.
struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;

  static AdamState for_net(const DenseNet& net, double lr);
};

// One bias-corrected Adam step. Throws NumericError on non-finite gradients.
void adam_step(DenseNet& net, const NetGrads& grads, AdamState& state);

// Scalar variant, used for the entropy temperature.
struct ScalarAdam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  double m = 0.0;
  double v = 0.0;
};

double adam_step(double param, double grad, ScalarAdam& state);

}  // namespace aac
