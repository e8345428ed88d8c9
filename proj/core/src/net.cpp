#include "aac/net.hpp"

#include <cmath>

namespace aac {

DenseNet::DenseNet(std::vector<int> sizes, Rng& rng) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 3) {
    throw std::invalid_argument("DenseNet needs at least one hidden layer");
  }
  for (int s : sizes_) {
    if (s <= 0) throw std::invalid_argument("DenseNet layer sizes must be positive");
  }
  const int layers = static_cast<int>(sizes_.size()) - 1;
  w_.resize(layers);
  b_.resize(layers);
  for (int l = 0; l < layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    w_[l].resize(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) w_[l](i, j) = rng.uniform(-bound, bound);
    b_[l].resize(out);
    for (int i = 0; i < out; ++i) b_[l](i) = rng.uniform(-bound, bound);
  }
}

Matrix DenseNet::forward(const Matrix& x, NetCache* cache) const {
  if (x.cols() != input_size()) {
    throw std::invalid_argument("DenseNet::forward: input width " +
                                std::to_string(x.cols()) + " != " +
                                std::to_string(input_size()));
  }
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(x);
  }
  Matrix h = x;
  const int layers = num_layers();
  for (int l = 0; l < layers; ++l) {
    Matrix z = (h * w_[l].transpose()).rowwise() + b_[l].transpose();
    if (l + 1 < layers) z = z.cwiseMax(0.0);  // ReLU on hidden layers
    h = std::move(z);
    if (cache) cache->acts.push_back(h);
  }
  if (!h.allFinite()) throw NumericError("DenseNet::forward produced non-finite output");
  return h;
}

Vector DenseNet::forward(const Vector& x) const {
  Matrix row = x.transpose();
  return forward(row).row(0).transpose();
}

Matrix DenseNet::backward(const NetCache& cache, const Matrix& output_grad,
                          NetGrads* grads) const {
  const int layers = num_layers();
  if (static_cast<int>(cache.acts.size()) != layers + 1) {
    throw std::logic_error("DenseNet::backward: no recorded forward pass");
  }
  if (output_grad.rows() != cache.acts[0].rows() ||
      output_grad.cols() != output_size()) {
    throw std::invalid_argument("DenseNet::backward: gradient shape mismatch");
  }
  if (grads && static_cast<int>(grads->size()) != layers) {
    throw std::invalid_argument("DenseNet::backward: grads shape mismatch");
  }
  Matrix delta = output_grad;
  for (int l = layers - 1; l >= 0; --l) {
    if (l + 1 < layers) {
      // Hidden post-activations are ReLU outputs: positive iff active.
      delta = delta.cwiseProduct(
          (cache.acts[l + 1].array() > 0.0).cast<double>().matrix());
    }
    if (grads) {
      (*grads)[l].w.noalias() += delta.transpose() * cache.acts[l];
      (*grads)[l].b.noalias() += delta.colwise().sum().transpose();
    }
    if (l > 0) {
      delta = delta * w_[l];
    } else {
      delta = delta * w_[0];
      return delta;  // dL/dx
    }
  }
  return delta;
}

NetGrads DenseNet::zero_grads() const {
  NetGrads g(num_layers());
  for (int l = 0; l < num_layers(); ++l) {
    g[l].w = Matrix::Zero(w_[l].rows(), w_[l].cols());
    g[l].b = Vector::Zero(b_[l].size());
  }
  return g;
}

long DenseNet::param_count() const {
  long n = 0;
  for (int l = 0; l < num_layers(); ++l) n += w_[l].size() + b_[l].size();
  return n;
}

AdamState AdamState::for_net(const DenseNet& net, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  AdamState s;
  s.lr = lr;
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto& w = net.weights()[l];
    s.mw.push_back(Matrix::Zero(w.rows(), w.cols()));
    s.vw.push_back(Matrix::Zero(w.rows(), w.cols()));
    s.mb.push_back(Vector::Zero(net.biases()[l].size()));
    s.vb.push_back(Vector::Zero(net.biases()[l].size()));
  }
  return s;
}

namespace {

template <typename T>
void adam_apply(T& param, const T& grad, T& m, T& v, const AdamState& s,
                double corr1, double corr2) {
  m = s.beta1 * m + (1.0 - s.beta1) * grad;
  v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  param.array() -= s.lr * (m.array() / corr1) /
                   ((v.array() / corr2).sqrt() + s.eps);
}

}  // namespace

void adam_step(DenseNet& net, const NetGrads& grads, AdamState& state) {
  if (static_cast<int>(grads.size()) != net.num_layers()) {
    throw std::invalid_argument("adam_step: gradient/parameter layer mismatch");
  }
  for (const auto& g : grads) {
    if (!g.w.allFinite() || !g.b.allFinite()) {
      throw NumericError("adam_step: non-finite gradient");
    }
  }
  state.step += 1;
  const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (int l = 0; l < net.num_layers(); ++l) {
    adam_apply(net.weights()[l], grads[l].w, state.mw[l], state.vw[l], state,
               corr1, corr2);
    adam_apply(net.biases()[l], grads[l].b, state.mb[l], state.vb[l], state,
               corr1, corr2);
  }
}

double adam_step(double param, double grad, ScalarAdam& state) {
  if (!std::isfinite(grad)) throw NumericError("adam_step: non-finite gradient");
  state.step += 1;
  const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad;
  return param - state.lr * (state.m / corr1) / (std::sqrt(state.v / corr2) + state.eps);
}

}  // namespace aac
