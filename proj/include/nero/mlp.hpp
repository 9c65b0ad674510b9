#pragma once

// Small feed-forward heads with explicit reverse-mode gradients, plus the
// batch loss functions. Batches are column-major: one column per sample.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "nero/common.hpp"

namespace nero {

enum class OutputActivation { identity, sigmoid };

template <typename S>
struct MlpHead {
  std::vector<int> widths;  // [input, hidden..., output]
  OutputActivation out_act = OutputActivation::identity;
  std::vector<MatX<S>> W;
  std::vector<VecX<S>> b;

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  int num_layers() const { return static_cast<int>(widths.size()) - 1; }

  // He-uniform weights for the ReLU stack, zero biases.
  void init(std::uint64_t seed) {
    check(widths.size() >= 2, "MlpHead: need at least input and output widths");
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
      check(widths[i] > 0 && widths[i + 1] > 0, "MlpHead: widths must be positive");
    const int layers = num_layers();
    W.resize(layers);
    b.resize(layers);
    for (int i = 0; i < layers; ++i) {
      const int fan_in = widths[i];
      const double limit = std::sqrt(6.0 / fan_in);
      std::mt19937_64 rng(derive_seed(seed, 0x6d6c70ull, i));
      std::uniform_real_distribution<double> dist(-limit, limit);
      W[i].resize(widths[i + 1], widths[i]);
      for (Eigen::Index c = 0; c < W[i].cols(); ++c)
        for (Eigen::Index r = 0; r < W[i].rows(); ++r)
          W[i](r, c) = static_cast<S>(dist(rng));
      b[i] = VecX<S>::Zero(widths[i + 1]);
    }
  }

  struct Cache {
    std::vector<MatX<S>> act;  // act[0] = input, act[i] = ReLU output of layer i-1
    std::vector<MatX<S>> pre;  // pre-activations per layer
    MatX<S> out;
  };

  struct Grads {
    std::vector<MatX<S>> dW;
    std::vector<VecX<S>> db;

    void resize_like(const MlpHead& h) {
      dW.resize(h.W.size());
      db.resize(h.b.size());
      for (std::size_t i = 0; i < h.W.size(); ++i) {
        dW[i] = MatX<S>::Zero(h.W[i].rows(), h.W[i].cols());
        db[i] = VecX<S>::Zero(h.b[i].size());
      }
    }
  };

  MatX<S> forward(const MatX<S>& x, Cache* cache = nullptr) const {
    check(x.rows() == input_dim(), "MlpHead: input dimension mismatch");
    const int layers = num_layers();
    if (cache) {
      cache->act.assign(1, x);
      cache->pre.clear();
    }
    MatX<S> a = x;
    for (int i = 0; i < layers; ++i) {
      MatX<S> z = (W[i] * a).colwise() + b[i];
      if (cache) cache->pre.push_back(z);
      if (i + 1 < layers) {
        a = z.cwiseMax(S(0));
        if (cache) cache->act.push_back(a);
      } else {
        a = apply_output(z);
      }
    }
    if (cache) cache->out = a;
    return a;
  }

  // Returns dL/dinput; parameter gradients accumulate into g.
  MatX<S> backward(const Cache& cache, const MatX<S>& dout, Grads& g) const {
    const int layers = num_layers();
    check(static_cast<int>(cache.pre.size()) == layers,
          "MlpHead::backward: stale cache");
    MatX<S> dz;
    switch (out_act) {
      case OutputActivation::identity:
        dz = dout;
        break;
      case OutputActivation::sigmoid:
        dz = dout.cwiseProduct(
            cache.out.cwiseProduct(MatX<S>::Ones(cache.out.rows(), cache.out.cols()) - cache.out));
        break;
    }
    for (int i = layers - 1; i >= 0; --i) {
      g.dW[i] += dz * cache.act[i].transpose();
      g.db[i] += dz.rowwise().sum();
      MatX<S> da = W[i].transpose() * dz;
      if (i == 0) return da;
      dz = da.cwiseProduct(
          (cache.pre[i - 1].array() > S(0)).template cast<S>().matrix());
    }
    return MatX<S>();  // unreachable
  }

 private:
  MatX<S> apply_output(const MatX<S>& z) const {
    switch (out_act) {
      case OutputActivation::sigmoid:
        return ((-z.array()).exp() + S(1)).inverse().matrix();
      case OutputActivation::identity:
      default:
        return z;
    }
  }
};

// ---------------------------------------------------------------------------
// Losses. Each returns the batch-averaged value; the *_grad variants also
// write dL/dprediction for the backward pass.

template <typename S>
S loss_height(const MatX<S>& z, const MatX<S>& z_gt) {
  check(z.rows() == 1 && z_gt.rows() == 1 && z.cols() == z_gt.cols(),
        "loss_height: expects 1 x B predictions and targets");
  return (z - z_gt).array().square().sum() / static_cast<S>(z.cols());
}

template <typename S>
S loss_height_grad(const MatX<S>& z, const MatX<S>& z_gt, MatX<S>& dz) {
  const S inv_b = S(1) / static_cast<S>(z.cols());
  dz = S(2) * inv_b * (z - z_gt);
  return loss_height(z, z_gt);
}

// Squared L2 over the 3 channels, averaged over the batch.
template <typename S>
S loss_color(const MatX<S>& c, const MatX<S>& c_gt) {
  check(c.rows() == 3 && c_gt.rows() == 3 && c.cols() == c_gt.cols(),
        "loss_color: expects 3 x B predictions and targets");
  return (c - c_gt).array().square().sum() / static_cast<S>(c.cols());
}

template <typename S>
S loss_color_grad(const MatX<S>& c, const MatX<S>& c_gt, MatX<S>& dc) {
  const S inv_b = S(1) / static_cast<S>(c.cols());
  dc = S(2) * inv_b * (c - c_gt);
  return loss_color(c, c_gt);
}

template <typename S>
MatX<S> softmax(const MatX<S>& logits) {
  MatX<S> p = logits;
  for (Eigen::Index b = 0; b < p.cols(); ++b) {
    p.col(b).array() -= p.col(b).maxCoeff();
    p.col(b) = p.col(b).array().exp();
    p.col(b) /= p.col(b).sum();
  }
  return p;
}

// Softmax cross-entropy against integer class targets. Callers filter out
// ignore-labelled samples before building the batch.
template <typename S>
S loss_semantic(const MatX<S>& logits, const std::vector<int>& class_gt) {
  check(static_cast<Eigen::Index>(class_gt.size()) == logits.cols(),
        "loss_semantic: target count must match batch");
  const MatX<S> p = softmax(logits);
  S total = S(0);
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const int c = class_gt[b];
    check(c >= 0 && c < logits.rows(), "loss_semantic: class id out of range");
    total -= std::log(std::max(p(c, b), std::numeric_limits<S>::min()));
  }
  return total / static_cast<S>(logits.cols());
}

template <typename S>
S loss_semantic_grad(const MatX<S>& logits, const std::vector<int>& class_gt,
                     MatX<S>& dlogits) {
  const MatX<S> p = softmax(logits);
  const S inv_b = S(1) / static_cast<S>(logits.cols());
  dlogits = p * inv_b;
  S total = S(0);
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const int c = class_gt[b];
    total -= std::log(std::max(p(c, b), std::numeric_limits<S>::min()));
    dlogits(c, b) -= inv_b;
  }
  return total * inv_b;
}

}  // namespace nero
