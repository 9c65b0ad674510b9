#pragma once

// The road-surface field: (x, y) -> (height, color, semantic logits) through
// a per-head encoder and a small MLP. Heads may share one encoder instance
// or own separate ones (the default).

#include <cstdint>
#include <string>
#include <vector>

#include "nero/adam.hpp"
#include "nero/common.hpp"
#include "nero/encoding.hpp"
#include "nero/geometry.hpp"
#include "nero/mlp.hpp"

namespace nero {

enum class EncoderKind { pe, hash };
enum class Head { height = 0, color = 1, semantic = 2 };

inline const char* head_name(Head h) {
  switch (h) {
    case Head::height: return "height";
    case Head::color: return "color";
    default: return "semantic";
  }
}

struct BranchConfig {
  EncoderKind encoder = EncoderKind::hash;
  std::vector<int> hidden{64, 64};
};

struct ModelConfig {
  PeConfig pe;
  HashGridConfig grid;
  BranchConfig height{EncoderKind::hash, {64, 64, 64, 64}};
  BranchConfig color{EncoderKind::hash, {64, 64}};
  BranchConfig semantic{EncoderKind::hash, {64, 64}};
  bool share_encoder = false;  // one encoder instance feeding all heads
  SemanticClassSet classes;
  std::uint64_t seed = 1;

  const BranchConfig& branch(Head h) const {
    switch (h) {
      case Head::height: return height;
      case Head::color: return color;
      default: return semantic;
    }
  }

  void validate() const {
    pe.validate();
    grid.validate();
    check(classes.size() >= 2, "ModelConfig: need at least two classes");
    if (share_encoder)
      check(height.encoder == color.encoder && color.encoder == semantic.encoder,
            "ModelConfig: share_encoder requires one encoder kind");
  }
};

template <typename S>
struct Encoder {
  EncoderKind kind = EncoderKind::pe;
  PeConfig pe;
  HashGrid<S> grid;

  int output_dim() const {
    return kind == EncoderKind::pe ? pe.output_dim() : grid.cfg.output_dim();
  }
  bool trainable() const { return kind == EncoderKind::hash; }

  MatX<S> forward(const Mat2X<S>& xn,
                  typename HashGrid<S>::Record* rec = nullptr) const {
    if (kind == EncoderKind::pe) return encode_pe_batch(xn, pe);
    return grid.forward(xn, rec);
  }
};

template <typename S>
struct FieldModel {
  ModelConfig cfg;
  SceneBounds bounds;  // world extent the field was trained on
  std::vector<Encoder<S>> encoders;  // size 1 (shared) or 3
  MlpHead<S> heads[3];

  void build() {
    cfg.validate();
    encoders.clear();
    const int n_enc = cfg.share_encoder ? 1 : 3;
    for (int i = 0; i < n_enc; ++i) {
      const Head h = static_cast<Head>(i);
      Encoder<S> enc;
      enc.kind = cfg.branch(h).encoder;
      enc.pe = cfg.pe;
      if (enc.kind == EncoderKind::hash) {
        enc.grid.cfg = cfg.grid;
        enc.grid.init(derive_seed(cfg.seed, 0x656e63ull, i));
      }
      encoders.push_back(std::move(enc));
    }
    const int out_dims[3] = {1, 3, cfg.classes.size()};
    const OutputActivation acts[3] = {OutputActivation::identity,
                                      OutputActivation::sigmoid,
                                      OutputActivation::identity};
    for (int i = 0; i < 3; ++i) {
      const Head h = static_cast<Head>(i);
      MlpHead<S>& head = heads[i];
      head.widths.clear();
      head.widths.push_back(encoder(h).output_dim());
      for (int w : cfg.branch(h).hidden) head.widths.push_back(w);
      head.widths.push_back(out_dims[i]);
      head.out_act = acts[i];
      head.init(derive_seed(cfg.seed, 0x68656164ull, i));
    }
  }

  int encoder_index(Head h) const {
    return cfg.share_encoder ? 0 : static_cast<int>(h);
  }
  Encoder<S>& encoder(Head h) { return encoders[encoder_index(h)]; }
  const Encoder<S>& encoder(Head h) const { return encoders[encoder_index(h)]; }
  MlpHead<S>& head(Head h) { return heads[static_cast<int>(h)]; }
  const MlpHead<S>& head(Head h) const { return heads[static_cast<int>(h)]; }

  // --- batched inference over normalized coordinates ---

  MatX<S> forward_batch(Head h, const Mat2X<S>& xn) const {
    return head(h).forward(encoder(h).forward(xn));
  }

  /// Heights (1 x B) for raw world coordinates.
  MatX<S> height_at(const Eigen::Matrix2Xd& raw,
                    std::uint64_t* clamp_count = nullptr) const {
    return forward_batch(Head::height,
                         normalize_batch<S>(raw, bounds, clamp_count));
  }

  // --- scalar convenience, one coordinate at a time ---

  double forward_height(const NormCoord2& x) const {
    return static_cast<double>(forward_batch(Head::height, to_batch(x))(0, 0));
  }

  Eigen::Vector3d forward_color(const NormCoord2& x) const {
    return forward_batch(Head::color, to_batch(x)).col(0).template cast<double>();
  }

  Eigen::VectorXd forward_semantic(const NormCoord2& x) const {
    return forward_batch(Head::semantic, to_batch(x)).col(0).template cast<double>();
  }

  int predict_class(const NormCoord2& x) const {
    Eigen::Index best;
    forward_semantic(x).maxCoeff(&best);
    return static_cast<int>(best);
  }

 private:
  static Mat2X<S> to_batch(const NormCoord2& x) {
    Mat2X<S> m(2, 1);
    m << static_cast<S>(x.x), static_cast<S>(x.y);
    return m;
  }
};

// ---------------------------------------------------------------------------
// Training-side plumbing: one branch's cached forward pass, its backward
// through head and (if trainable) hash grid, and parameter registration.

template <typename S>
struct BranchPass {
  typename HashGrid<S>::Record rec;
  typename MlpHead<S>::Cache cache;
  MatX<S> out;
};

template <typename S>
MatX<S> branch_forward(const FieldModel<S>& model, Head h, const Mat2X<S>& xn,
                       BranchPass<S>& pass) {
  const Encoder<S>& enc = model.encoder(h);
  const MatX<S> feat =
      enc.forward(xn, enc.trainable() ? &pass.rec : nullptr);
  pass.out = model.head(h).forward(feat, &pass.cache);
  return pass.out;
}

// Backpropagates dout through the head into grads, and on into the encoder
// tables when the branch's encoder is trainable.
template <typename S>
void branch_backward(FieldModel<S>& model, Head h, const BranchPass<S>& pass,
                     const MatX<S>& dout, typename MlpHead<S>::Grads& grads) {
  const MatX<S> dfeat = model.head(h).backward(pass.cache, dout, grads);
  if (model.encoder(h).trainable()) model.encoder(h).grid.backward(pass.rec, dfeat);
}

/// Pairs every head tensor with its gradient buffer for the optimizer.
template <typename S>
std::vector<ParamView<S>> head_param_views(MlpHead<S>& head,
                                           typename MlpHead<S>::Grads& grads) {
  std::vector<ParamView<S>> views;
  for (std::size_t i = 0; i < head.W.size(); ++i) {
    views.push_back({head.W[i].data(), grads.dW[i].data(),
                     static_cast<std::int64_t>(head.W[i].size())});
    views.push_back({head.b[i].data(), grads.db[i].data(),
                     static_cast<std::int64_t>(head.b[i].size())});
  }
  return views;
}

}  // namespace nero
