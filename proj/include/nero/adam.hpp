#pragma once

// Adam with bias correction. Dense tensors (MLP weights) update in full every
// step; hash tables update only the rows their backward pass touched, the
// usual sparse treatment for embedding tables. Untouched rows have zero
// gradient and zero moments, so skipping them changes nothing for rows the
// optimizer has never seen.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nero/common.hpp"
#include "nero/encoding.hpp"

namespace nero {

template <typename S>
struct AdamConfig {
  S lr = static_cast<S>(5e-4);
  S beta1 = static_cast<S>(0.9);
  S beta2 = static_cast<S>(0.999);
  S eps = static_cast<S>(1e-8);
};

// Textbook update of n parameters in place; t is the 1-based step count.
template <typename S>
void adam_step(S* p, const S* g, S* m, S* v, std::int64_t n,
               const AdamConfig<S>& cfg, std::int64_t t) {
  const S c1 = S(1) / (S(1) - std::pow(cfg.beta1, static_cast<S>(t)));
  const S c2 = S(1) / (S(1) - std::pow(cfg.beta2, static_cast<S>(t)));
  for (std::int64_t i = 0; i < n; ++i) {
    m[i] = cfg.beta1 * m[i] + (S(1) - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (S(1) - cfg.beta2) * g[i] * g[i];
    const S mhat = m[i] * c1;
    const S vhat = v[i] * c2;
    p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

/// Non-owning view of one trainable tensor and its gradient accumulator.
template <typename S>
struct ParamView {
  S* param = nullptr;
  S* grad = nullptr;
  std::int64_t size = 0;
};

template <typename S>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig<S> cfg = {}) : cfg_(cfg) {}

  // Dense tensors update in registration order; order is part of the
  // checkpoint contract.
  void register_dense(const ParamView<S>& view) {
    dense_.push_back(view);
    m_.emplace_back(VecX<S>::Zero(view.size));
    v_.emplace_back(VecX<S>::Zero(view.size));
  }

  void register_dense(std::vector<ParamView<S>> views) {
    for (const auto& v : views) register_dense(v);
  }

  void register_grid(HashGrid<S>* grid) {
    grids_.push_back(grid);
    auto& m = grid_m_.emplace_back();
    auto& v = grid_v_.emplace_back();
    for (const auto& table : grid->tables) {
      m.emplace_back(MatX<S>::Zero(table.rows(), table.cols()));
      v.emplace_back(MatX<S>::Zero(table.rows(), table.cols()));
    }
  }

  std::int64_t step_count() const { return t_; }

  // One optimizer step over everything registered. Gradients are consumed:
  // dense views are zeroed by the caller, grids zero their touched rows here.
  void step() {
    ++t_;
    for (std::size_t i = 0; i < dense_.size(); ++i) {
      adam_step(dense_[i].param, dense_[i].grad, m_[i].data(), v_[i].data(),
                dense_[i].size, cfg_, t_);
    }
    for (std::size_t gi = 0; gi < grids_.size(); ++gi) {
      HashGrid<S>& grid = *grids_[gi];
      auto& touched = grid.touched;
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      const int F = grid.cfg.feature_dim;
      for (std::uint64_t id : touched) {
        const int l = static_cast<int>(id / grid.cfg.table_size);
        const auto row = static_cast<Eigen::Index>(id % grid.cfg.table_size);
        adam_step(grid.tables[l].col(row).data(), grid.grads[l].col(row).data(),
                  grid_m_[gi][l].col(row).data(), grid_v_[gi][l].col(row).data(),
                  F, cfg_, t_);
        grid.grads[l].col(row).setZero();
      }
      touched.clear();
    }
  }

  const AdamConfig<S>& config() const { return cfg_; }

  // Moment storage in registration order, exposed for checkpointing.
  std::vector<VecX<S>>& dense_m() { return m_; }
  std::vector<VecX<S>>& dense_v() { return v_; }
  std::vector<std::vector<MatX<S>>>& grid_m() { return grid_m_; }
  std::vector<std::vector<MatX<S>>>& grid_v() { return grid_v_; }
  void set_step_count(std::int64_t t) { t_ = t; }

 private:
  AdamConfig<S> cfg_;
  std::int64_t t_ = 0;
  std::vector<ParamView<S>> dense_;
  std::vector<VecX<S>> m_, v_;
  std::vector<HashGrid<S>*> grids_;
  std::vector<std::vector<MatX<S>>> grid_m_, grid_v_;
};

}  // namespace nero
