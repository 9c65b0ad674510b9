#pragma once

// Coordinate encoders that lift normalized 2D positions into feature vectors:
//  - sinusoidal positional encoding across geometric frequencies, and
//  - a trainable multi-resolution 2D hash grid (bilinear feature tables),
//    with ablation modes (dense indexing without hashing, single level).

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nero/common.hpp"

namespace nero {

// ---------------------------------------------------------------------------
// Sinusoidal positional encoding

struct PeConfig {
  int num_frequencies = 10;  // L

  // Per input scalar: (sin, cos) at L frequencies. 2D input -> 4*L.
  int output_dim() const { return 4 * num_frequencies; }

  void validate() const {
    check(num_frequencies >= 1, "PeConfig: num_frequencies must be >= 1");
  }
};

/// Feature vector plus a tag describing which encoder produced it.
struct EncodedFeature {
  Eigen::VectorXd values;
  std::string provenance;
};

// Output layout is per-component blocks: all frequencies of x first, then y.
// Within a block: sin(2^0 pi x), cos(2^0 pi x), ..., sin(2^{L-1} pi x),
// cos(2^{L-1} pi x).
template <typename S>
MatX<S> encode_pe_batch(const Mat2X<S>& xn, const PeConfig& cfg) {
  const int L = cfg.num_frequencies;
  const Eigen::Index n = xn.cols();
  MatX<S> out(4 * L, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    for (int comp = 0; comp < 2; ++comp) {
      const S v = xn(comp, b);
      S freq = static_cast<S>(M_PI);
      for (int k = 0; k < L; ++k) {
        out(comp * 2 * L + 2 * k + 0, b) = std::sin(freq * v);
        out(comp * 2 * L + 2 * k + 1, b) = std::cos(freq * v);
        freq *= S(2);
      }
    }
  }
  return out;
}

inline EncodedFeature encode_pe(const NormCoord2& x, const PeConfig& cfg) {
  cfg.validate();
  Mat2X<double> xm(2, 1);
  xm << x.x, x.y;
  EncodedFeature f;
  f.values = encode_pe_batch<double>(xm, cfg).col(0);
  f.provenance = "pe(L=" + std::to_string(cfg.num_frequencies) + ")";
  return f;
}

/// Analytic Jacobian of encode_pe w.r.t. the input coordinate, (4L x 2).
inline Eigen::MatrixXd pe_jacobian(const NormCoord2& x, const PeConfig& cfg) {
  const int L = cfg.num_frequencies;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(4 * L, 2);
  const double comps[2] = {x.x, x.y};
  for (int comp = 0; comp < 2; ++comp) {
    double freq = M_PI;
    for (int k = 0; k < L; ++k) {
      jac(comp * 2 * L + 2 * k + 0, comp) = freq * std::cos(freq * comps[comp]);
      jac(comp * 2 * L + 2 * k + 1, comp) = -freq * std::sin(freq * comps[comp]);
      freq *= 2.0;
    }
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Multi-resolution hash grid

enum class HashingMode { hashed, dense_no_hash, single_level };

inline constexpr std::uint64_t kHashPrimeX = 1ull;
inline constexpr std::uint64_t kHashPrimeY = 2654435761ull;

struct HashGridConfig {
  int num_levels = 16;
  int base_resolution = 16;       // coarsest grid cells per axis
  double per_level_scale = 1.5;   // geometric growth factor
  std::uint32_t table_size = 1u << 19;  // entries per level (T)
  int feature_dim = 2;            // F
  HashingMode mode = HashingMode::hashed;

  int levels_used() const {
    return mode == HashingMode::single_level ? 1 : num_levels;
  }
  int output_dim() const { return levels_used() * feature_dim; }

  // Cells per axis at a level; corners run 0..resolution inclusive.
  // In single_level mode the one level sits at base_resolution.
  int resolution(int level) const {
    if (mode == HashingMode::single_level) return base_resolution;
    return static_cast<int>(
        std::floor(base_resolution * std::pow(per_level_scale, level)));
  }

  void validate() const {
    check(num_levels >= 1 && base_resolution >= 1, "HashGridConfig: counts must be positive");
    check(per_level_scale > 1.0, "HashGridConfig: per_level_scale must be > 1");
    check(table_size >= 1 && feature_dim >= 1, "HashGridConfig: table_size/feature_dim must be positive");
  }
};

// Maps a corner (ix, iy) of a level to its feature-table row. Coarse levels
// whose corner count fits in the table are indexed densely (row-major, y as
// the row); finer levels use the XOR-of-primes spatial hash modulo T.
// dense_no_hash requires every level to fit densely.
inline std::uint32_t grid_index(std::uint32_t ix, std::uint32_t iy, int level,
                                const HashGridConfig& cfg) {
  const std::uint64_t side = static_cast<std::uint64_t>(cfg.resolution(level)) + 1;
  if (side * side <= cfg.table_size) {
    return static_cast<std::uint32_t>(iy * side + ix);
  }
  check(cfg.mode != HashingMode::dense_no_hash,
        "grid_index: dense-no-hash level " + std::to_string(level) + " needs " +
            std::to_string(side * side) + " entries but table_size is " +
            std::to_string(cfg.table_size));
  const std::uint64_t h = (static_cast<std::uint64_t>(ix) * kHashPrimeX) ^
                          (static_cast<std::uint64_t>(iy) * kHashPrimeY);
  return static_cast<std::uint32_t>(h % cfg.table_size);
}

template <typename S>
struct HashGrid {
  HashGridConfig cfg;
  // Per level: F x T feature table and a gradient accumulator of equal shape.
  std::vector<MatX<S>> tables;
  std::vector<MatX<S>> grads;
  // Rows written by backward since the last zero_grad, encoded level*T + row.
  // May contain duplicates; consumers sort/unique.
  std::vector<std::uint64_t> touched;

  // Bilinear interpolation footprint of one query at one level.
  struct CornerSample {
    std::array<std::uint32_t, 4> index;
    std::array<S, 4> weight;
  };
  // Forward record for the backward pass: levels-major, batch-minor.
  struct Record {
    int levels = 0;
    Eigen::Index batch = 0;
    std::vector<CornerSample> corners;  // size levels * batch
  };

  void init(std::uint64_t seed) {
    cfg.validate();
    if (cfg.mode == HashingMode::dense_no_hash) {
      // Fail fast on impossible configs instead of mid-training.
      for (int l = 0; l < cfg.levels_used(); ++l) (void)grid_index(0, 0, l, cfg);
    }
    tables.assign(cfg.levels_used(), MatX<S>(cfg.feature_dim, cfg.table_size));
    grads.assign(cfg.levels_used(),
                 MatX<S>::Zero(cfg.feature_dim, cfg.table_size));
    touched.clear();
    for (int l = 0; l < cfg.levels_used(); ++l) {
      std::mt19937_64 rng(derive_seed(seed, 0x68617368ull, l));
      std::uniform_real_distribution<double> dist(-1e-4, 1e-4);
      for (Eigen::Index c = 0; c < tables[l].cols(); ++c)
        for (Eigen::Index r = 0; r < tables[l].rows(); ++r)
          tables[l](r, c) = static_cast<S>(dist(rng));
    }
  }

  bool initialized() const { return !tables.empty(); }

  // Locates the enclosing cell of xn at a level and returns the four corner
  // rows with their bilinear weights (sum exactly 1 by construction).
  CornerSample corner_sample(S x, S y, int level) const {
    const int res = cfg.resolution(level);
    auto cell = [&](S v, int& i0, S& frac) {
      S u = (v + S(1)) * S(0.5) * static_cast<S>(res);
      u = std::min(std::max(u, S(0)), static_cast<S>(res));
      i0 = std::min(static_cast<int>(std::floor(u)), res - 1);
      frac = u - static_cast<S>(i0);
    };
    int ix0, iy0;
    S fx, fy;
    cell(x, ix0, fx);
    cell(y, iy0, fy);
    CornerSample s;
    s.index = {grid_index(ix0, iy0, level, cfg),
               grid_index(ix0 + 1, iy0, level, cfg),
               grid_index(ix0, iy0 + 1, level, cfg),
               grid_index(ix0 + 1, iy0 + 1, level, cfg)};
    // Last weight is the exact complement of the left-to-right partial sum,
    // so w0 + w1 + w2 + w3 == 1 holds in floating point, not just algebra.
    s.weight[0] = (S(1) - fx) * (S(1) - fy);
    s.weight[1] = fx * (S(1) - fy);
    s.weight[2] = (S(1) - fx) * fy;
    s.weight[3] = S(1) - (s.weight[0] + s.weight[1] + s.weight[2]);
    return s;
  }

  // Per level: fetch the 4 corner features of the enclosing cell, bilinearly
  // interpolate, concatenate across levels. Records the footprint when rec
  // is non-null so backward can scatter gradients to the same corners.
  MatX<S> forward(const Mat2X<S>& xn, Record* rec = nullptr) const {
    check(initialized(), "HashGrid: init() before forward()");
    const int levels = cfg.levels_used();
    const int F = cfg.feature_dim;
    const Eigen::Index n = xn.cols();
    MatX<S> out(levels * F, n);
    if (rec) {
      rec->levels = levels;
      rec->batch = n;
      rec->corners.resize(static_cast<std::size_t>(levels) * n);
    }
    for (int l = 0; l < levels; ++l) {
      const MatX<S>& table = tables[l];
      for (Eigen::Index b = 0; b < n; ++b) {
        const CornerSample s = corner_sample(xn(0, b), xn(1, b), l);
        out.block(l * F, b, F, 1) = s.weight[0] * table.col(s.index[0]) +
                                    s.weight[1] * table.col(s.index[1]) +
                                    s.weight[2] * table.col(s.index[2]) +
                                    s.weight[3] * table.col(s.index[3]);
        if (rec) rec->corners[static_cast<std::size_t>(l) * n + b] = s;
      }
    }
    return out;
  }

  // Scatter-accumulates upstream feature gradients into the corner rows
  // recorded by the matching forward pass.
  void backward(const Record& rec, const MatX<S>& dfeat) {
    const int F = cfg.feature_dim;
    check(rec.levels == cfg.levels_used() && dfeat.rows() == rec.levels * F &&
              dfeat.cols() == rec.batch,
          "HashGrid::backward: record/gradient shape mismatch");
    for (int l = 0; l < rec.levels; ++l) {
      MatX<S>& g = grads[l];
      for (Eigen::Index b = 0; b < rec.batch; ++b) {
        const CornerSample& s =
            rec.corners[static_cast<std::size_t>(l) * rec.batch + b];
        const auto df = dfeat.block(l * F, b, F, 1);
        for (int k = 0; k < 4; ++k) {
          g.col(s.index[k]) += s.weight[k] * df;
          touched.push_back(static_cast<std::uint64_t>(l) * cfg.table_size +
                            s.index[k]);
        }
      }
    }
  }

  // Clears exactly the accumulator rows written since the previous call.
  void zero_grad() {
    const int F = cfg.feature_dim;
    for (std::uint64_t id : touched) {
      const int l = static_cast<int>(id / cfg.table_size);
      const auto row = static_cast<Eigen::Index>(id % cfg.table_size);
      grads[l].col(row).setZero();
    }
    touched.clear();
    (void)F;
  }

  std::int64_t parameter_count() const {
    return static_cast<std::int64_t>(cfg.levels_used()) * cfg.feature_dim *
           cfg.table_size;
  }
};

template <typename S>
EncodedFeature encode_hash(const NormCoord2& x, const HashGrid<S>& grid) {
  Mat2X<S> xm(2, 1);
  xm << static_cast<S>(x.x), static_cast<S>(x.y);
  EncodedFeature f;
  f.values = grid.forward(xm).template cast<double>().col(0);
  f.provenance = "hash(levels=" + std::to_string(grid.cfg.levels_used()) +
                 ",F=" + std::to_string(grid.cfg.feature_dim) + ")";
  return f;
}

}  // namespace nero
