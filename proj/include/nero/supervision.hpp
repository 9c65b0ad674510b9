#pragma once

// Ground-truth plumbing: pseudo point clouds from vehicle poses, ingestion
// of LiDAR/SfM-style clouds, the per-frame color/semantic correspondence
// stream (sample -> lift -> project -> fetch), label sparsification and
// label noise injection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "nero/geometry.hpp"
#include "nero/model.hpp"

namespace nero {

enum class HeightSource { pose, lidar, sfm_dense, sfm_sparse, synthetic };

inline const char* height_source_name(HeightSource s) {
  switch (s) {
    case HeightSource::pose: return "pose";
    case HeightSource::lidar: return "lidar";
    case HeightSource::sfm_dense: return "sfm_dense";
    case HeightSource::sfm_sparse: return "sfm_sparse";
    default: return "synthetic";
  }
}

struct HeightSample {
  Coord2 p;       // world (x, y), meters
  double z = 0.0; // supervised height, meters
  HeightSource source = HeightSource::synthetic;
};

struct AppearanceSample {
  Coord2 p;
  double z = 0.0;  // lifted height used for the projection
  Eigen::Vector3f c_gt = Eigen::Vector3f::Zero();
  std::uint8_t s_gt = kIgnoreLabel;
  int frame_id = 0;
  double depth = 0.0;
};

// ---------------------------------------------------------------------------
// Height ground truth

struct PosePatchConfig {
  double length = 20.0;        // meters along the pose heading
  double width = 10.0;         // meters across
  double grid_step = 0.1;      // meters
  double camera_height = 1.65; // mount height above the ground plane
  bool deduplicate = false;
};

// The ground near each pose is assumed locally flat: a regular grid around
// the pose, oriented by its yaw, all at camera z minus the mount height.
inline std::vector<HeightSample> pose_pseudo_points(
    const std::vector<CameraFrame>& poses, const PosePatchConfig& cfg) {
  check(cfg.length > 0 && cfg.width > 0 && cfg.grid_step > 0,
        "pose_pseudo_points: dimensions must be positive");
  std::vector<HeightSample> out;
  const int nx = static_cast<int>(std::floor(cfg.length / cfg.grid_step + 1e-9));
  const int ny = static_cast<int>(std::floor(cfg.width / cfg.grid_step + 1e-9));
  for (const CameraFrame& pose : poses) {
    const Eigen::Vector3d cam = pose.camera_position();
    const double yaw = pose.yaw();
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double z = cam.z() - cfg.camera_height;
    for (int i = 0; i <= nx; ++i) {
      const double dx = -cfg.length / 2 + i * cfg.grid_step;
      for (int j = 0; j <= ny; ++j) {
        const double dy = -cfg.width / 2 + j * cfg.grid_step;
        out.push_back({Coord2(cam.x() + c * dx - s * dy,
                              cam.y() + s * dx + c * dy),
                       z, HeightSource::pose});
      }
    }
  }
  if (cfg.deduplicate) {
    std::set<std::tuple<double, double, double>> seen;
    std::vector<HeightSample> unique;
    unique.reserve(out.size());
    for (const auto& h : out)
      if (seen.insert({h.p.x(), h.p.y(), h.z}).second) unique.push_back(h);
    out.swap(unique);
  }
  return out;
}

inline std::vector<HeightSample> ingest_point_cloud(
    const std::vector<Eigen::Vector3d>& points, HeightSource tag) {
  std::vector<HeightSample> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({Coord2(p.x(), p.y()), p.z(), tag});
  return out;
}

// Optional ground filter for real clouds: keep points whose z falls inside
// the [lo_pct, hi_pct] percentile band.
inline std::vector<HeightSample> filter_height_percentile(
    std::vector<HeightSample> samples, double lo_pct, double hi_pct) {
  if (samples.empty()) return samples;
  std::vector<double> zs;
  zs.reserve(samples.size());
  for (const auto& s : samples) zs.push_back(s.z);
  std::sort(zs.begin(), zs.end());
  auto pct = [&](double p) {
    const double idx = p * (zs.size() - 1);
    return zs[static_cast<std::size_t>(idx)];
  };
  const double lo = pct(lo_pct), hi = pct(hi_pct);
  std::vector<HeightSample> out;
  for (const auto& s : samples)
    if (s.z >= lo && s.z <= hi) out.push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// Appearance stream (stage 2 supervision)

struct AppearanceSamplerConfig {
  int samples_per_frame = 8192;  // drawn per frame per epoch; in-view subset kept
  double patch_length = 20.0;
  double patch_width = 10.0;
  bool drop_ignore = false;  // drop samples whose label is ignore
  std::uint64_t seed = 1;
};

// Per frame: draw 2D world coordinates around the pose, lift them with the
// frozen height field, project into the frame, and fetch ground-truth color
// (bilinear) and label (nearest). Samples landing out of view are dropped;
// frames with labels withheld yield ignore labels.
template <typename S>
class AppearanceStream {
 public:
  AppearanceStream(const std::vector<CameraFrame>& frames,
                   const FieldModel<S>& frozen_height,
                   AppearanceSamplerConfig cfg)
      : frames_(&frames), model_(&frozen_height), cfg_(cfg) {}

  int num_frames() const { return static_cast<int>(frames_->size()); }

  std::vector<AppearanceSample> frame_batch(int frame_index, int epoch) const {
    const CameraFrame& frame = (*frames_)[frame_index];
    std::mt19937_64 rng(derive_seed(cfg_.seed, 0x61707065ull,
                                    static_cast<std::uint64_t>(frame_index) *
                                            1000003ull +
                                        epoch));
    std::uniform_real_distribution<double> ux(-cfg_.patch_length / 2,
                                              cfg_.patch_length / 2);
    std::uniform_real_distribution<double> uy(-cfg_.patch_width / 2,
                                              cfg_.patch_width / 2);
    const Eigen::Vector3d cam = frame.camera_position();
    const double yaw = frame.yaw();
    const double c = std::cos(yaw), s = std::sin(yaw);

    Eigen::Matrix2Xd raw(2, cfg_.samples_per_frame);
    for (int i = 0; i < cfg_.samples_per_frame; ++i) {
      const double dx = ux(rng), dy = uy(rng);
      raw(0, i) = cam.x() + c * dx - s * dy;
      raw(1, i) = cam.y() + s * dx + c * dy;
    }
    const MatX<S> z = model_->height_at(raw);

    std::vector<AppearanceSample> batch;
    batch.reserve(cfg_.samples_per_frame / 2);
    for (int i = 0; i < cfg_.samples_per_frame; ++i) {
      const Eigen::Vector3d w(raw(0, i), raw(1, i),
                              static_cast<double>(z(0, i)));
      const Projection proj = project(w, frame);
      if (!proj.in_view()) continue;
      AppearanceSample sample;
      sample.p = raw.col(i);
      sample.z = w.z();
      sample.c_gt = sample_color_bilinear(frame.image, proj.pixel.u, proj.pixel.v);
      sample.s_gt = frame.has_labels
                        ? sample_label_nearest(frame.labels, proj.pixel.u,
                                               proj.pixel.v)
                        : kIgnoreLabel;
      sample.frame_id = frame.id;
      sample.depth = proj.pixel.depth;
      if (cfg_.drop_ignore && sample.s_gt == kIgnoreLabel) continue;
      batch.push_back(sample);
    }
    if (batch.empty())
      std::cerr << "warning: frame " << frame.id
                << " produced no in-view appearance samples, skipping\n";
    return batch;
  }

 private:
  const std::vector<CameraFrame>* frames_;
  const FieldModel<S>* model_;
  AppearanceSamplerConfig cfg_;
};

// ---------------------------------------------------------------------------
// Label degradation experiments

// Keeps labels on ceil(keep_fraction * N) frames (seeded choice); the rest
// still supervise color but their semantics read as ignore.
inline void sparsify_labels(std::vector<CameraFrame>& frames,
                            double keep_fraction, std::uint64_t seed) {
  check(keep_fraction >= 0.0 && keep_fraction <= 1.0,
        "sparsify_labels: fraction must lie in [0,1]");
  const int n = static_cast<int>(frames.size());
  // Epsilon guards the exact-product case (e.g. 0.1 * 100) against FP excess.
  const int keep = static_cast<int>(std::ceil(keep_fraction * n - 1e-9));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(derive_seed(seed, 0x73706172ull));
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = keep; i < n; ++i) frames[order[i]].has_labels = false;
}

struct NoiseSpec {
  double ratio = 0.0;  // per-pixel flip probability
  std::uint64_t seed = 1;
  int num_classes = 3;
};

// Independent per-pixel flips: each selected pixel is reassigned a uniformly
// random class different from its original value (never ignore).
inline void inject_label_noise(ImageU8& labels, const NoiseSpec& spec) {
  check(spec.ratio >= 0.0 && spec.ratio <= 1.0, "inject_label_noise: ratio in [0,1]");
  check(spec.num_classes >= 2, "inject_label_noise: need at least two classes");
  if (spec.ratio == 0.0) return;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, spec.num_classes - 1);
  std::uniform_int_distribution<int> other(0, spec.num_classes - 2);
  for (auto& px : labels.data) {
    if (coin(rng) >= spec.ratio) continue;
    if (px >= spec.num_classes) {
      px = static_cast<std::uint8_t>(any(rng));  // was ignore; any class differs
    } else {
      const int r = other(rng);
      px = static_cast<std::uint8_t>(r >= px ? r + 1 : r);
    }
  }
}

}  // namespace nero
