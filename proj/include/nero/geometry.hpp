#pragma once

// World/normalized coordinate mapping, the pinhole camera model, and ground
// truth pixel lookups. World axes: x along the road, y across it, z up.
// Camera axes follow the usual vision convention: x right, y down, z forward.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>

#include "nero/common.hpp"
#include "nero/image.hpp"

namespace nero {

/// Axis-aligned (x, y) extent of the supervised scene, with a margin
/// fraction applied on each side before mapping onto [-1,1].
struct SceneBounds {
  double min_x = 0.0, max_x = 0.0;
  double min_y = 0.0, max_y = 0.0;
  double margin = 0.0;

  bool valid() const { return max_x > min_x && max_y > min_y; }

  double lo(int axis) const {
    const double mn = axis == 0 ? min_x : min_y;
    const double mx = axis == 0 ? max_x : max_y;
    return mn - margin * (mx - mn);
  }
  double hi(int axis) const {
    const double mn = axis == 0 ? min_x : min_y;
    const double mx = axis == 0 ? max_x : max_y;
    return mx + margin * (mx - mn);
  }

  template <typename PointRange>
  static SceneBounds from_points(const PointRange& pts, double margin = 0.01) {
    SceneBounds b;
    b.margin = margin;
    bool first = true;
    for (const auto& p : pts) {
      const double x = p.x(), y = p.y();
      if (first) {
        b.min_x = b.max_x = x;
        b.min_y = b.max_y = y;
        first = false;
      } else {
        b.min_x = std::min(b.min_x, x);
        b.max_x = std::max(b.max_x, x);
        b.min_y = std::min(b.min_y, y);
        b.max_y = std::max(b.max_y, y);
      }
    }
    check(!first, "SceneBounds: no points");
    check(b.valid(), "SceneBounds: degenerate extent");
    return b;
  }
};

// Affine map of the (margin-expanded) bounds onto [-1,1] per axis.
// Out-of-range inputs clamp; the optional counter records how often.
inline NormCoord2 normalize(const Coord2& p, const SceneBounds& b,
                            std::uint64_t* clamp_count = nullptr) {
  check(b.valid(), "normalize: degenerate bounds");
  const double nx = 2.0 * (p.x() - b.lo(0)) / (b.hi(0) - b.lo(0)) - 1.0;
  const double ny = 2.0 * (p.y() - b.lo(1)) / (b.hi(1) - b.lo(1)) - 1.0;
  return NormCoord2::clamped(nx, ny, clamp_count);
}

inline Coord2 denormalize(const NormCoord2& n, const SceneBounds& b) {
  check(b.valid(), "denormalize: degenerate bounds");
  return {b.lo(0) + (n.x + 1.0) * 0.5 * (b.hi(0) - b.lo(0)),
          b.lo(1) + (n.y + 1.0) * 0.5 * (b.hi(1) - b.lo(1))};
}

template <typename S>
Mat2X<S> normalize_batch(const Eigen::Matrix2Xd& raw, const SceneBounds& b,
                         std::uint64_t* clamp_count = nullptr) {
  Mat2X<S> out(2, raw.cols());
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    const NormCoord2 n = normalize(raw.col(i), b, clamp_count);
    out(0, i) = static_cast<S>(n.x);
    out(1, i) = static_cast<S>(n.y);
  }
  return out;
}

/// Camera pose (world->camera), pinhole intrinsics and the frame's imagery.
struct CameraFrame {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();  // world -> camera
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Image3f image;
  ImageU8 labels;
  bool has_labels = false;
  int id = 0;

  Eigen::Vector3d camera_position() const { return -R.transpose() * t; }

  // Heading of the optical axis projected into the ground plane.
  double yaw() const {
    const Eigen::Vector3d fwd = R.transpose() * Eigen::Vector3d(0, 0, 1);
    return std::atan2(fwd.y(), fwd.x());
  }

  double rotation_error() const {
    return (R * R.transpose() - Eigen::Matrix3d::Identity()).norm();
  }
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // camera-frame z, meters
};

enum class ProjectStatus { in_view, behind, out_of_bounds };

struct Projection {
  ProjectStatus status = ProjectStatus::behind;
  PixelCoord pixel;

  bool in_view() const { return status == ProjectStatus::in_view; }
};

// World point -> continuous pixel coordinates. Out-of-view outcomes are
// normal results: behind the camera (non-positive depth) or outside
// [0,W) x [0,H). Pixel centers sit at integer coordinates.
inline Projection project(const Eigen::Vector3d& w, const CameraFrame& cam) {
  Projection result;
  const Eigen::Vector3d pc = cam.R * w + cam.t;
  if (pc.z() <= 0.0) {
    result.status = ProjectStatus::behind;
    return result;
  }
  result.pixel.u = cam.fx * pc.x() / pc.z() + cam.cx;
  result.pixel.v = cam.fy * pc.y() / pc.z() + cam.cy;
  result.pixel.depth = pc.z();
  const bool inside = result.pixel.u >= 0.0 && result.pixel.u < cam.width &&
                      result.pixel.v >= 0.0 && result.pixel.v < cam.height;
  result.status = inside ? ProjectStatus::in_view : ProjectStatus::out_of_bounds;
  return result;
}

/// Camera-frame ray direction through pixel (u, v), unit depth.
inline Eigen::Vector3d pixel_ray_cam(const CameraFrame& cam, double u, double v) {
  return {(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0};
}

// Colors sample bilinearly (clamp at borders); labels are categorical and
// sample nearest-neighbor.
inline Eigen::Vector3f sample_color_bilinear(const Image3f& img, double u,
                                             double v) {
  auto clampi = [](int v, int lo, int hi) {
    return v < lo ? lo : (v > hi ? hi : v);
  };
  const int x0 = clampi(static_cast<int>(std::floor(u)), 0, img.width - 1);
  const int y0 = clampi(static_cast<int>(std::floor(v)), 0, img.height - 1);
  const int x1 = clampi(x0 + 1, 0, img.width - 1);
  const int y1 = clampi(y0 + 1, 0, img.height - 1);
  const float fx = static_cast<float>(std::min(std::max(u - x0, 0.0), 1.0));
  const float fy = static_cast<float>(std::min(std::max(v - y0, 0.0), 1.0));
  return (1 - fx) * (1 - fy) * img.get(x0, y0) + fx * (1 - fy) * img.get(x1, y0) +
         (1 - fx) * fy * img.get(x0, y1) + fx * fy * img.get(x1, y1);
}

inline std::uint8_t sample_label_nearest(const ImageU8& img, double u, double v) {
  auto clampi = [](long v, long lo, long hi) {
    return v < lo ? lo : (v > hi ? hi : v);
  };
  const int x = static_cast<int>(clampi(std::lround(u), 0, img.width - 1));
  const int y = static_cast<int>(clampi(std::lround(v), 0, img.height - 1));
  return img.get(x, y);
}

}  // namespace nero
