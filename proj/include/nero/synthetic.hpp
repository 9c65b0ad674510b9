#pragma once

// Fully-known desk-scale scenes: an analytic road surface (height profile,
// procedural texture, semantic layout) plus a camera path, a point-cloud
// sampler and a ray-marching renderer. These are the oracles the training
// pipeline and its tests are checked against.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "nero/geometry.hpp"
#include "nero/supervision.hpp"

namespace nero {

enum class SurfaceClass : std::uint8_t { road = 0, traffic_lane = 1, manhole = 2 };

struct HeightProfile {
  enum class Kind { flat, square_wave, slope };
  Kind kind = Kind::flat;
  double z0 = 0.0;
  double amplitude = 0.2;  // square wave: high level over the first duty part
  double period = 8.0;
  double duty = 0.5;
  double grade = 0.0;  // slope: dz/dx

  double eval(double x) const {
    switch (kind) {
      case Kind::square_wave: {
        const double phase = x / period - std::floor(x / period);
        return z0 + (phase < duty ? amplitude : 0.0);
      }
      case Kind::slope:
        return z0 + grade * x;
      case Kind::flat:
      default:
        return z0;
    }
  }

  double z_min() const {
    return kind == Kind::slope ? std::min(z0, z0 + grade * 1e4) : z0;
  }
  double z_max() const {
    switch (kind) {
      case Kind::square_wave: return z0 + amplitude;
      case Kind::slope: return std::max(z0, z0 + grade * 1e4);
      default: return z0;
    }
  }
};

struct Stripe {
  double y_center = 0.0;
  double half_width = 0.1;
};

struct Disc {
  double x = 0.0, y = 0.0, radius = 0.5;
};

struct RectXY {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

struct SceneSpec {
  double length = 100.0;  // road: x in [0, length]
  double width = 10.0;    // road: y in [-width/2, width/2]
  HeightProfile profile;

  Eigen::Vector3f road_color{0.35f, 0.35f, 0.36f};
  Eigen::Vector3f lane_color{0.88f, 0.88f, 0.80f};
  Eigen::Vector3f manhole_color{0.13f, 0.11f, 0.10f};
  Eigen::Vector3f sky_color{0.55f, 0.75f, 0.95f};
  // Low-frequency multiplicative shading on the road class; wavelengths are
  // long enough that bilinear pixel lookups stay within 2/255 of analytic.
  double color_variation = 0.05;

  std::vector<Stripe> stripes;
  std::vector<Disc> manholes;
  std::vector<RectXY> holes;  // supervision withheld inside these

  // Camera rig along the centerline.
  int num_poses = 50;
  double pose_spacing = 2.0;
  double pose_start_x = 2.0;
  double cam_height = 1.65;
  double cam_pitch_deg = 20.0;  // optical axis below the horizon
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int image_width = 320, image_height = 96;

  bool on_road(double x, double y) const {
    return x >= 0.0 && x <= length && std::abs(y) <= width / 2;
  }

  // Published 1241x376 driving-camera calibration, rescaled to the target
  // image size.
  void set_scaled_intrinsics() {
    fx = 718.856 * image_width / 1241.0;
    fy = 718.856 * image_height / 376.0;
    cx = 607.1928 * image_width / 1241.0;
    cy = 185.2157 * image_height / 376.0;
  }
};

struct SurfacePoint {
  double z = 0.0;
  Eigen::Vector3f color = Eigen::Vector3f::Zero();
  SurfaceClass cls = SurfaceClass::road;
};

// Class comes from the semantic layout (manhole discs beat lane stripes),
// color from the class with deterministic seed-free shading on road.
inline SurfacePoint eval_surface(const SceneSpec& spec, double x, double y) {
  SurfacePoint p;
  p.z = spec.profile.eval(x);
  p.cls = SurfaceClass::road;
  for (const Disc& d : spec.manholes) {
    const double dx = x - d.x, dy = y - d.y;
    if (dx * dx + dy * dy <= d.radius * d.radius) {
      p.cls = SurfaceClass::manhole;
      break;
    }
  }
  if (p.cls == SurfaceClass::road) {
    for (const Stripe& s : spec.stripes) {
      if (std::abs(y - s.y_center) <= s.half_width) {
        p.cls = SurfaceClass::traffic_lane;
        break;
      }
    }
  }
  switch (p.cls) {
    case SurfaceClass::traffic_lane: p.color = spec.lane_color; break;
    case SurfaceClass::manhole: p.color = spec.manhole_color; break;
    case SurfaceClass::road: {
      const double mod = 1.0 + spec.color_variation *
                                   std::sin(2 * M_PI * x / 23.0) *
                                   std::cos(2 * M_PI * y / 9.0);
      p.color = spec.road_color * static_cast<float>(mod);
      break;
    }
  }
  return p;
}

// Shortest distance from (x, y) to any class boundary or the road border.
// Used to keep consistency checks away from rasterization edges.
inline double class_boundary_distance(const SceneSpec& spec, double x, double y) {
  double d = std::min({x, spec.length - x, spec.width / 2 - std::abs(y)});
  for (const Stripe& s : spec.stripes)
    d = std::min(d, std::abs(std::abs(y - s.y_center) - s.half_width));
  for (const Disc& m : spec.manholes) {
    const double r = std::hypot(x - m.x, y - m.y);
    d = std::min(d, std::abs(r - m.radius));
  }
  return d;
}

inline bool in_hole(const SceneSpec& spec, double x, double y) {
  for (const RectXY& h : spec.holes)
    if (h.contains(x, y)) return true;
  return false;
}

// Uniform random surface samples over the road extent at the given density
// (points per square meter); hole rectangles are excluded by rejection when
// respect_holes is set, so the kept count is binomial around
// density * (road area - hole area).
inline std::vector<HeightSample> generate_point_cloud(const SceneSpec& spec,
                                                      double density,
                                                      std::uint64_t seed,
                                                      bool respect_holes) {
  std::vector<HeightSample> out;
  const long long n = std::llround(density * spec.length * spec.width);
  if (n <= 0) return out;
  out.reserve(static_cast<std::size_t>(n));
  std::mt19937_64 rng(derive_seed(seed, 0x636c6f75ull));
  std::uniform_real_distribution<double> ux(0.0, spec.length);
  std::uniform_real_distribution<double> uy(-spec.width / 2, spec.width / 2);
  for (long long i = 0; i < n; ++i) {
    const double x = ux(rng), y = uy(rng);
    if (respect_holes && in_hole(spec, x, y)) continue;
    out.push_back({Coord2(x, y), spec.profile.eval(x), HeightSource::synthetic});
  }
  return out;
}

// Camera poses marching down the centerline, pitched toward the road.
// world->camera = (Rz(yaw) * Ry(pitch) * B)^T with B the axis permutation
// taking camera (right, down, forward) to world (-y, -z, +x).
inline std::vector<CameraFrame> make_camera_path(const SceneSpec& spec) {
  std::vector<CameraFrame> poses;
  Eigen::Matrix3d base;
  base << 0, 0, 1,
         -1, 0, 0,
          0, -1, 0;
  const double pitch = spec.cam_pitch_deg * M_PI / 180.0;
  Eigen::Matrix3d pitch_rot;
  pitch_rot << std::cos(pitch), 0, std::sin(pitch),
               0, 1, 0,
              -std::sin(pitch), 0, std::cos(pitch);
  for (int i = 0; i < spec.num_poses; ++i) {
    CameraFrame cam;
    const double x = spec.pose_start_x + i * spec.pose_spacing;
    const Eigen::Vector3d pos(x, 0.0, spec.profile.eval(x) + spec.cam_height);
    const Eigen::Matrix3d cam_to_world = pitch_rot * base;
    cam.R = cam_to_world.transpose();
    cam.t = -cam.R * pos;
    cam.fx = spec.fx;
    cam.fy = spec.fy;
    cam.cx = spec.cx;
    cam.cy = spec.cy;
    cam.width = spec.image_width;
    cam.height = spec.image_height;
    cam.id = i;
    poses.push_back(cam);
  }
  return poses;
}

struct RenderedFrame {
  Image3f color;
  ImageU8 labels;
  ImageF depth;  // camera-frame z of the hit, 0 where the ray misses
};

inline void paint_sky(const SceneSpec& spec, RenderedFrame& out, int px, int py) {
  out.color.set(px, py, spec.sky_color);
  out.labels.set(px, py, kIgnoreLabel);
  out.depth.set(px, py, 0.f);
}

namespace detail {

// Height of the surface under (x, y), or quiet NaN off the road extent.
inline double surface_z_or_nan(const SceneSpec& spec, double x, double y) {
  if (!spec.on_road(x, y)) return std::numeric_limits<double>::quiet_NaN();
  return spec.profile.eval(x);
}

}  // namespace detail

// Per pixel: cast the camera ray and intersect the analytic height field by
// fixed-step marching (0.05 m) plus bisection refinement to 1e-6 m. Features
// thinner than the march step along the ray can be stepped over; the default
// scenes keep plateaus far wider than that.
inline RenderedFrame render_frame(const SceneSpec& spec, const CameraFrame& cam) {
  RenderedFrame out;
  out.color.resize(cam.width, cam.height);
  out.labels.resize(cam.width, cam.height, kIgnoreLabel);
  out.depth.resize(cam.width, cam.height, 0.f);

  const Eigen::Matrix3d world_from_cam = cam.R.transpose();
  const Eigen::Vector3d origin = cam.camera_position();
  const double z_lo = spec.profile.z_min() - 0.01;
  const double z_hi = spec.profile.z_max() + 0.01;
  const double march = 0.05;
  const double t_cap = 250.0;

  for (int py = 0; py < cam.height; ++py) {
    for (int px = 0; px < cam.width; ++px) {
      const Eigen::Vector3d dir =
          (world_from_cam * pixel_ray_cam(cam, px, py)).normalized();
      // Bound the march to the t-window where the ray's z overlaps the
      // surface band.
      double t0 = 0.05, t1 = t_cap;
      if (std::abs(dir.z()) > 1e-9) {
        const double ta = (z_hi - origin.z()) / dir.z();
        const double tb = (z_lo - origin.z()) / dir.z();
        t0 = std::max(t0, std::min(ta, tb));
        t1 = std::min(t1, std::max(ta, tb));
      } else if (origin.z() < z_lo || origin.z() > z_hi) {
        paint_sky(spec, out, px, py);
        continue;
      }
      if (t1 <= t0) {
        paint_sky(spec, out, px, py);
        continue;
      }

      auto above = [&](double t, double& gap) {
        const Eigen::Vector3d p = origin + t * dir;
        const double sz = detail::surface_z_or_nan(spec, p.x(), p.y());
        if (std::isnan(sz)) {
          gap = std::numeric_limits<double>::quiet_NaN();
          return true;
        }
        gap = p.z() - sz;
        return gap > 0.0;
      };

      bool hit = false;
      double gap_prev;
      bool above_prev = above(t0, gap_prev);
      for (double t = t0 + march; t <= t1 + march; t += march) {
        const double tc = std::min(t, t1);
        double gap;
        const bool above_now = above(tc, gap);
        if (!std::isnan(gap) && !std::isnan(gap_prev) && above_prev && !above_now) {
          // Bracketed; bisect to 1e-6 m along the ray.
          double lo = tc - march, hi = tc;
          for (int it = 0; it < 40 && (hi - lo) > 1e-6; ++it) {
            const double mid = 0.5 * (lo + hi);
            double g;
            if (above(mid, g))
              lo = mid;
            else
              hi = mid;
          }
          const double t_hit = 0.5 * (lo + hi);
          const Eigen::Vector3d p = origin + t_hit * dir;
          const SurfacePoint sp = eval_surface(spec, p.x(), p.y());
          out.color.set(px, py, sp.color);
          out.labels.set(px, py, static_cast<std::uint8_t>(sp.cls));
          out.depth.set(px, py, static_cast<float>((cam.R * p + cam.t).z()));
          hit = true;
          break;
        }
        above_prev = above_now;
        gap_prev = gap;
        if (tc >= t1) break;
      }
      if (!hit) paint_sky(spec, out, px, py);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stock scenes

/// The square-wave road with lane stripes, periodic manholes and the two
/// supervision holes (one full-width slab, one corner square).
inline SceneSpec default_scene() {
  SceneSpec spec;
  spec.length = 100.0;
  spec.width = 10.0;
  spec.profile.kind = HeightProfile::Kind::square_wave;
  spec.profile.amplitude = 0.2;
  spec.profile.period = 8.0;
  spec.profile.duty = 0.5;
  spec.stripes = {{-1.8, 0.1}, {1.8, 0.1}};
  for (int i = 0; i < 5; ++i) {
    const double x = 10.0 + 20.0 * i;
    const double y = (i % 2 == 0) ? 0.0 : 1.2;
    spec.manholes.push_back({x, y, 0.5});
  }
  spec.holes = {{40.0, 42.0, -5.0, 5.0},      // horizontal slab, full width
                {60.0, 62.5, 2.5, 5.0}};      // corner square, 25% of width
  spec.num_poses = 50;
  spec.pose_spacing = 2.0;
  spec.pose_start_x = 2.0;
  spec.image_width = 320;
  spec.image_height = 96;
  spec.set_scaled_intrinsics();
  return spec;
}

/// Reduced variant for smoke tests: short flat-ish road, few poses.
inline SceneSpec smoke_scene() {
  SceneSpec spec = default_scene();
  spec.length = 40.0;
  spec.profile.period = 8.0;
  spec.manholes = {{10.0, 0.0, 0.5}, {30.0, 1.2, 0.5}};
  spec.holes = {{20.0, 21.0, -5.0, 5.0}};
  spec.num_poses = 12;
  spec.pose_spacing = 2.0;
  spec.image_width = 192;
  spec.image_height = 64;
  spec.set_scaled_intrinsics();
  return spec;
}

}  // namespace nero
