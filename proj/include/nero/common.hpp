#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nero {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using Mat2X = Eigen::Matrix<S, 2, Eigen::Dynamic>;

using Coord2 = Eigen::Vector2d;

/// Raised for invalid configuration, malformed files and broken invariants.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

// splitmix64, used to derive independent deterministic seeds for the many
// RNG streams in the pipeline (init, batching, noise, ...). Keyed streams
// make checkpoint resume exact without serializing engine state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(seed ^ splitmix64(stream + splitmix64(index)));
}

/// 2D coordinate normalized to [-1,1] per axis, the network input domain.
struct NormCoord2 {
  double x = 0.0;
  double y = 0.0;

  /// Clamps into [-1,1]; bumps *clamp_count when clamping was needed.
  static NormCoord2 clamped(double x, double y,
                            std::uint64_t* clamp_count = nullptr) {
    const bool out = x < -1.0 || x > 1.0 || y < -1.0 || y > 1.0;
    if (out && clamp_count) ++*clamp_count;
    auto clip = [](double v) { return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v); };
    return NormCoord2{clip(x), clip(y)};
  }
};

/// Label value excluded from semantic losses and from mIoU.
inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Ordered semantic classes; ids are dense 0..size-1, ignore is distinct.
struct SemanticClassSet {
  std::vector<std::string> names{"road", "traffic_lane", "manhole"};

  int size() const { return static_cast<int>(names.size()); }
  std::uint8_t ignore_id() const { return kIgnoreLabel; }
};

}  // namespace nero
