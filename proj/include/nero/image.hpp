#pragma once

// Minimal image containers plus binary PPM/PGM io. Color images hold float
// RGB in [0,1]; label maps hold one class id byte per pixel.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nero/common.hpp"

namespace nero {

struct Image3f {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // rgb interleaved, row-major

  void resize(int w, int h, float fill = 0.f) {
    width = w;
    height = h;
    data.assign(static_cast<std::size_t>(w) * h * 3, fill);
  }
  bool empty() const { return data.empty(); }
  Eigen::Vector3f get(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, const Eigen::Vector3f& c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = c.x();
    data[i + 1] = c.y();
    data[i + 2] = c.z();
  }
};

struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  void resize(int w, int h, std::uint8_t fill = 0) {
    width = w;
    height = h;
    data.assign(static_cast<std::size_t>(w) * h, fill);
  }
  bool empty() const { return data.empty(); }
  std::uint8_t get(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, std::uint8_t v) {
    data[static_cast<std::size_t>(y) * width + x] = v;
  }
};

struct ImageF {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  void resize(int w, int h, float fill = 0.f) {
    width = w;
    height = h;
    data.assign(static_cast<std::size_t>(w) * h, fill);
  }
  float get(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, float v) {
    data[static_cast<std::size_t>(y) * width + x] = v;
  }
};

inline std::uint8_t to_u8(float v) {
  const float s = v * 255.f + 0.5f;
  return static_cast<std::uint8_t>(s < 0.f ? 0.f : (s > 255.f ? 255.f : s));
}

// --- PPM (P6) / PGM (P5), binary, maxval 255 ------------------------------

namespace detail {
inline int next_pnm_int(std::istream& in) {
  // Skips whitespace and '#' comments per the netpbm grammar.
  int c = in.get();
  while (c == '#' || std::isspace(c)) {
    if (c == '#')
      while (c != '\n' && c != EOF) c = in.get();
    c = in.get();
  }
  int value = 0;
  bool any = false;
  while (std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  check(any, "pnm: malformed header");
  return value;
}
}  // namespace detail

inline void write_ppm(const std::filesystem::path& path, const Image3f& img) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "write_ppm: cannot open " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Eigen::Vector3f c = img.get(x, y);
      row[x * 3 + 0] = to_u8(c.x());
      row[x * 3 + 1] = to_u8(c.y());
      row[x * 3 + 2] = to_u8(c.z());
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  check(out.good(), "write_ppm: short write to " + path.string());
}

inline Image3f read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "read_ppm: cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  check(magic[0] == 'P' && magic[1] == '6', "read_ppm: not a P6 file: " + path.string());
  const int w = detail::next_pnm_int(in);
  const int h = detail::next_pnm_int(in);
  const int maxval = detail::next_pnm_int(in);
  check(maxval == 255, "read_ppm: only maxval 255 supported");
  Image3f img;
  img.resize(w, h);
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  check(in.gcount() == static_cast<std::streamsize>(raw.size()),
        "read_ppm: truncated pixel data in " + path.string());
  for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.f;
  return img;
}

inline void write_pgm(const std::filesystem::path& path, const ImageU8& img) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "write_pgm: cannot open " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  check(out.good(), "write_pgm: short write to " + path.string());
}

inline ImageU8 read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "read_pgm: cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  check(magic[0] == 'P' && magic[1] == '5', "read_pgm: not a P5 file: " + path.string());
  const int w = detail::next_pnm_int(in);
  const int h = detail::next_pnm_int(in);
  const int maxval = detail::next_pnm_int(in);
  check(maxval == 255, "read_pgm: only maxval 255 supported");
  ImageU8 img;
  img.resize(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()), img.data.size());
  check(in.gcount() == static_cast<std::streamsize>(img.data.size()),
        "read_pgm: truncated pixel data in " + path.string());
  return img;
}

}  // namespace nero
