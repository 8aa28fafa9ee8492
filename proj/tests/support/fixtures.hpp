#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "inwdt/image.hpp"
#include "inwdt/rng.hpp"

namespace fixtures {

// Uniformly random 8-bit image.
inline inwdt::ImageBuffer random_image(int w, int h, std::uint64_t seed) {
  inwdt::Rng rng(seed);
  std::vector<double> data(3 * static_cast<std::size_t>(w) * h);
  for (auto& v : data) v = static_cast<double>(rng.below(256));
  return inwdt::ImageBuffer(w, h, std::move(data));
}

// Photograph-like 8-bit test scene: smooth illumination gradients, a few
// soft-edged coloured blobs, a stripe texture and mild sensor noise.
inline inwdt::ImageBuffer synthetic_scene(int w, int h, std::uint64_t seed) {
  inwdt::Rng rng(seed);
  struct Blob {
    double cx, cy, radius, r, g, b;
  };
  std::vector<Blob> blobs(7);
  for (auto& bl : blobs) {
    bl.cx = rng.uniform() * w;
    bl.cy = rng.uniform() * h;
    bl.radius = (0.08 + 0.17 * rng.uniform()) * std::min(w, h);
    bl.r = 30 + 200 * rng.uniform();
    bl.g = 30 + 200 * rng.uniform();
    bl.b = 30 + 200 * rng.uniform();
  }
  std::vector<double> data;
  data.reserve(3 * static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / w;
      const double fy = static_cast<double>(y) / h;
      double c[3] = {50 + 140 * fx + 15 * std::sin(6.0 * fy), 70 + 110 * fy,
                     170 - 90 * (fx + fy) / 2 + 10 * std::cos(5.0 * fx)};
      for (const auto& bl : blobs) {
        const double dist = std::hypot(x - bl.cx, y - bl.cy);
        const double a = 1.0 / (1.0 + std::exp((dist - bl.radius) / 2.0));
        c[0] = (1 - a) * c[0] + a * bl.r;
        c[1] = (1 - a) * c[1] + a * bl.g;
        c[2] = (1 - a) * c[2] + a * bl.b;
      }
      const double stripe = (y / 8 + x / 24) % 2 == 0 ? 6.0 : -6.0;
      for (double v : c) {
        const double noisy = v + stripe * (fx > 0.5 ? 1.0 : 0.0) + (rng.uniform() - 0.5) * 6.0;
        data.push_back(std::round(std::clamp(noisy, 0.0, 255.0)));
      }
    }
  }
  return inwdt::ImageBuffer(w, h, std::move(data));
}

// clip(a * img + b) per channel, re-quantised to 8 bits.
inline inwdt::ImageBuffer affine_recolour(const inwdt::ImageBuffer& img, double a, double b) {
  std::vector<double> data(img.data().begin(), img.data().end());
  for (auto& v : data) v = std::round(std::clamp(a * v + b, 0.0, 255.0));
  return inwdt::ImageBuffer(img.width(), img.height(), std::move(data));
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("inwdt_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
