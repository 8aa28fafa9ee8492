#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace inwdt {

struct Displacement {
  float dx = 0.0f;
  float dy = 0.0f;
  friend bool operator==(const Displacement&, const Displacement&) = default;
};

// Dense source -> target displacement field, row-major, one entry per source
// pixel. Values are float32 to match the Middlebury container.
class CorrespondenceField {
 public:
  CorrespondenceField(int width, int height, std::vector<Displacement> flow);

  int width() const { return width_; }
  int height() const { return height_; }
  const Displacement& at(int x, int y) const {
    return flow_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)];
  }
  const std::vector<Displacement>& flow() const { return flow_; }

  friend bool operator==(const CorrespondenceField&, const CorrespondenceField&) = default;

 private:
  int width_;
  int height_;
  std::vector<Displacement> flow_;
};

class FlowFormatError : public std::runtime_error {
 public:
  enum class Kind { kMissingFile, kBadMagic, kTruncated, kBadDimensions, kNonFinite, kUnwritable };

  FlowFormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr float kFloMagic = 202021.25f;

// Middlebury .flo: float32 magic, int32 width, int32 height, then
// width*height interleaved (dx, dy) float32, all little-endian.
CorrespondenceField load_flo(const std::filesystem::path& path);
void write_flo(const CorrespondenceField& field, const std::filesystem::path& path);

CorrespondenceField identity_field(int width, int height);

// Target pixel for source pixel (x, y): rounded (half away from zero) and
// clamped into the target raster.
std::pair<int, int> target_coords(const CorrespondenceField& field, int x, int y,
                                  int target_w, int target_h);

}  // namespace inwdt
