#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace inwdt {

using Pixel = std::array<double, 3>;

// H x W x 3 colour raster, row-major, interleaved RGB on the 0-255 scale.
// Immutable once constructed.
class ImageBuffer {
 public:
  // Throws std::invalid_argument on bad dimensions, wrong data length or
  // non-finite samples.
  ImageBuffer(int width, int height, std::vector<double> data);

  static ImageBuffer filled(int width, int height, const Pixel& value);
  static ImageBuffer from_bytes(int width, int height,
                                std::span<const std::uint8_t> rgb);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::span<const double> data() const { return data_; }

  // Unchecked in-range access.
  Pixel at(int x, int y) const {
    const std::size_t o = offset(x, y);
    return {data_[o], data_[o + 1], data_[o + 2]};
  }
  std::size_t offset(int x, int y) const {
    return 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x));
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_;
  int height_;
  std::vector<double> data_;
};

// Replicate padding: out-of-range coordinates read the nearest edge pixel.
Pixel pixel_at(const ImageBuffer& img, int x, int y);

// Clamp to [0, 255] then round half away from zero.
std::uint8_t quantize_sample(double v);
std::vector<std::uint8_t> quantize(const ImageBuffer& img);

class ImageIoError : public std::runtime_error {
 public:
  enum class Kind { kMissingFile, kUndecodable, kUnsupportedLayout, kUnwritable };

  ImageIoError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// 8-bit RGB PNG or JPEG. Samples are the decoded bytes promoted to double.
ImageBuffer load_image(const std::filesystem::path& path);

// Always writes PNG, whatever the extension.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

}  // namespace inwdt
