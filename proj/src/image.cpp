#include "inwdt/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace inwdt {

ImageBuffer::ImageBuffer(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (data_.size() != 3 * pixel_count()) {
    throw std::invalid_argument("image data length must be width*height*3");
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("image samples must be finite");
  }
}

ImageBuffer ImageBuffer::filled(int width, int height, const Pixel& value) {
  std::vector<double> data;
  if (width > 0 && height > 0) {
    data.reserve(3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (int i = 0; i < width * height; ++i) data.insert(data.end(), value.begin(), value.end());
  }
  return ImageBuffer(width, height, std::move(data));
}

ImageBuffer ImageBuffer::from_bytes(int width, int height, std::span<const std::uint8_t> rgb) {
  return ImageBuffer(width, height, std::vector<double>(rgb.begin(), rgb.end()));
}

Pixel pixel_at(const ImageBuffer& img, int x, int y) {
  return img.at(std::clamp(x, 0, img.width() - 1), std::clamp(y, 0, img.height() - 1));
}

std::uint8_t quantize_sample(double v) {
  return static_cast<std::uint8_t>(std::round(std::clamp(v, 0.0, 255.0)));
}

std::vector<std::uint8_t> quantize(const ImageBuffer& img) {
  std::vector<std::uint8_t> out(img.data().size());
  std::transform(img.data().begin(), img.data().end(), out.begin(), quantize_sample);
  return out;
}

ImageBuffer load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ImageIoError(ImageIoError::Kind::kMissingFile, "no such image file: " + path.string());
  }
  // IMREAD_UNCHANGED keeps the stored channel layout (and skips EXIF rotation)
  // so alpha and grayscale inputs can be rejected instead of silently converted.
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (bgr.empty()) {
    throw ImageIoError(ImageIoError::Kind::kUndecodable, "cannot decode image: " + path.string());
  }
  if (bgr.depth() != CV_8U) {
    throw ImageIoError(ImageIoError::Kind::kUnsupportedLayout,
                       "only 8-bit images are supported: " + path.string());
  }
  if (bgr.channels() != 3) {
    const std::string why = bgr.channels() == 4   ? "alpha channel not supported"
                            : bgr.channels() == 1 ? "grayscale image, RGB required"
                                                  : "unsupported channel layout";
    throw ImageIoError(ImageIoError::Kind::kUnsupportedLayout, why + ": " + path.string());
  }

  const int w = bgr.cols;
  const int h = bgr.rows;
  std::vector<double> data(3 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  std::size_t o = 0;
  for (int y = 0; y < h; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < w; ++x) {
      data[o++] = row[x][2];
      data[o++] = row[x][1];
      data[o++] = row[x][0];
    }
  }
  return ImageBuffer(w, h, std::move(data));
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  const auto bytes = quantize(img);
  std::size_t o = 0;
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x, o += 3) {
      row[x] = cv::Vec3b(bytes[o + 2], bytes[o + 1], bytes[o]);
    }
  }
  std::vector<std::uint8_t> encoded;
  if (!cv::imencode(".png", bgr, encoded)) {
    throw ImageIoError(ImageIoError::Kind::kUnwritable, "PNG encoding failed");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ImageIoError(ImageIoError::Kind::kUnwritable, "cannot open for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(encoded.data()),
            static_cast<std::streamsize>(encoded.size()));
  if (!out) {
    throw ImageIoError(ImageIoError::Kind::kUnwritable, "write failed: " + path.string());
  }
}

}  // namespace inwdt
