#include "inwdt/patches.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace inwdt {
namespace {

// Writes the patch centred on (cx, cy) of img into out.
void write_patch(const ImageBuffer& img, int cx, int cy, const PatchLayout& layout,
                 double position_scale, std::span<double> out) {
  const int r = layout.patch_size / 2;
  std::size_t k = 0;
  for (int dy = -r; dy <= r; ++dy) {
    const int py = std::clamp(cy + dy, 0, img.height() - 1);
    for (int dx = -r; dx <= r; ++dx) {
      const int px = std::clamp(cx + dx, 0, img.width() - 1);
      const Pixel c = img.at(px, py);
      out[k++] = c[0];
      out[k++] = c[1];
      out[k++] = c[2];
      if (layout.with_position) {
        out[k++] = px * position_scale;
        out[k++] = py * position_scale;
      }
    }
  }
}

// Centre coordinates c in [0, n) whose slot offset d lands on pixel p after
// replicate clamping.
std::pair<int, int> centres_hitting(int p, int d, int n) {
  const int lo = p == 0 ? 0 : p - d;
  const int hi = p == n - 1 ? n - 1 : p - d;
  return {std::max(lo, 0), std::min(hi, n - 1)};
}

}  // namespace

void validate_patch_size(int m) {
  if (m < 1 || m % 2 == 0) {
    throw std::invalid_argument("patch size must be odd and >= 1, got " + std::to_string(m));
  }
}

double default_position_scale(int width, int height) {
  return 255.0 / std::max({width - 1, height - 1, 1});
}

RowMatrix extract_patches(const ImageBuffer& img, const PatchLayout& layout, double position_scale) {
  validate_patch_size(layout.patch_size);
  RowMatrix out(img.pixel_count(), layout.dimension());
  std::size_t i = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      write_patch(img, x, y, layout, position_scale, out.row(i++));
    }
  }
  return out;
}

PatchPairSet build_pairs(const ImageBuffer& source, const ImageBuffer& target,
                         const CorrespondenceField& field, const PatchLayout& layout,
                         double position_scale) {
  validate_patch_size(layout.patch_size);
  if (field.width() != source.width() || field.height() != source.height()) {
    throw std::invalid_argument("correspondence field is " + std::to_string(field.width()) + "x" +
                                std::to_string(field.height()) + " but source is " +
                                std::to_string(source.width()) + "x" +
                                std::to_string(source.height()));
  }
  PatchPairSet pairs;
  pairs.layout = layout;
  pairs.position_scale = position_scale;
  pairs.width = source.width();
  pairs.height = source.height();
  pairs.x = extract_patches(source, layout, position_scale);
  pairs.y = RowMatrix(pairs.x.rows(), pairs.x.cols());
  std::size_t i = 0;
  for (int y = 0; y < source.height(); ++y) {
    for (int x = 0; x < source.width(); ++x) {
      const auto [tx, ty] = target_coords(field, x, y, target.width(), target.height());
      write_patch(target, tx, ty, layout, position_scale, pairs.y.row(i++));
    }
  }
  return pairs;
}

ImageBuffer merge_candidates(const RowMatrix& final_x, int width, int height,
                             const PatchLayout& layout) {
  validate_patch_size(layout.patch_size);
  if (width < 1 || height < 1 ||
      final_x.rows() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) ||
      final_x.cols() != layout.dimension()) {
    throw std::invalid_argument("feature matrix shape does not match image and patch layout");
  }
  const int m = layout.patch_size;
  const int r = m / 2;
  const std::size_t stride = static_cast<std::size_t>(layout.channels_per_slot());

  std::vector<double> out(3 * final_x.rows());
  std::size_t o = 0;
  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px, o += 3) {
      double sum[3] = {0.0, 0.0, 0.0};
      std::size_t count = 0;
      // Fixed enumeration: slot row-major, then centre row, then centre column.
      for (int dy = -r; dy <= r; ++dy) {
        const auto [cy0, cy1] = centres_hitting(py, dy, height);
        for (int dx = -r; dx <= r; ++dx) {
          const auto [cx0, cx1] = centres_hitting(px, dx, width);
          const std::size_t slot = static_cast<std::size_t>((dy + r) * m + (dx + r)) * stride;
          for (int cy = cy0; cy <= cy1; ++cy) {
            for (int cx = cx0; cx <= cx1; ++cx) {
              const auto row = final_x.row(static_cast<std::size_t>(cy) * width + cx);
              sum[0] += row[slot];
              sum[1] += row[slot + 1];
              sum[2] += row[slot + 2];
              ++count;
            }
          }
        }
      }
      for (int c = 0; c < 3; ++c) {
        out[o + c] = std::clamp(sum[c] / static_cast<double>(count), 0.0, 255.0);
      }
    }
  }
  return ImageBuffer(width, height, std::move(out));
}

}  // namespace inwdt
