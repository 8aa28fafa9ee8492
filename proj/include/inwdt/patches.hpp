#pragma once

#include <cstddef>

#include "inwdt/correspondence.hpp"
#include "inwdt/image.hpp"
#include "inwdt/matrix.hpp"

namespace inwdt {

// Layout of one patch row: for each of the m*m neighbours (row-major within
// the patch) the three colour channels, followed by the scaled (col, row)
// of that neighbour when positions are enabled.
struct PatchLayout {
  int patch_size = 3;
  bool with_position = false;

  int channels_per_slot() const { return with_position ? 5 : 3; }
  int slots() const { return patch_size * patch_size; }
  std::size_t dimension() const {
    return static_cast<std::size_t>(slots()) * static_cast<std::size_t>(channels_per_slot());
  }
};

// Throws std::invalid_argument unless m is odd and >= 1.
void validate_patch_size(int m);

// Maps the larger image dimension onto the 0-255 colour scale.
double default_position_scale(int width, int height);

// One row per pixel in row-major order. Border neighbours are replicate-padded
// and report the coordinates of the pixel they replicate.
RowMatrix extract_patches(const ImageBuffer& img, const PatchLayout& layout, double position_scale);

// Source features x (the mutable transfer state) paired row-for-row with the
// target features y sampled where the correspondence field points.
struct PatchPairSet {
  RowMatrix x;
  RowMatrix y;
  PatchLayout layout;
  double position_scale = 1.0;
  int width = 0;   // source raster
  int height = 0;

  std::size_t size() const { return x.rows(); }
  std::size_t dimension() const { return x.cols(); }
};

PatchPairSet build_pairs(const ImageBuffer& source, const ImageBuffer& target,
                         const CorrespondenceField& field, const PatchLayout& layout,
                         double position_scale);

// Averages, for every pixel, the colour of each patch slot that refers to it.
// Each row contributes all of its m*m slots; padded slots land on the border
// pixel they replicate. Position features are ignored. Output is clamped to
// [0, 255].
ImageBuffer merge_candidates(const RowMatrix& final_x, int width, int height,
                             const PatchLayout& layout);

}  // namespace inwdt
