#include "inwdt/patches.hpp"

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "inwdt/rng.hpp"

namespace inwdt {
namespace {

TEST(ExtractPatchesTest, SinglePixelPatchesAreThePixels) {
  const ImageBuffer img(2, 2, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  const RowMatrix x = extract_patches(img, {1, false}, 1.0);
  ASSERT_EQ(x.rows(), 4u);
  ASSERT_EQ(x.cols(), 3u);
  EXPECT_EQ(x.data()[0], 1);
  EXPECT_EQ(x.row(3)[0], 10);
  EXPECT_EQ(x.row(3)[2], 12);
  EXPECT_TRUE(std::equal(x.data().begin(), x.data().end(), img.data().begin()));
}

TEST(ExtractPatchesTest, FeatureDimensions) {
  const ImageBuffer img = fixtures::random_image(4, 4, 1);
  EXPECT_EQ(extract_patches(img, {3, true}, 1.0).cols(), 45u);
  EXPECT_EQ(extract_patches(img, {3, false}, 1.0).cols(), 27u);
  EXPECT_EQ(extract_patches(img, {5, true}, 1.0).cols(), 125u);
  EXPECT_EQ((PatchLayout{3, true}.dimension()), 45u);
  EXPECT_EQ((PatchLayout{3, false}.dimension()), 27u);
}

TEST(ExtractPatchesTest, RejectsEvenOrNonPositiveSize) {
  const ImageBuffer img = fixtures::random_image(4, 4, 1);
  for (int m : {0, -1, 2, 4}) {
    EXPECT_THROW(extract_patches(img, {m, false}, 1.0), std::invalid_argument) << m;
  }
}

TEST(ExtractPatchesTest, CornerPatchLayoutWithReplicatePadding) {
  const ImageBuffer img = fixtures::random_image(3, 2, 5);
  const double scale = 2.0;
  const RowMatrix x = extract_patches(img, {3, true}, scale);
  // Pixel (0, 0): neighbour offsets row-major from (-1, -1) to (1, 1).
  const auto row = x.row(0);
  std::size_t k = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int px = std::max(dx, 0);
      const int py = std::max(dy, 0);
      const Pixel c = img.at(px, py);
      EXPECT_EQ(row[k++], c[0]);
      EXPECT_EQ(row[k++], c[1]);
      EXPECT_EQ(row[k++], c[2]);
      EXPECT_EQ(row[k++], px * scale);
      EXPECT_EQ(row[k++], py * scale);
    }
  }
}

TEST(ExtractPatchesTest, DefaultPositionScaleMapsLongSideTo255) {
  EXPECT_DOUBLE_EQ(default_position_scale(256, 100), 1.0);
  EXPECT_DOUBLE_EQ(default_position_scale(52, 86), 3.0);
  EXPECT_DOUBLE_EQ(default_position_scale(1, 1), 255.0);
}

TEST(BuildPairsTest, IdenticalImagesWithIdentityFlowGiveEqualFeatures) {
  const ImageBuffer img = fixtures::random_image(6, 5, 2);
  const PatchPairSet p = build_pairs(img, img, identity_field(6, 5), {3, true}, 1.5);
  EXPECT_EQ(p.x, p.y);
  EXPECT_EQ(p.size(), 30u);
  EXPECT_EQ(p.dimension(), 45u);
}

TEST(BuildPairsTest, SinglePixelAnyFlow) {
  const ImageBuffer src(1, 1, {1, 2, 3});
  const ImageBuffer tgt(1, 1, {4, 5, 6});
  const PatchPairSet p = build_pairs(src, tgt, CorrespondenceField(1, 1, {{-7.0f, 30.0f}}), {3, false}, 1.0);
  ASSERT_EQ(p.size(), 1u);
  for (int slot = 0; slot < 9; ++slot) {
    EXPECT_EQ(p.y.row(0)[3 * slot], 4);
    EXPECT_EQ(p.y.row(0)[3 * slot + 2], 6);
  }
}

TEST(BuildPairsTest, ShiftedFlowMatchesEnumeration) {
  const ImageBuffer src = fixtures::random_image(3, 3, 8);
  const ImageBuffer tgt = fixtures::random_image(3, 3, 9);
  const CorrespondenceField shift(3, 3, std::vector<Displacement>(9, {1.0f, 0.0f}));
  const PatchPairSet p = build_pairs(src, tgt, shift, {1, false}, 1.0);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) {
      const Pixel expected = tgt.at(std::min(x + 1, 2), y);
      const auto row = p.y.row(static_cast<std::size_t>(y) * 3 + x);
      EXPECT_EQ(row[0], expected[0]);
      EXPECT_EQ(row[1], expected[1]);
      EXPECT_EQ(row[2], expected[2]);
    }
  }
}

TEST(BuildPairsTest, TargetPositionFeaturesUseTargetCoordinates) {
  const ImageBuffer img = fixtures::random_image(4, 4, 3);
  const CorrespondenceField shift(4, 4, std::vector<Displacement>(16, {0.0f, 2.0f}));
  const PatchPairSet p = build_pairs(img, img, shift, {1, true}, 10.0);
  // Source pixel (1, 0) pairs with target pixel (1, 2).
  EXPECT_EQ(p.x.row(1)[3], 10.0);
  EXPECT_EQ(p.x.row(1)[4], 0.0);
  EXPECT_EQ(p.y.row(1)[3], 10.0);
  EXPECT_EQ(p.y.row(1)[4], 20.0);
}

TEST(BuildPairsTest, RejectsFieldSizeMismatch) {
  const ImageBuffer img = fixtures::random_image(4, 4, 3);
  EXPECT_THROW(build_pairs(img, img, identity_field(4, 3), {1, false}, 1.0), std::invalid_argument);
}

TEST(MergeCandidatesTest, SinglePixelPatchesPassThrough) {
  Rng rng(4);
  RowMatrix x(6, 3);
  for (auto& v : x.data()) v = rng.uniform() * 255.0;
  const ImageBuffer img = merge_candidates(x, 3, 2, {1, false});
  EXPECT_TRUE(std::equal(img.data().begin(), img.data().end(), x.data().begin()));
}

TEST(MergeCandidatesTest, ConstantRowsGiveConstantImage) {
  const PatchLayout layout{3, true};
  RowMatrix x(20, layout.dimension());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (int s = 0; s < layout.slots(); ++s) {
      x(i, 5 * s) = 12.5;
      x(i, 5 * s + 1) = 100;
      x(i, 5 * s + 2) = 250;
      x(i, 5 * s + 3) = 999;  // positions are ignored
      x(i, 5 * s + 4) = -999;
    }
  }
  EXPECT_EQ(merge_candidates(x, 5, 4, layout), ImageBuffer::filled(5, 4, {12.5, 100, 250}));
}

TEST(MergeCandidatesTest, ThreeByOneMatchesHandEnumeration) {
  // Rows for centres 0, 1, 2; slot s of every row has red = 10 * centre + s
  // and green/blue fixed, so each pixel's mean can be enumerated by hand.
  const PatchLayout layout{3, false};
  RowMatrix x(3, 27);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t s = 0; s < 9; ++s) {
      x(c, 3 * s) = 10.0 * c + s;
      x(c, 3 * s + 1) = 1;
      x(c, 3 * s + 2) = 2;
    }
  }
  // Height 1: every slot row lands on y = 0. Slot column dx = s % 3 - 1.
  // Pixel 0 receives centre 0 slots dx in {-1, 0} (6 slots) and centre 1
  // slots dx = -1 (3 slots).
  const double p0 = ((0 + 1 + 3 + 4 + 6 + 7) + (10 + 13 + 16)) / 9.0;
  // Pixel 1: centre 0 dx = 1, centre 1 dx = 0, centre 2 dx = -1.
  const double p1 = ((2 + 5 + 8) + (11 + 14 + 17) + (20 + 23 + 26)) / 9.0;
  // Pixel 2: centre 1 dx = 1, centre 2 dx in {0, 1}.
  const double p2 = ((12 + 15 + 18) + (21 + 22 + 24 + 25 + 27 + 28)) / 9.0;
  const ImageBuffer img = merge_candidates(x, 3, 1, layout);
  EXPECT_DOUBLE_EQ(img.at(0, 0)[0], p0);
  EXPECT_DOUBLE_EQ(img.at(1, 0)[0], p1);
  EXPECT_DOUBLE_EQ(img.at(2, 0)[0], p2);
  EXPECT_EQ(img.at(1, 0)[1], 1);
  EXPECT_EQ(img.at(2, 0)[2], 2);

  const auto scatter = oracle::merge_by_scatter(x, 3, 1, 3, false);
  for (std::size_t i = 0; i < scatter.size(); ++i) EXPECT_DOUBLE_EQ(img.data()[i], scatter[i]);
}

TEST(MergeCandidatesTest, MatchesScatterOracleOnRandomRows) {
  Rng rng(99);
  for (int m : {1, 3, 5}) {
    for (bool pos : {false, true}) {
      for (auto [w, h] : {std::pair{7, 5}, std::pair{1, 6}, std::pair{2, 2}, std::pair{9, 1}}) {
        const PatchLayout layout{m, pos};
        RowMatrix x(static_cast<std::size_t>(w) * h, layout.dimension());
        for (auto& v : x.data()) v = rng.uniform() * 255.0;
        const ImageBuffer img = merge_candidates(x, w, h, layout);
        const auto scatter = oracle::merge_by_scatter(x, w, h, m, pos);
        for (std::size_t i = 0; i < scatter.size(); ++i) {
          ASSERT_NEAR(img.data()[i], scatter[i], 1e-9) << "m=" << m << " " << w << "x" << h;
        }
      }
    }
  }
}

TEST(MergeCandidatesTest, ExtractThenMergeReproducesImage) {
  for (int m : {1, 3, 5, 7}) {
    for (bool pos : {false, true}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const ImageBuffer img = fixtures::random_image(9 + static_cast<int>(seed), 4, seed);
        const RowMatrix x = extract_patches(img, {m, pos}, 0.7);
        EXPECT_EQ(merge_candidates(x, img.width(), img.height(), {m, pos}), img) << "m=" << m;
      }
    }
  }
}

TEST(MergeCandidatesTest, RejectsShapeMismatch) {
  RowMatrix x(6, 27);
  EXPECT_THROW(merge_candidates(x, 3, 3, {3, false}), std::invalid_argument);
  EXPECT_THROW(merge_candidates(x, 3, 2, {3, true}), std::invalid_argument);
  EXPECT_THROW(merge_candidates(x, 3, 2, {2, false}), std::invalid_argument);
}

}  // namespace
}  // namespace inwdt
