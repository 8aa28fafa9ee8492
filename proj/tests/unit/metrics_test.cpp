#include "inwdt/metrics.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace inwdt {
namespace {

TEST(PsnrTest, IdenticalImagesAreInfinite) {
  const ImageBuffer a = fixtures::random_image(5, 5, 1);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_GT(psnr(a, a), 0.0);
}

TEST(PsnrTest, KnownValue) {
  // Every sample off by 1: MSE = 1, PSNR = 20 log10(255).
  const ImageBuffer a = ImageBuffer::filled(4, 3, {10, 20, 30});
  const ImageBuffer b = ImageBuffer::filled(4, 3, {11, 19, 31});
  EXPECT_NEAR(psnr(a, b), 20.0 * std::log10(255.0), 1e-12);
  // One channel of one pixel off by 255 in a 1x1 image: MSE = 255^2 / 3.
  EXPECT_NEAR(psnr(ImageBuffer(1, 1, {0, 0, 0}), ImageBuffer(1, 1, {255, 0, 0})), 10 * std::log10(3.0), 1e-12);
}

TEST(PsnrTest, MatchesOracleAndIsSymmetric) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ImageBuffer a = fixtures::synthetic_scene(23, 17, seed);
    const ImageBuffer b = fixtures::affine_recolour(a, 0.9, 7.0 + static_cast<double>(seed));
    EXPECT_NEAR(psnr(a, b), oracle::psnr(a, b), 1e-9);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
  }
}

TEST(PsnrTest, RejectsSizeMismatch) {
  EXPECT_THROW(psnr(fixtures::random_image(3, 3, 1), fixtures::random_image(3, 4, 1)), std::invalid_argument);
}

TEST(SsimTest, SelfSimilarityIsExactlyOne) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ImageBuffer a = fixtures::random_image(11 + static_cast<int>(seed), 14, seed);
    EXPECT_EQ(ssim(a, a), 1.0);
  }
  const ImageBuffer flat = ImageBuffer::filled(12, 12, {0, 0, 0});
  EXPECT_EQ(ssim(flat, flat), 1.0);
}

TEST(SsimTest, MatchesDirectWindowOracle) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ImageBuffer a = fixtures::synthetic_scene(30, 22, seed);
    const ImageBuffer b = seed % 2 ? fixtures::random_image(30, 22, seed) : fixtures::affine_recolour(a, 1.1, -5.0);
    EXPECT_NEAR(ssim(a, b), oracle::ssim(a, b), 1e-9);
  }
}

TEST(SsimTest, SmallestImageHasOneWindow) {
  const ImageBuffer a = fixtures::random_image(11, 11, 3);
  const ImageBuffer b = fixtures::random_image(11, 11, 4);
  EXPECT_NEAR(ssim(a, b), oracle::ssim(a, b), 1e-9);
}

TEST(SsimTest, DegradesWithDistortionAndStaysBounded) {
  const ImageBuffer a = fixtures::synthetic_scene(40, 40, 2);
  double prev = 1.0;
  for (double noise : {2.0, 10.0, 40.0}) {
    Rng rng(9);
    std::vector<double> d(a.data().begin(), a.data().end());
    for (auto& v : d) v = std::clamp(v + noise * rng.normal(), 0.0, 255.0);
    const double s = ssim(a, ImageBuffer(40, 40, d));
    EXPECT_LT(s, prev);
    EXPECT_GE(s, -1.0);
    prev = s;
  }
}

TEST(SsimTest, RejectsBadSizes) {
  EXPECT_THROW(ssim(fixtures::random_image(10, 20, 1), fixtures::random_image(10, 20, 2)), std::invalid_argument);
  EXPECT_THROW(ssim(fixtures::random_image(20, 20, 1), fixtures::random_image(20, 21, 2)), std::invalid_argument);
}

TEST(LumaTest, Bt601Weights) {
  const auto y = luma(ImageBuffer(2, 1, {255, 0, 0, 100, 200, 50}));
  EXPECT_DOUBLE_EQ(y[0], 0.299 * 255);
  EXPECT_DOUBLE_EQ(y[1], 0.299 * 100 + 0.587 * 200 + 0.114 * 50);
}

}  // namespace
}  // namespace inwdt
