#pragma once

#include "inwdt/image.hpp"

namespace inwdt {

// 10 log10(255^2 / MSE), MSE taken jointly over all three channels.
// Identical images give +infinity. Throws std::invalid_argument on a size
// mismatch.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

// Mean SSIM on BT.601 luma (0.299, 0.587, 0.114) with an 11x11 Gaussian
// window (sigma 1.5), C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2, averaged over
// the windows that fit entirely inside the image. Throws
// std::invalid_argument on a size mismatch or an image smaller than the
// window.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

// BT.601 luma plane, row-major.
std::vector<double> luma(const ImageBuffer& img);

}  // namespace inwdt
