// filters.hpp - small 2D image filtering primitives shared by the scene
// synthesizer and the denoisers. Boundary handling is reflective
// (half-sample symmetric: ... b a | a b c | c b ...) throughout.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pnmf/types.hpp"

namespace pnmf {

inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

// Normalized 1D Gaussian taps, truncated at 3 sigma.
inline std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_taps: sigma must be > 0");
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * (k / sigma) * (k / sigma));
    taps[k + radius] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

// Separable convolution with the given 1D taps (odd length), reflective
// boundary.
inline Matrix convolve_separable(const Matrix& img, const std::vector<double>& taps) {
  const int rows = static_cast<int>(img.rows());
  const int cols = static_cast<int>(img.cols());
  const int radius = static_cast<int>(taps.size()) / 2;
  Matrix tmp(rows, cols), out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps[k + radius] * img(i, reflect_index(j + k, cols));
      tmp(i, j) = acc;
    }
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += taps[k + radius] * tmp(reflect_index(i + k, rows), j);
      out(i, j) = acc;
    }
  return out;
}

inline Matrix gaussian_blur(const Matrix& img, double sigma) {
  return convolve_separable(img, gaussian_taps(sigma));
}

// Reflective padding by `margin` pixels on every side.
inline Matrix pad_reflect(const Matrix& img, int margin) {
  const int rows = static_cast<int>(img.rows());
  const int cols = static_cast<int>(img.cols());
  Matrix out(rows + 2 * margin, cols + 2 * margin);
  for (int i = 0; i < rows + 2 * margin; ++i)
    for (int j = 0; j < cols + 2 * margin; ++j)
      out(i, j) = img(reflect_index(i - margin, rows), reflect_index(j - margin, cols));
  return out;
}

}  // namespace pnmf
