// synth.hpp - synthetic linear-mixture scenes: spatially smooth abundance
// fields (smoothed Gaussian random fields pushed through a softmax), a
// small built-in endmember library, and Gaussian noise injection at a
// target SNR.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pnmf/filters.hpp"
#include "pnmf/rng.hpp"
#include "pnmf/types.hpp"

namespace pnmf {

struct SynthConfig {
  int rows = 64;
  int cols = 64;
  int p = 4;                        // endmember count
  double smoothness = 2.0;          // Gaussian-kernel std in pixels
  double pure_pixel_fraction = 0.05;  // fraction of pixels snapped to pure
  std::uint64_t seed = 0;
  std::optional<double> snr_db;     // absent = noiseless

  void validate() const {
    if (rows < 1 || cols < 1) throw std::invalid_argument("synth: rows/cols must be >= 1");
    if (p < 2) throw std::invalid_argument("synth: need at least 2 endmembers");
    if (!(smoothness > 0.0)) throw std::invalid_argument("synth: smoothness must be > 0");
    if (pure_pixel_fraction < 0.0 || pure_pixel_fraction > 1.0)
      throw std::invalid_argument("synth: pure_pixel_fraction must be in [0, 1]");
  }
};

// Smooth simplex-valued abundance fields. One Gaussian random field per
// endmember is smoothed, re-standardized (smoothing shrinks the variance,
// which would flatten the softmax), and the per-pixel field values go
// through a temperature-1 softmax, so ANC/ASC hold exactly. The
// ceil(fraction*N) pixels with the largest max abundance are then snapped
// to the corresponding unit vector so the scene contains pure pixels.
inline AbundanceMatrix generate_abundances(const SynthConfig& cfg) {
  cfg.validate();
  const int n = cfg.rows * cfg.cols;
  Rng rng(cfg.seed);

  std::vector<Matrix> fields;
  fields.reserve(cfg.p);
  for (int p = 0; p < cfg.p; ++p) {
    Matrix f(cfg.rows, cfg.cols);
    for (int i = 0; i < cfg.rows; ++i)
      for (int j = 0; j < cfg.cols; ++j) f(i, j) = rng.normal();
    f = gaussian_blur(f, cfg.smoothness);
    const double mean = f.mean();
    const double sd = std::sqrt((f.array() - mean).square().sum() / f.size());
    if (sd > 1e-12)
      f = (f.array() - mean) / sd;
    else
      f.array() -= mean;
    fields.push_back(std::move(f));
  }

  AbundanceMatrix a;
  a.simplex = true;
  a.data.resize(cfg.p, n);
  for (int i = 0; i < cfg.rows; ++i)
    for (int j = 0; j < cfg.cols; ++j) {
      const int pix = i * cfg.cols + j;
      double mx = -std::numeric_limits<double>::infinity();
      for (int p = 0; p < cfg.p; ++p) mx = std::max(mx, fields[p](i, j));
      double sum = 0.0;
      for (int p = 0; p < cfg.p; ++p) {
        const double e = std::exp(fields[p](i, j) - mx);
        a.data(p, pix) = e;
        sum += e;
      }
      a.data.col(pix) /= sum;
    }

  const int n_pure = static_cast<int>(std::ceil(cfg.pure_pixel_fraction * n));
  if (n_pure > 0) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> peak(n);
    for (int j = 0; j < n; ++j) peak[j] = a.data.col(j).maxCoeff();
    std::partial_sort(order.begin(), order.begin() + std::min(n_pure, n), order.end(),
                      [&](int l, int r) { return peak[l] != peak[r] ? peak[l] > peak[r] : l < r; });
    for (int k = 0; k < std::min(n_pure, n); ++k) {
      const int j = order[k];
      Eigen::Index winner;
      a.data.col(j).maxCoeff(&winner);
      a.data.col(j).setZero();
      a.data(winner, j) = 1.0;
    }
  }
  return a;
}

// R = E*A, the noiseless linear mixture.
inline SpectralCube mix(const EndmemberMatrix& e, const AbundanceMatrix& a, int rows, int cols) {
  if (e.count() != a.count()) throw std::invalid_argument("mix: endmember count mismatch");
  if (a.pixels() != rows * cols) throw std::invalid_argument("mix: pixel count != rows*cols");
  SpectralCube cube;
  cube.rows = rows;
  cube.cols = cols;
  cube.data = e.data * a.data;
  return cube;
}

// Adds i.i.d. zero-mean Gaussian noise with variance chosen so that
// 10*log10(||R||_F^2 / ||N||_F^2) targets snr_db. The signal power
// convention is total power ||R||_F^2 / (L*N). +infinity means noiseless.
inline SpectralCube add_noise(const SpectralCube& cube, double snr_db, std::uint64_t seed) {
  if (cube.data.size() == 0) throw std::invalid_argument("add_noise: empty cube");
  if (std::isinf(snr_db) && snr_db > 0) return cube;
  const double signal_power = cube.data.squaredNorm() / static_cast<double>(cube.data.size());
  const double sigma = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
  SpectralCube out = cube;
  out.allow_negative = true;
  Rng rng(seed);
  for (int j = 0; j < out.pixels(); ++j)
    for (int b = 0; b < out.bands(); ++b) out.data(b, j) += sigma * rng.normal();
  return out;
}

// Built-in 4-spectrum library: smooth sums of 2-3 Gaussian bumps over
// `bands` samples, values in [0, 1]. Keeps the synthesis and benchmark
// paths self-contained (no downloaded spectra). `count` selects the first
// 1..4 spectra.
inline EndmemberMatrix toy_endmembers(int bands = 224, int count = 4) {
  if (bands < 2) throw std::invalid_argument("toy_endmembers: bands must be >= 2");
  if (count < 1 || count > 4)
    throw std::invalid_argument("toy_endmembers: builtin library has 4 spectra; supply a CSV for more");
  struct Bump {
    double amp, center, width;  // center/width as fractions of the band axis
  };
  const std::vector<std::vector<Bump>> shapes = {
      {{0.55, 0.25, 0.10}, {0.35, 0.70, 0.18}},
      {{0.75, 0.12, 0.07}, {0.45, 0.55, 0.13}},
      {{0.80, 0.88, 0.12}, {0.30, 0.35, 0.20}},
      {{0.50, 0.45, 0.06}, {0.45, 0.75, 0.08}, {0.20, 0.10, 0.10}},
  };
  const std::vector<double> base = {0.15, 0.08, 0.05, 0.12};
  EndmemberMatrix e;
  e.data.resize(bands, static_cast<Eigen::Index>(shapes.size()));
  for (std::size_t s = 0; s < shapes.size(); ++s)
    for (int b = 0; b < bands; ++b) {
      const double x = static_cast<double>(b) / (bands - 1);
      double v = base[s];
      for (const Bump& g : shapes[s])
        v += g.amp * std::exp(-0.5 * std::pow((x - g.center) / g.width, 2));
      e.data(b, static_cast<Eigen::Index>(s)) = std::min(v, 1.0);
    }
  e.data = Matrix(e.data.leftCols(count));
  return e;
}

}  // namespace pnmf
