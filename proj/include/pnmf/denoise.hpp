// denoise.hpp - pluggable 2D denoisers applied band-wise to abundance maps.
//
// Every kind is deterministic (no RNG) and shape-preserving; sigma = 0 is an
// exact identity for all kinds. Boundaries are handled by reflective padding.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnmf/filters.hpp"
#include "pnmf/types.hpp"

namespace pnmf {

enum class DenoiserKind { kIdentity, kGaussian, kMedian, kNlm, kTv };

inline DenoiserKind parse_denoiser_kind(const std::string& name) {
  if (name == "none" || name == "identity") return DenoiserKind::kIdentity;
  if (name == "gaussian") return DenoiserKind::kGaussian;
  if (name == "median") return DenoiserKind::kMedian;
  if (name == "nlm") return DenoiserKind::kNlm;
  if (name == "tv") return DenoiserKind::kTv;
  throw std::invalid_argument("unknown denoiser kind: " + name);
}

inline std::string to_string(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::kIdentity: return "none";
    case DenoiserKind::kGaussian: return "gaussian";
    case DenoiserKind::kMedian: return "median";
    case DenoiserKind::kNlm: return "nlm";
    case DenoiserKind::kTv: return "tv";
  }
  throw std::logic_error("unreachable denoiser kind");
}

// Denoiser choice plus kind-specific knobs; every knob has a sigma-tied
// default so {kind, sigma} alone is a complete configuration.
struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::kIdentity;
  std::map<std::string, double> params;

  double param(const std::string& name, double fallback) const {
    const auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
  }

  void validate() const {
    static const std::map<DenoiserKind, std::vector<std::string>> allowed = {
        {DenoiserKind::kIdentity, {}},
        {DenoiserKind::kGaussian, {"c_g"}},
        {DenoiserKind::kMedian, {"window"}},
        {DenoiserKind::kNlm, {"patch", "search", "c_h"}},
        {DenoiserKind::kTv, {"c_tv", "iters"}},
    };
    const auto& keys = allowed.at(kind);
    for (const auto& [key, value] : params) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw std::invalid_argument("denoiser '" + to_string(kind) + "': unknown param '" + key + "'");
      if (!std::isfinite(value))
        throw std::invalid_argument("denoiser param '" + key + "' must be finite");
    }
    auto integer_ge = [&](const std::string& key, double fallback, double lo) {
      const double v = param(key, fallback);
      if (v < lo || v != std::floor(v))
        throw std::invalid_argument("denoiser param '" + key + "' must be an integer >= " +
                                    std::to_string(static_cast<long long>(lo)));
      return v;
    };
    switch (kind) {
      case DenoiserKind::kIdentity:
        break;
      case DenoiserKind::kGaussian:
        if (!(param("c_g", 5.0) > 0.0)) throw std::invalid_argument("denoiser param 'c_g' must be > 0");
        break;
      case DenoiserKind::kMedian: {
        const double w = integer_ge("window", 3.0, 1.0);
        if (static_cast<long long>(w) % 2 == 0)
          throw std::invalid_argument("denoiser param 'window' must be odd");
        break;
      }
      case DenoiserKind::kNlm: {
        const double f = integer_ge("patch", 3.0, 1.0);
        if (static_cast<long long>(f) % 2 == 0)
          throw std::invalid_argument("denoiser param 'patch' must be odd");
        integer_ge("search", 10.0, 1.0);
        if (!(param("c_h", 0.55) > 0.0)) throw std::invalid_argument("denoiser param 'c_h' must be > 0");
        break;
      }
      case DenoiserKind::kTv:
        if (param("c_tv", 1.0) < 0.0) throw std::invalid_argument("denoiser param 'c_tv' must be >= 0");
        integer_ge("iters", 50.0, 1.0);
        break;
    }
  }
};

struct DenoiseRequest {
  MapStack maps;
  double sigma = 0.0;

  void validate() const {
    if (maps.count() < 1) throw std::invalid_argument("denoise: empty map stack");
    if (maps.rows < 1 || maps.cols < 1) throw std::invalid_argument("denoise: degenerate map dims");
    for (const Matrix& m : maps.maps) {
      if (m.rows() != maps.rows || m.cols() != maps.cols)
        throw std::invalid_argument("denoise: inconsistent map shape");
      if (!all_finite(m)) throw std::invalid_argument("denoise: non-finite map entries");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("denoise: sigma must be finite and >= 0");
  }
};

// Gaussian blur with kernel std s = max(0.5, c_g * sigma * rows/64);
// the rows/64 factor keeps the blur footprint proportional on larger scenes.
inline Matrix gaussian_denoise(const Matrix& map, double sigma, double c_g = 5.0) {
  if (sigma <= 0.0) return map;
  const double rows_scale = static_cast<double>(map.rows()) / 64.0;
  const double s = std::max(0.5, c_g * sigma * rows_scale);
  return gaussian_blur(map, s);
}

inline Matrix median_denoise(const Matrix& map, int window = 3) {
  if (window <= 1) return map;
  const int half = window / 2;
  const Matrix padded = pad_reflect(map, half);
  Matrix out(map.rows(), map.cols());
  std::vector<double> vals;
  vals.resize(static_cast<size_t>(window) * window);
  for (int i = 0; i < map.rows(); ++i)
    for (int j = 0; j < map.cols(); ++j) {
      size_t k = 0;
      for (int a = 0; a < window; ++a)
        for (int b = 0; b < window; ++b) vals[k++] = padded(i + a, j + b);
      const auto mid = vals.begin() + vals.size() / 2;
      std::nth_element(vals.begin(), mid, vals.end());
      out(i, j) = *mid;
    }
  return out;
}

// Non-local means: weighted average over a (2*search+1)^2 window with
// patch-similarity weights w = exp(-max(d2 - 2*sigma^2, 0)/h^2), d2 the mean
// squared difference of patch x patch blocks, h = c_h * sigma; the center
// pixel gets the maximum weight seen among its neighbors.
inline Matrix nlm_denoise(const Matrix& map, double sigma, int patch = 3, int search = 10,
                          double c_h = 0.55) {
  if (sigma <= 0.0) return map;
  const int rows = static_cast<int>(map.rows());
  const int cols = static_cast<int>(map.cols());
  const int fh = patch / 2;
  const int pad = search + fh;
  const Matrix up = pad_reflect(map, pad);

  const double h = c_h * sigma;
  const double h2 = h * h;
  const double two_sig2 = 2.0 * sigma * sigma;
  const double inv_patch_area = 1.0 / (static_cast<double>(patch) * patch);

  Matrix num = Matrix::Zero(rows, cols);
  Matrix den = Matrix::Zero(rows, cols);
  Matrix max_w = Matrix::Zero(rows, cols);

  // Per offset: squared-difference plane, box-summed over the patch window.
  const int drows = rows + 2 * fh;
  const int dcols = cols + 2 * fh;
  Matrix diff(drows, dcols);
  Matrix row_sum(drows, cols);
  for (int dy = -search; dy <= search; ++dy) {
    for (int dx = -search; dx <= search; ++dx) {
      if (dy == 0 && dx == 0) continue;
      // diff(i,j) indexes padded coords shifted by `search`
      for (int j = 0; j < dcols; ++j)
        for (int i = 0; i < drows; ++i) {
          const double d = up(i + search, j + search) - up(i + search + dy, j + search + dx);
          diff(i, j) = d * d;
        }
      for (int j = 0; j < cols; ++j)
        for (int i = 0; i < drows; ++i) {
          double s = 0.0;
          for (int b = 0; b < patch; ++b) s += diff(i, j + b);
          row_sum(i, j) = s;
        }
      for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
          double s = 0.0;
          for (int a = 0; a < patch; ++a) s += row_sum(i + a, j);
          const double d2 = s * inv_patch_area;
          const double arg = -std::max(d2 - two_sig2, 0.0) / h2;
          const double w = (arg <= -30.0) ? 0.0 : std::exp(arg);
          if (w > 0.0) {
            num(i, j) += w * up(i + pad + dy, j + pad + dx);
            den(i, j) += w;
            if (w > max_w(i, j)) max_w(i, j) = w;
          }
        }
    }
  }
  Matrix out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double w_self = max_w(i, j) > 0.0 ? max_w(i, j) : 1.0;
      out(i, j) = (num(i, j) + w_self * map(i, j)) / (den(i, j) + w_self);
    }
  return out;
}

// Isotropic ROF via Chambolle's dual projection:
//   min_x 1/2 ||x - y||^2 + w TV(x),  x = y - w div p,
//   p <- (p + tau grad(div p - y/w)) / (1 + tau |grad(div p - y/w)|).
inline Matrix tv_denoise(const Matrix& y, double w, int iters = 50) {
  if (w <= 0.0 || iters <= 0) return y;
  const int rows = static_cast<int>(y.rows());
  const int cols = static_cast<int>(y.cols());
  const double tau = 0.25;

  Matrix px = Matrix::Zero(rows, cols);
  Matrix py = Matrix::Zero(rows, cols);
  Matrix div_p = Matrix::Zero(rows, cols);
  auto divergence = [&]() {
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) {
        double d = 0.0;
        if (j == 0)
          d += px(i, 0);
        else if (j == cols - 1)
          d += -px(i, cols - 2);
        else
          d += px(i, j) - px(i, j - 1);
        if (i == 0)
          d += py(0, j);
        else if (i == rows - 1)
          d += -py(rows - 2, j);
        else
          d += py(i, j) - py(i - 1, j);
        div_p(i, j) = d;
      }
  };

  for (int it = 0; it < iters; ++it) {
    divergence();
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) {
        const double g = div_p(i, j) - y(i, j) / w;
        const double gx = (j + 1 < cols) ? (div_p(i, j + 1) - y(i, j + 1) / w) - g : 0.0;
        const double gy = (i + 1 < rows) ? (div_p(i + 1, j) - y(i + 1, j) / w) - g : 0.0;
        const double mag = std::sqrt(gx * gx + gy * gy);
        px(i, j) = (px(i, j) + tau * gx) / (1.0 + tau * mag);
        py(i, j) = (py(i, j) + tau * gy) / (1.0 + tau * mag);
      }
  }
  divergence();
  return y - w * div_p;
}

inline MapStack denoise(const DenoiserSpec& spec, const DenoiseRequest& request) {
  spec.validate();
  request.validate();
  if (request.sigma == 0.0 || spec.kind == DenoiserKind::kIdentity) return request.maps;

  MapStack out;
  out.rows = request.maps.rows;
  out.cols = request.maps.cols;
  out.maps.reserve(request.maps.maps.size());
  for (const Matrix& m : request.maps.maps) {
    switch (spec.kind) {
      case DenoiserKind::kIdentity:
        out.maps.push_back(m);
        break;
      case DenoiserKind::kGaussian:
        out.maps.push_back(gaussian_denoise(m, request.sigma, spec.param("c_g", 5.0)));
        break;
      case DenoiserKind::kMedian:
        out.maps.push_back(median_denoise(m, static_cast<int>(spec.param("window", 3.0))));
        break;
      case DenoiserKind::kNlm:
        out.maps.push_back(nlm_denoise(m, request.sigma, static_cast<int>(spec.param("patch", 3.0)),
                                       static_cast<int>(spec.param("search", 10.0)),
                                       spec.param("c_h", 0.55)));
        break;
      case DenoiserKind::kTv:
        out.maps.push_back(tv_denoise(m, spec.param("c_tv", 1.0) * request.sigma,
                                      static_cast<int>(spec.param("iters", 50.0))));
        break;
    }
  }
  return out;
}

}  // namespace pnmf
