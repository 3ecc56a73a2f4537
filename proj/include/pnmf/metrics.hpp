// metrics.hpp - evaluation quantities: spectral angle distance, abundance
// RMSE, per-map PSNR, reconstruction error, and the optimal
// estimated-to-truth endmember assignment they are computed under.
//
// Angles are radians in the API; the CLI converts to degrees for tables.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pnmf/types.hpp"

namespace pnmf {

inline constexpr double kPi = 3.14159265358979323846;
inline double rad_to_deg(double radians) { return radians * 180.0 / kPi; }

// Angle between two spectra; scale-invariant, in [0, pi]. The cosine is
// clamped so nearly collinear vectors cannot produce NaN.
inline double sad(const Vector& e, const Vector& e_hat) {
  if (e.size() != e_hat.size()) throw std::invalid_argument("sad: length mismatch");
  const double ne = e.norm(), nh = e_hat.norm();
  if (ne == 0.0 || nh == 0.0) throw std::invalid_argument("sad: zero-norm vector");
  const double c = std::clamp(e.dot(e_hat) / (ne * nh), -1.0, 1.0);
  return std::acos(c);
}

// est index -> truth index, a bijection on {0..P-1}.
struct Alignment {
  std::vector<int> perm;
  std::vector<double> per_pair_sad;  // angle of (est i, truth perm[i])

  double total_sad() const {
    double s = 0.0;
    for (double v : per_pair_sad) s += v;
    return s;
  }
};

// One-to-one assignment minimizing total SAD, found exactly by dynamic
// programming over subsets of truth columns (P is small).
inline Alignment align(const EndmemberMatrix& est, const EndmemberMatrix& truth) {
  if (est.count() != truth.count() || est.bands() != truth.bands())
    throw std::invalid_argument("align: dimension mismatch");
  const int p = est.count();
  if (p > 20) throw std::invalid_argument("align: endmember count too large for exact assignment");

  Matrix cost(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) cost(i, j) = sad(est.data.col(i), truth.data.col(j));

  const int full = 1 << p;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(full, inf);
  std::vector<int> choice(full, -1);
  best[0] = 0.0;
  for (int mask = 0; mask < full; ++mask) {
    if (best[mask] == inf) continue;
    const int i = __builtin_popcount(static_cast<unsigned>(mask));  // next est row to place
    if (i == p) continue;
    for (int j = 0; j < p; ++j) {
      if (mask & (1 << j)) continue;
      const int next = mask | (1 << j);
      const double c = best[mask] + cost(i, j);
      if (c < best[next]) {
        best[next] = c;
        choice[next] = j;
      }
    }
  }

  Alignment out;
  out.perm.assign(p, -1);
  int mask = full - 1;
  for (int i = p - 1; i >= 0; --i) {
    const int j = choice[mask];
    out.perm[i] = j;
    mask ^= 1 << j;
  }
  out.per_pair_sad.resize(p);
  for (int i = 0; i < p; ++i) out.per_pair_sad[i] = cost(i, out.perm[i]);
  return out;
}

inline double mean_sad(const Alignment& alignment) {
  return alignment.total_sad() / static_cast<double>(alignment.per_pair_sad.size());
}

inline double mean_sad(const EndmemberMatrix& est, const EndmemberMatrix& truth) {
  return mean_sad(align(est, truth));
}

// Reorder estimated rows/columns into truth order.
inline AbundanceMatrix apply_alignment(const AbundanceMatrix& est, const Alignment& alignment) {
  if (static_cast<int>(alignment.perm.size()) != est.count())
    throw std::invalid_argument("apply_alignment: size mismatch");
  AbundanceMatrix out = est;
  for (int i = 0; i < est.count(); ++i) out.data.row(alignment.perm[i]) = est.data.row(i);
  return out;
}

inline EndmemberMatrix apply_alignment(const EndmemberMatrix& est, const Alignment& alignment) {
  if (static_cast<int>(alignment.perm.size()) != est.count())
    throw std::invalid_argument("apply_alignment: size mismatch");
  EndmemberMatrix out = est;
  for (int i = 0; i < est.count(); ++i) out.data.col(alignment.perm[i]) = est.data.col(i);
  return out;
}

// RMSE = sqrt( sum_i ||a_i - a_hat_i||^2 / (N*P) ), i.e. per-entry RMSE.
// Rows are assumed already aligned.
inline double rmse(const AbundanceMatrix& est, const AbundanceMatrix& truth) {
  if (est.count() != truth.count() || est.pixels() != truth.pixels())
    throw std::invalid_argument("rmse: dimension mismatch");
  const double n = static_cast<double>(est.data.size());
  return std::sqrt((est.data - truth.data).squaredNorm() / n);
}

// PSNR = 10*log10(MAX^2 / MSE) computed per abundance map with
// MSE = (1/N) sum_j (A(p,j) - Ahat(p,j))^2 and MAX the maximum of the
// truth map, then averaged over maps. An exact match reports +infinity.
inline double psnr(const AbundanceMatrix& est, const AbundanceMatrix& truth) {
  if (est.count() != truth.count() || est.pixels() != truth.pixels())
    throw std::invalid_argument("psnr: dimension mismatch");
  if (truth.pixels() == 0) throw std::invalid_argument("psnr: empty truth");
  double acc = 0.0;
  for (int p = 0; p < est.count(); ++p) {
    const double mse =
        (est.data.row(p) - truth.data.row(p)).squaredNorm() / static_cast<double>(truth.pixels());
    const double peak = truth.data.row(p).maxCoeff();
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    acc += 10.0 * std::log10(peak * peak / mse);
  }
  return acc / static_cast<double>(est.count());
}

enum class ReNormalizer {
  kPerPixelEndmember,  // divide by N*P (the published convention)
  kPerPixelBand,       // divide by N*L (dimension of the summed residuals)
};

// RE = sqrt( sum_j ||r_j - E*a_j||^2 / norm ), norm = N*P by default.
inline double reconstruction_error(const SpectralCube& cube, const EndmemberMatrix& e,
                                   const AbundanceMatrix& a,
                                   ReNormalizer norm = ReNormalizer::kPerPixelEndmember) {
  if (e.bands() != cube.bands() || e.count() != a.count() || a.pixels() != cube.pixels())
    throw std::invalid_argument("reconstruction_error: dimension mismatch");
  const double ss = (cube.data - e.data * a.data).squaredNorm();
  const double denom = norm == ReNormalizer::kPerPixelEndmember
                           ? static_cast<double>(cube.pixels()) * a.count()
                           : static_cast<double>(cube.pixels()) * cube.bands();
  return std::sqrt(ss / denom);
}

}  // namespace pnmf
