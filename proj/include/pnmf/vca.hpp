// vca.hpp - vertex component analysis endmember extraction.
//
// Estimates the data SNR, picks a subspace representation accordingly
// (projective projection when SNR is high, shifted PCA otherwise), then
// repeatedly projects the data onto directions orthogonal to the simplex
// spanned so far and grabs the extreme pixel.
#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pnmf/rng.hpp"
#include "pnmf/types.hpp"

namespace pnmf {

struct VcaResult {
  EndmemberMatrix endmembers;
  std::vector<int> indices;     // pixel index chosen for each endmember
  double snr_estimate_db = 0.0; // +inf when the residual power vanishes
  bool used_projective = false; // true: projective projection, false: PCA+shift
};

namespace detail {

// Top-d eigenvectors (descending eigenvalue) of a symmetric matrix.
inline Matrix top_eigenvectors(const Matrix& sym, int d) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("vca: eigendecomposition failed");
  const int n = static_cast<int>(sym.rows());
  Matrix u(n, d);
  for (int k = 0; k < d; ++k) u.col(k) = es.eigenvectors().col(n - 1 - k);
  return u;
}

// argmax_j |v(j)|, ties resolved toward the lowest index.
inline int argmax_abs(const Eigen::RowVectorXd& v) {
  int best = 0;
  double best_val = std::abs(v(0));
  for (int j = 1; j < v.size(); ++j) {
    const double val = std::abs(v(j));
    if (val > best_val) {
      best_val = val;
      best = j;
    }
  }
  return best;
}

}  // namespace detail

inline VcaResult vca(const SpectralCube& cube, int p, std::uint64_t seed) {
  const int bands = cube.bands();
  const int n = cube.pixels();
  if (p < 1) throw std::invalid_argument("vca: p must be >= 1");
  if (p > bands || p > n) throw std::invalid_argument("vca: p exceeds data dimensions");
  if (!all_finite(cube.data)) throw std::invalid_argument("vca: non-finite input");

  const Matrix& r = cube.data;
  VcaResult result;

  // p = 1: the extreme pixel along the first principal direction.
  if (p == 1) {
    const Matrix corr = (r * r.transpose()) / static_cast<double>(n);
    const Matrix u1 = detail::top_eigenvectors(corr, 1);
    const Eigen::RowVectorXd proj = u1.transpose() * r;
    const int k = detail::argmax_abs(proj);
    result.endmembers.data = r.col(k).cwiseMax(0.0);
    result.indices = {k};
    result.snr_estimate_db = std::numeric_limits<double>::infinity();
    result.used_projective = true;
    result.endmembers.validate();
    return result;
  }

  // SNR estimate from the energy captured by the p-dim PCA subspace.
  const Vector mean = r.rowwise().mean();
  const Matrix r0 = r.colwise() - mean;
  const Matrix cov = (r0 * r0.transpose()) / static_cast<double>(n);
  const Matrix ud_p = detail::top_eigenvectors(cov, p);
  const Matrix xp = ud_p.transpose() * r0;
  const double power_y = r.squaredNorm() / static_cast<double>(n);
  const double power_x = xp.squaredNorm() / static_cast<double>(n) + mean.squaredNorm();
  const double num = power_x - (static_cast<double>(p) / bands) * power_y;
  const double den = power_y - power_x;
  if (den <= 0.0 || num <= 0.0) {
    result.snr_estimate_db = (den <= 0.0) ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
  } else {
    result.snr_estimate_db = 10.0 * std::log10(num / den);
  }
  const double snr_threshold = 15.0 + 10.0 * std::log10(static_cast<double>(p));
  result.used_projective = result.snr_estimate_db > snr_threshold;

  // Build the p x n working matrix y and remember how to map back to spectra.
  Matrix y(p, n);
  Matrix ud;       // bands x d basis
  Matrix x_small;  // d x n coordinates
  if (result.used_projective) {
    const Matrix corr = (r * r.transpose()) / static_cast<double>(n);
    ud = detail::top_eigenvectors(corr, p);
    x_small = ud.transpose() * r;
    const Vector u = x_small.rowwise().mean();
    for (int j = 0; j < n; ++j) {
      double denom = x_small.col(j).dot(u);
      if (std::abs(denom) < 1e-12) denom = (denom < 0.0) ? -1e-12 : 1e-12;
      y.col(j) = x_small.col(j) / denom;
    }
  } else {
    ud = detail::top_eigenvectors(cov, p - 1);
    x_small = ud.transpose() * r0;
    double c = 0.0;
    for (int j = 0; j < n; ++j) c = std::max(c, x_small.col(j).norm());
    y.topRows(p - 1) = x_small;
    y.row(p - 1).setConstant(c);
  }

  // Iterative vertex hunt: direction orthogonal to the simplex found so far.
  Rng rng(seed);
  Matrix a = Matrix::Zero(p, p);
  a(p - 1, 0) = 1.0;
  result.indices.assign(p, 0);
  for (int i = 0; i < p; ++i) {
    Vector f(p);
    for (int attempt = 0; attempt < 100; ++attempt) {
      Vector w(p);
      for (int k = 0; k < p; ++k) w(k) = rng.normal();
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
      f = w - a * (cod.pseudoInverse() * w);
      const double nf = f.norm();
      if (nf > 1e-12) {
        f /= nf;
        break;
      }
      if (attempt == 99) throw std::runtime_error("vca: failed to draw orthogonal direction");
    }
    const Eigen::RowVectorXd v = f.transpose() * y;
    const int k = detail::argmax_abs(v);
    result.indices[i] = k;
    a.col(i) = y.col(k);
  }

  // Map the chosen pixels back to full-band spectra.
  Matrix e(bands, p);
  for (int i = 0; i < p; ++i) {
    const int k = result.indices[i];
    if (result.used_projective) {
      e.col(i) = ud * x_small.col(k);
    } else {
      e.col(i) = ud * x_small.col(k) + mean;
    }
  }
  // Multiplicative refinement needs ENC; clip the projection residue.
  result.endmembers.data = e.cwiseMax(0.0);
  result.endmembers.validate();
  return result;
}

}  // namespace pnmf
