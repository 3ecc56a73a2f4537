// fcls.hpp - fully constrained least squares abundance estimation.
//
// Per pixel r, solves  min_a || [r; d] - [E; d*1^T] a ||^2  s.t. a >= 0
// with an exact Lawson-Hanson active-set NNLS, so ANC holds exactly and
// the column sums approach 1 as the augmentation weight d grows.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pnmf/types.hpp"

namespace pnmf {

// Lawson-Hanson NNLS: argmin_x ||M x - b||_2 s.t. x >= 0.
// Works on the normal equations (gram = M^T M, rhs = M^T b); entries not
// in the passive set are exactly zero on return.
inline Vector nnls(const Matrix& m, const Vector& b) {
  if (m.rows() != b.size()) throw std::invalid_argument("nnls: dimension mismatch");
  if (!m.allFinite() || !b.allFinite()) throw std::invalid_argument("nnls: non-finite input");
  const int n = static_cast<int>(m.cols());
  const Matrix gram = m.transpose() * m;
  const Vector rhs = m.transpose() * b;

  Vector x = Vector::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, rhs.cwiseAbs().maxCoeff());
  const int max_outer = 3 * n + 10;

  auto solve_passive = [&](const std::vector<bool>& in) {
    int k = 0;
    for (int j = 0; j < n; ++j) k += in[j] ? 1 : 0;
    Matrix g(k, k);
    Vector f(k);
    std::vector<int> idx;
    idx.reserve(k);
    for (int j = 0; j < n; ++j)
      if (in[j]) idx.push_back(j);
    for (int a = 0; a < k; ++a) {
      f(a) = rhs(idx[a]);
      for (int c = 0; c < k; ++c) g(a, c) = gram(idx[a], idx[c]);
    }
    Vector z = Vector::Zero(n);
    const Vector sol = g.ldlt().solve(f);
    for (int a = 0; a < k; ++a) z(idx[a]) = sol(a);
    return z;
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    const Vector w = rhs - gram * x;
    int best = -1;
    double best_w = tol;
    for (int j = 0; j < n; ++j)
      if (!passive[j] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;  // KKT satisfied
    passive[best] = true;

    Vector z = solve_passive(passive);
    int inner_guard = 0;
    while (true) {
      double min_z = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j)
        if (passive[j]) min_z = std::min(min_z, z(j));
      if (min_z > 0.0) break;
      // step toward z until the first passive coordinate hits zero
      double alpha = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      for (int j = 0; j < n; ++j)
        if (passive[j]) x(j) += alpha * (z(j) - x(j));
      for (int j = 0; j < n; ++j)
        if (passive[j] && x(j) <= 1e-14) {
          x(j) = 0.0;
          passive[j] = false;
        }
      z = solve_passive(passive);
      if (++inner_guard > n + 2) break;
    }
    for (int j = 0; j < n; ++j) x(j) = passive[j] ? z(j) : 0.0;
  }
  return x;
}

// FCLS over a whole cube; delta weights the sum-to-one row.
inline AbundanceMatrix fcls(const SpectralCube& cube, const EndmemberMatrix& e, double delta) {
  if (e.bands() != cube.bands()) throw std::invalid_argument("fcls: band count mismatch");
  if (e.count() < 1) throw std::invalid_argument("fcls: need at least one endmember");
  if (!(delta > 0.0)) throw std::invalid_argument("fcls: delta must be > 0");
  if (!all_finite(cube.data) || !all_finite(e.data))
    throw std::invalid_argument("fcls: non-finite input");

  const int bands = cube.bands();
  const int p = e.count();
  Matrix m(bands + 1, p);
  m.topRows(bands) = e.data;
  m.row(bands).setConstant(delta);

  AbundanceMatrix a;
  a.data.resize(p, cube.pixels());
  Vector b(bands + 1);
  b(bands) = delta;
  for (int j = 0; j < cube.pixels(); ++j) {
    b.head(bands) = cube.data.col(j);
    a.data.col(j) = nnls(m, b);
  }
  return a;
}

}  // namespace pnmf
