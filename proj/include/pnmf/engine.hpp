// engine.hpp - alternating multiplicative solver for
//   min 1/2||R-EA||_F^2 + a||A||_{2,1} + l/2||A-At||_F^2 + u*Phi(At)
//   s.t. E,A >= 0, columns of A near the simplex via delta-augmentation,
// with the Phi subproblem replaced by a plug-in denoiser at sigma_n = sqrt(u/l).
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pnmf/denoise.hpp"
#include "pnmf/fcls.hpp"
#include "pnmf/metrics.hpp"
#include "pnmf/types.hpp"
#include "pnmf/vca.hpp"

namespace pnmf {

struct UnmixConfig {
  int p = 0;                   // number of endmembers
  double alpha = 0.1;          // l2,1 row-sparsity weight
  double lambda = 3e4;         // split penalty
  double mu = 500.0;           // prior strength; 0 disables the denoiser step
  double delta = 10.0;         // sum-to-one augmentation weight; 0 disables it
  int max_iters = 300;
  double rel_tol = 1e-5;       // relative objective change threshold
  int rel_tol_patience = 5;    // consecutive iterations below rel_tol to stop
  double eps_guard = 1e-12;
  std::uint64_t seed = 0;      // drives VCA's random directions
  DenoiserSpec denoiser;

  double sigma_n() const { return (mu > 0.0 && lambda > 0.0) ? std::sqrt(mu / lambda) : 0.0; }

  void validate() const {
    auto fin = [](double v) { return std::isfinite(v); };
    if (p < 1) throw std::invalid_argument("config: p must be >= 1");
    if (!fin(alpha) || alpha < 0.0) throw std::invalid_argument("config: alpha must be finite >= 0");
    if (!fin(lambda) || lambda < 0.0) throw std::invalid_argument("config: lambda must be finite >= 0");
    if (!fin(mu) || mu < 0.0) throw std::invalid_argument("config: mu must be finite >= 0");
    if (mu > 0.0 && lambda <= 0.0) throw std::invalid_argument("config: mu > 0 requires lambda > 0");
    if (!fin(delta) || delta < 0.0) throw std::invalid_argument("config: delta must be finite >= 0");
    if (max_iters < 0) throw std::invalid_argument("config: max_iters must be >= 0");
    if (!fin(rel_tol) || rel_tol < 0.0) throw std::invalid_argument("config: rel_tol must be finite >= 0");
    if (rel_tol_patience < 1) throw std::invalid_argument("config: rel_tol_patience must be >= 1");
    if (!(eps_guard > 0.0) || eps_guard > 1e-6)
      throw std::invalid_argument("config: eps_guard must be in (0, 1e-6]");
    denoiser.validate();
  }
};

struct ObjectiveBreakdown {
  double data_fit = 0.0;  // 1/2 ||R - EA||_F^2
  double l21 = 0.0;       // alpha * sum_i ||A_i||_2
  double split = 0.0;     // lambda/2 ||A - At||_F^2
  double total = 0.0;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double data_fit = 0.0;
  double l21 = 0.0;
  double split = 0.0;
  double rmse = std::numeric_limits<double>::quiet_NaN();  // NaN when truth absent
  double seconds = 0.0;  // elapsed wall time since run start
};

struct RunTrace {
  std::vector<IterationRecord> records;
};

struct EngineState {
  EndmemberMatrix e;
  AbundanceMatrix a;
  AbundanceMatrix a_tilde;
  int iter = 0;
  RunTrace trace;
};

// Ground truth for trace-level RMSE; endmembers drive the per-iteration
// alignment, abundances are the RMSE reference.
struct GroundTruth {
  EndmemberMatrix e;
  AbundanceMatrix a;
};

inline ObjectiveBreakdown objective(const Matrix& r, const Matrix& e, const Matrix& a,
                                    const Matrix& a_tilde, const UnmixConfig& cfg) {
  if (e.rows() != r.rows() || e.cols() != a.rows() || a.cols() != r.cols() ||
      a_tilde.rows() != a.rows() || a_tilde.cols() != a.cols())
    throw std::invalid_argument("objective: dimension mismatch");
  if (!all_finite(r) || !all_finite(e) || !all_finite(a) || !all_finite(a_tilde))
    throw std::invalid_argument("objective: non-finite input");
  ObjectiveBreakdown b;
  b.data_fit = 0.5 * (r - e * a).squaredNorm();
  b.split = 0.5 * cfg.lambda * (a - a_tilde).squaredNorm();
  b.l21 = cfg.alpha * a.rowwise().norm().sum();
  b.total = b.data_fit + b.split + b.l21;
  if (!std::isfinite(b.total)) throw std::runtime_error("objective: non-finite value");
  return b;
}

// E <- E .* (R A^T) ./ (E A A^T + eps); clamped at 0 so noisy (signed) R
// cannot push entries negative. Zero entries stay zero.
inline Matrix update_endmembers(const Matrix& r, const Matrix& e, const Matrix& a,
                                double eps_guard) {
  const Matrix aat = a * a.transpose();
  const Matrix num = r * a.transpose();
  const Matrix den = (e * aat).array() + eps_guard;
  return (e.array() * num.array() / den.array()).cwiseMax(0.0).matrix();
}

// Rf = [R; delta 1_N^T], Ef = [E; delta 1_P^T].
inline std::pair<Matrix, Matrix> augment_asc(const Matrix& r, const Matrix& e, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("augment_asc: delta must be > 0");
  Matrix rf(r.rows() + 1, r.cols());
  rf.topRows(r.rows()) = r;
  rf.row(r.rows()).setConstant(delta);
  Matrix ef(e.rows() + 1, e.cols());
  ef.topRows(e.rows()) = e;
  ef.row(e.rows()).setConstant(delta);
  return {std::move(rf), std::move(ef)};
}

// d_i = 1/(||A_i||_2 + eps) — the reweighting diagonal of the l2,1 term.
inline Vector row_norm_diag(const Matrix& a, double eps_guard) {
  return (a.rowwise().norm().array() + eps_guard).inverse().matrix();
}

// A <- A .* (Ef^T Rf + l At) ./ (Ef^T Ef A + l A + a D A + eps), clamped at 0.
inline Matrix update_abundances(const Matrix& rf, const Matrix& ef, const Matrix& a,
                                const Matrix& a_tilde, const UnmixConfig& cfg) {
  const Vector d = row_norm_diag(a, cfg.eps_guard);
  const Matrix num = ef.transpose() * rf + cfg.lambda * a_tilde;
  Matrix den = ef.transpose() * (ef * a) + cfg.lambda * a + cfg.alpha * (d.asDiagonal() * a);
  den.array() += cfg.eps_guard;
  return (a.array() * num.array() / den.array()).cwiseMax(0.0).matrix();
}

// At <- Denoiser(T(A), sigma_n), reshaped back and clamped; identity when mu=0.
inline AbundanceMatrix apply_prior(const AbundanceMatrix& a, int rows, int cols,
                                   const UnmixConfig& cfg) {
  if (cfg.mu == 0.0) return a;
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("apply_prior: mu > 0 requires lambda > 0");
  DenoiseRequest request;
  request.maps = reshape_to_maps(a, rows, cols);
  request.sigma = cfg.sigma_n();
  const MapStack denoised = denoise(cfg.denoiser, request);
  AbundanceMatrix out = reshape_to_matrix(denoised);
  out.data = out.data.cwiseMax(0.0);
  return out;
}

inline EngineState run_unmixing(const SpectralCube& cube, const UnmixConfig& cfg,
                                const GroundTruth* truth = nullptr) {
  cfg.validate();
  cube.validate();
  const int bands = cube.bands();
  const int n = cube.pixels();
  if (cfg.p > bands || cfg.p > n)
    throw std::invalid_argument("run_unmixing: p exceeds data dimensions");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  EngineState state;
  const VcaResult init = vca(cube, cfg.p, cfg.seed);
  state.e = init.endmembers;
  const double fcls_delta = cfg.delta > 0.0 ? cfg.delta : 10.0;
  state.a = fcls(cube, state.e, fcls_delta);
  state.a_tilde = state.a;

  const Matrix& r = cube.data;
  double prev = objective(r, state.e.data, state.a.data, state.a_tilde.data, cfg).total;
  int calm_iters = 0;

  auto trace_rmse = [&]() {
    if (truth == nullptr) return std::numeric_limits<double>::quiet_NaN();
    const Alignment al = align(state.e, truth->e);
    return rmse(apply_alignment(state.a, al), truth->a);
  };

  for (int k = 1; k <= cfg.max_iters; ++k) {
    state.e.data = update_endmembers(r, state.e.data, state.a.data, cfg.eps_guard);
    if (cfg.delta > 0.0) {
      const auto [rf, ef] = augment_asc(r, state.e.data, cfg.delta);
      state.a.data = update_abundances(rf, ef, state.a.data, state.a_tilde.data, cfg);
    } else {
      state.a.data = update_abundances(r, state.e.data, state.a.data, state.a_tilde.data, cfg);
    }
    try {
      state.a_tilde = apply_prior(state.a, cube.rows, cube.cols, cfg);
    } catch (const std::exception& ex) {
      throw std::runtime_error("iteration " + std::to_string(k) + ": " + ex.what());
    }
    state.iter = k;

    if (!all_finite(state.e.data) || !all_finite(state.a.data) || !all_finite(state.a_tilde.data))
      throw std::runtime_error("run_unmixing: non-finite state at iteration " + std::to_string(k));

    const ObjectiveBreakdown b = objective(r, state.e.data, state.a.data, state.a_tilde.data, cfg);
    IterationRecord rec;
    rec.iter = k;
    rec.objective = b.total;
    rec.data_fit = b.data_fit;
    rec.l21 = b.l21;
    rec.split = b.split;
    rec.rmse = trace_rmse();
    rec.seconds = elapsed();
    state.trace.records.push_back(rec);

    const double rel = std::abs(b.total - prev) / std::max(prev, 1e-30);
    calm_iters = (rel < cfg.rel_tol) ? calm_iters + 1 : 0;
    prev = b.total;
    if (calm_iters >= cfg.rel_tol_patience) break;
  }
  return state;
}

}  // namespace pnmf
