// bench.hpp - the SNR-sweep benchmark grid: synth -> unmix -> eval per
// (SNR, denoiser) cell with paired seeds, emitting a versioned results CSV,
// per-cell traces, optional repeat summaries, and convergence charts.
//
// Seed pairing: one clean scene per repeat (shared across SNRs), one noise
// draw per (repeat, SNR) cell (shared across denoisers), one VCA seed per
// repeat — so denoiser columns are compared on identical inputs.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnmf/engine.hpp"
#include "pnmf/io.hpp"
#include "pnmf/manifest.hpp"
#include "pnmf/metrics.hpp"
#include "pnmf/plots.hpp"
#include "pnmf/synth.hpp"

namespace pnmf {

struct BenchConfig {
  std::vector<double> snrs_db{5.0, 10.0, 20.0, 30.0};
  std::vector<DenoiserKind> denoisers{DenoiserKind::kIdentity, DenoiserKind::kGaussian,
                                      DenoiserKind::kMedian, DenoiserKind::kNlm,
                                      DenoiserKind::kTv};
  int repeats = 1;
  std::uint64_t seed = 7;
  int bands = 224;
  SynthConfig scene;       // snr_db ignored; noise is added per grid cell
  UnmixConfig engine;      // p/seed/mu/denoiser overridden per cell
  bool timing = false;     // real wall time in the seconds column (breaks
                           // byte-determinism of results.csv; off by default)
  bool write_traces = true;
  bool write_plots = true;
  std::string out_dir;

  void validate() const {
    if (snrs_db.empty()) throw std::invalid_argument("bench: need at least one SNR");
    for (double s : snrs_db)
      if (!std::isfinite(s)) throw std::invalid_argument("bench: SNR must be finite");
    if (denoisers.empty()) throw std::invalid_argument("bench: need at least one denoiser");
    if (repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
    if (bands < 2) throw std::invalid_argument("bench: bands must be >= 2");
    if (out_dir.empty()) throw std::invalid_argument("bench: output directory required");
    scene.validate();
  }
};

struct BenchRow {
  std::string method;    // "nmf-l21" (mu=0 baseline) or "pnmf"
  std::string denoiser;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double sad_deg = 0.0;
  double psnr_db = 0.0;
  double re = 0.0;
  int iters = 0;
  double seconds = 0.0;
};

inline const char* kResultsCsvHeader = "method,denoiser,snr_db,seed,rmse,sad_deg,psnr_db,re,iters,seconds";

namespace detail {

inline std::string bench_row_csv(const BenchRow& r) {
  std::string out = r.method;
  out += ',' + r.denoiser;
  out += ',' + format_double(r.snr_db);
  out += ',' + std::to_string(r.seed);
  out += ',' + format_double(r.rmse);
  out += ',' + format_double(r.sad_deg);
  out += ',' + format_double(r.psnr_db);
  out += ',' + format_double(r.re);
  out += ',' + std::to_string(r.iters);
  out += ',' + format_double(r.seconds);
  return out;
}

inline std::string snr_label(double snr_db) {
  std::string s = format_double(snr_db);
  for (char& c : s)
    if (c == '.') c = 'p';  // keep filenames dot-free apart from extensions
  return s;
}

}  // namespace detail

inline std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  const EndmemberMatrix e_true = toy_endmembers(cfg.bands, cfg.scene.p);
  std::vector<BenchRow> rows;
  // convergence series: per SNR, one RMSE-vs-iteration curve per denoiser
  // (first repeat only).
  std::map<int, std::vector<PlotSeries>> convergence;

  for (int t = 0; t < cfg.repeats; ++t) {
    const std::uint64_t scene_seed = cfg.seed + 97ull * static_cast<std::uint64_t>(t);
    SynthConfig sc = cfg.scene;
    sc.seed = scene_seed;
    sc.snr_db.reset();
    const AbundanceMatrix a_true = generate_abundances(sc);
    const SpectralCube clean = mix(e_true, a_true, sc.rows, sc.cols);
    const GroundTruth truth{e_true, a_true};

    for (std::size_t si = 0; si < cfg.snrs_db.size(); ++si) {
      const double snr = cfg.snrs_db[si];
      const SpectralCube noisy = add_noise(clean, snr, scene_seed + 1000ull + si);

      for (DenoiserKind kind : cfg.denoisers) {
        UnmixConfig uc = cfg.engine;
        uc.p = sc.p;
        uc.seed = scene_seed + 5000ull;
        uc.denoiser = DenoiserSpec{kind, {}};
        const bool baseline = (kind == DenoiserKind::kIdentity);
        if (baseline) uc.mu = 0.0;

        const EngineState state = run_unmixing(noisy, uc, &truth);

        const Alignment al = align(state.e, truth.e);
        const AbundanceMatrix a_hat = apply_alignment(state.a, al);

        BenchRow row;
        row.method = baseline ? "nmf-l21" : "pnmf";
        row.denoiser = to_string(kind);
        row.snr_db = snr;
        row.seed = scene_seed;
        row.rmse = rmse(a_hat, truth.a);
        row.sad_deg = rad_to_deg(mean_sad(al));
        row.psnr_db = psnr(a_hat, truth.a);
        row.re = reconstruction_error(noisy, state.e, state.a);
        row.iters = static_cast<int>(state.trace.records.size());
        row.seconds =
            (cfg.timing && !state.trace.records.empty()) ? state.trace.records.back().seconds : 0.0;
        rows.push_back(row);

        const std::string cell = to_string(kind) + "_snr" + detail::snr_label(snr) + "_r" +
                                 std::to_string(t);
        if (cfg.write_traces) {
          fs::create_directories(fs::path(cfg.out_dir) / "cells");
          store_trace_csv(state.trace, fs::path(cfg.out_dir) / "cells" / (cell + "_trace.csv"));
        }
        if (t == 0) {
          PlotSeries series;
          series.name = to_string(kind);
          for (const IterationRecord& rec : state.trace.records) {
            series.xs.push_back(rec.iter);
            series.ys.push_back(rec.rmse);
          }
          convergence[static_cast<int>(si)].push_back(series);
        }
      }
    }
  }

  std::string csv = std::string(kResultsCsvHeader) + "\n";
  for (const BenchRow& r : rows) csv += detail::bench_row_csv(r) + "\n";
  detail::write_file_bytes(fs::path(cfg.out_dir) / "results.csv", csv);

  if (cfg.repeats > 1) {
    // mean +/- sample std per (method, denoiser, snr) in first-seen order
    struct Agg {
      std::string method, denoiser;
      double snr = 0;
      std::vector<double> rmse, sad, psnr, re;
    };
    std::vector<Agg> groups;
    for (const BenchRow& r : rows) {
      Agg* g = nullptr;
      for (Agg& cand : groups)
        if (cand.method == r.method && cand.denoiser == r.denoiser && cand.snr == r.snr_db)
          g = &cand;
      if (g == nullptr) {
        groups.push_back(Agg{r.method, r.denoiser, r.snr_db, {}, {}, {}, {}});
        g = &groups.back();
      }
      g->rmse.push_back(r.rmse);
      g->sad.push_back(r.sad_deg);
      g->psnr.push_back(r.psnr_db);
      g->re.push_back(r.re);
    }
    auto mean_of = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    auto std_of = [&](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      const double m = mean_of(v);
      double s = 0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    std::string summary =
        "method,denoiser,snr_db,repeats,rmse_mean,rmse_std,sad_deg_mean,sad_deg_std,"
        "psnr_db_mean,psnr_db_std,re_mean,re_std\n";
    for (const Agg& g : groups) {
      summary += g.method + ',' + g.denoiser + ',' + detail::format_double(g.snr) + ',' +
                 std::to_string(g.rmse.size());
      for (const auto* v : {&g.rmse, &g.sad, &g.psnr, &g.re})
        summary += ',' + detail::format_double(mean_of(*v)) + ',' + detail::format_double(std_of(*v));
      summary += '\n';
    }
    detail::write_file_bytes(fs::path(cfg.out_dir) / "summary.csv", summary);
  }

  if (cfg.write_plots) {
    for (const auto& [si, series] : convergence) {
      const double snr = cfg.snrs_db[static_cast<std::size_t>(si)];
      store_line_chart_svg("abundance RMSE vs iteration, SNR " + detail::format_double(snr) + " dB",
                           "iteration", "RMSE", series,
                           (fs::path(cfg.out_dir) / ("convergence_snr" + detail::snr_label(snr) + ".svg"))
                               .string());
    }
  }
  return rows;
}

}  // namespace pnmf
