// pnmf - command-line driver: scene synthesis, unmixing runs, evaluation,
// the SNR-sweep benchmark, and plot emission.
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pnmf/pnmf.hpp"

namespace fs = std::filesystem;

namespace {

// Output roots resolve under $PNMF_OUT_ROOT when set and the path is relative.
fs::path resolve_out(const std::string& dir) {
  const char* root = std::getenv("PNMF_OUT_ROOT");
  fs::path p(dir);
  if (root != nullptr && *root != '\0' && p.is_relative()) return fs::path(root) / p;
  return p;
}

// Tracks files written by one command so a failure removes partial outputs.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (armed_) {
      std::error_code ec;
      for (const fs::path& f : files_) fs::remove(f, ec);
    }
  }
  fs::path track(const fs::path& f) {
    files_.push_back(f);
    return f;
  }
  void disarm() { armed_ = false; }

 private:
  std::vector<fs::path> files_;
  bool armed_ = true;
};

std::pair<int, int> parse_size(const std::string& size) {
  const auto x = size.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--size", "expected ROWSxCOLS, e.g. 64x64");
  try {
    const int rows = std::stoi(size.substr(0, x));
    const int cols = std::stoi(size.substr(x + 1));
    return {rows, cols};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--size", "expected ROWSxCOLS, e.g. 64x64");
  }
}

pnmf::DenoiserSpec make_denoiser(const std::string& kind, const std::vector<std::string>& kv) {
  pnmf::DenoiserSpec spec;
  spec.kind = pnmf::parse_denoiser_kind(kind);
  for (const std::string& item : kv) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--denoiser-param", "expected key=value: " + item);
    try {
      spec.params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--denoiser-param", "value is not a number: " + item);
    }
  }
  spec.validate();
  return spec;
}

std::string snr_file_label(double snr) {
  std::string s = pnmf::detail::format_double(snr);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

struct UnmixFlags {
  double alpha = 0.1, lambda = 3e4, mu = 500.0, delta = 10.0, rel_tol = 1e-5, eps_guard = 1e-12;
  int max_iters = 300, patience = 5;
  std::uint64_t seed = 0;
  std::string denoiser = "nlm";
  std::vector<std::string> denoiser_params;

  void add_to(CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--alpha", alpha, "l2,1 sparsity weight");
    cmd->add_option("--lambda", lambda, "split penalty");
    cmd->add_option("--mu", mu, "prior strength (0 disables the denoiser step)");
    cmd->add_option("--delta", delta, "sum-to-one augmentation weight (0 disables)");
    cmd->add_option("--max-iters", max_iters, "iteration cap K");
    cmd->add_option("--rel-tol", rel_tol, "relative objective-change stop threshold");
    cmd->add_option("--patience", patience, "consecutive calm iterations to stop");
    cmd->add_option("--eps-guard", eps_guard, "safe-division epsilon");
    if (with_seed) cmd->add_option("--seed", seed, "RNG seed (VCA directions)");
    cmd->add_option("--denoiser", denoiser, "none|gaussian|median|nlm|tv")
        ->check(CLI::IsMember({"none", "identity", "gaussian", "median", "nlm", "tv"}));
    cmd->add_option("--denoiser-param", denoiser_params, "key=value, repeatable");
  }

  pnmf::UnmixConfig to_config(int p) const {
    pnmf::UnmixConfig cfg;
    cfg.p = p;
    cfg.alpha = alpha;
    cfg.lambda = lambda;
    cfg.mu = mu;
    cfg.delta = delta;
    cfg.max_iters = max_iters;
    cfg.rel_tol = rel_tol;
    cfg.rel_tol_patience = patience;
    cfg.eps_guard = eps_guard;
    cfg.seed = seed;
    cfg.denoiser = make_denoiser(denoiser, denoiser_params);
    return cfg;
  }
};

int cmd_synth(const std::string& out_dir, const std::string& size, int p, int bands,
              double smoothness, double pure_fraction, std::uint64_t seed,
              const std::vector<double>& snrs, const std::string& endmember_csv) {
  const auto [rows, cols] = parse_size(size);
  pnmf::SynthConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  cfg.p = p;
  cfg.smoothness = smoothness;
  cfg.pure_pixel_fraction = pure_fraction;
  cfg.seed = seed;
  cfg.validate();

  pnmf::EndmemberMatrix e;
  if (endmember_csv.empty()) {
    e = pnmf::toy_endmembers(bands, p);
  } else {
    e = pnmf::load_endmember_csv(endmember_csv);
    if (e.count() != p)
      throw std::runtime_error("endmember csv has " + std::to_string(e.count()) +
                               " columns, --p is " + std::to_string(p));
  }

  const fs::path out = resolve_out(out_dir);
  fs::create_directories(out);
  OutputGuard guard;

  const pnmf::AbundanceMatrix a = pnmf::generate_abundances(cfg);
  const pnmf::SpectralCube clean = pnmf::mix(e, a, rows, cols);
  pnmf::store_cube(clean, guard.track(out / "clean.hsic"));
  pnmf::store_abundances(a, rows, cols, guard.track(out / "truth_A.hsic"));
  pnmf::store_endmember_csv(e, guard.track(out / "truth_E.csv"));
  for (std::size_t i = 0; i < snrs.size(); ++i) {
    const pnmf::SpectralCube noisy = pnmf::add_noise(clean, snrs[i], seed + 1 + i);
    pnmf::store_cube(noisy, guard.track(out / ("noisy_" + snr_file_label(snrs[i]) + "dB.hsic")));
  }

  pnmf::OrderedJson manifest;
  manifest["tool_version"] = pnmf::kVersion;
  manifest["command"] = "synth";
  manifest["config"] = pnmf::synth_config_json(cfg);
  manifest["bands"] = e.bands();
  manifest["endmember_source"] = endmember_csv.empty() ? "builtin-toy" : endmember_csv;
  manifest["snrs_db"] = snrs;
  manifest["noise_seed_base"] = seed + 1;  // cube i uses noise_seed_base + i
  manifest["out_dir"] = out.string();
  pnmf::store_manifest(manifest, guard.track(out / "manifest.json"));

  guard.disarm();
  std::cout << "synth: wrote " << (3 + snrs.size() + 1) << " files under " << out.string() << "\n";
  return 0;
}

int cmd_unmix(const std::string& input, int p, const UnmixFlags& flags, const std::string& out_dir,
              const std::string& truth_e_csv, const std::string& truth_a_hsic) {
  const pnmf::SpectralCube cube = pnmf::load_cube(input);
  const pnmf::UnmixConfig cfg = flags.to_config(p);

  std::optional<pnmf::GroundTruth> truth;
  if (!truth_e_csv.empty() || !truth_a_hsic.empty()) {
    if (truth_e_csv.empty() || truth_a_hsic.empty())
      throw std::runtime_error("provide both --truth-e and --truth-a or neither");
    truth.emplace();
    truth->e = pnmf::load_endmember_csv(truth_e_csv);
    truth->a = pnmf::load_abundances(truth_a_hsic);
  }

  const pnmf::EngineState state = pnmf::run_unmixing(cube, cfg, truth ? &*truth : nullptr);

  const fs::path out = resolve_out(out_dir);
  fs::create_directories(out);
  OutputGuard guard;
  pnmf::store_endmember_csv(state.e, guard.track(out / "endmembers.csv"));
  pnmf::store_abundances(state.a, cube.rows, cube.cols, guard.track(out / "abundances.hsic"));
  pnmf::store_trace_csv(state.trace, guard.track(out / "trace.csv"));

  pnmf::OrderedJson manifest;
  manifest["tool_version"] = pnmf::kVersion;
  manifest["command"] = "unmix";
  manifest["input"] = input;
  manifest["config"] = pnmf::unmix_config_json(cfg);
  manifest["truth_e"] = truth_e_csv;
  manifest["truth_a"] = truth_a_hsic;
  manifest["out_dir"] = out.string();
  pnmf::store_manifest(manifest, guard.track(out / "manifest.json"));

  guard.disarm();
  std::cout << "unmix: " << state.iter << " iterations";
  if (!state.trace.records.empty())
    std::cout << ", final objective " << pnmf::detail::format_double(state.trace.records.back().objective);
  std::cout << ", outputs under " << out.string() << "\n";
  return 0;
}

int cmd_eval(const std::string& est_e_csv, const std::string& est_a_hsic,
             const std::string& truth_e_csv, const std::string& truth_a_hsic,
             const std::string& cube_path, const std::string& re_normalizer,
             const std::string& append_csv, const std::string& method, const std::string& denoiser,
             double snr_db, std::uint64_t seed) {
  const pnmf::EndmemberMatrix est_e = pnmf::load_endmember_csv(est_e_csv);
  const pnmf::AbundanceMatrix est_a = pnmf::load_abundances(est_a_hsic);
  const pnmf::EndmemberMatrix truth_e = pnmf::load_endmember_csv(truth_e_csv);
  const pnmf::AbundanceMatrix truth_a = pnmf::load_abundances(truth_a_hsic);

  const pnmf::Alignment al = pnmf::align(est_e, truth_e);
  const pnmf::AbundanceMatrix a_hat = pnmf::apply_alignment(est_a, al);

  pnmf::BenchRow row;
  row.method = method;
  row.denoiser = denoiser;
  row.snr_db = snr_db;
  row.seed = seed;
  row.rmse = pnmf::rmse(a_hat, truth_a);
  row.sad_deg = pnmf::rad_to_deg(pnmf::mean_sad(al));
  row.psnr_db = pnmf::psnr(a_hat, truth_a);
  row.re = 0.0;
  if (!cube_path.empty()) {
    const pnmf::SpectralCube cube = pnmf::load_cube(cube_path);
    const auto norm = re_normalizer == "bands" ? pnmf::ReNormalizer::kPerPixelBand
                                               : pnmf::ReNormalizer::kPerPixelEndmember;
    row.re = pnmf::reconstruction_error(cube, est_e, est_a, norm);
  }

  std::cout << pnmf::kResultsCsvHeader << "\n" << pnmf::detail::bench_row_csv(row) << "\n";

  if (!append_csv.empty()) {
    const fs::path path = resolve_out(append_csv);
    std::string contents;
    if (fs::exists(path)) contents = pnmf::detail::read_file_bytes(path);
    if (contents.empty()) contents = std::string(pnmf::kResultsCsvHeader) + "\n";
    contents += pnmf::detail::bench_row_csv(row) + "\n";
    pnmf::detail::write_file_bytes(path, contents);
  }
  return 0;
}

int cmd_bench(const std::string& out_dir, const std::vector<double>& snrs,
              const std::vector<std::string>& denoisers, int repeats, std::uint64_t seed,
              const std::string& size, int p, int bands, double smoothness, double pure_fraction,
              const UnmixFlags& flags, bool timing, bool no_traces, bool no_plots) {
  const auto [rows, cols] = parse_size(size);
  pnmf::BenchConfig cfg;
  cfg.snrs_db = snrs;
  cfg.denoisers.clear();
  for (const std::string& name : denoisers) cfg.denoisers.push_back(pnmf::parse_denoiser_kind(name));
  cfg.repeats = repeats;
  cfg.seed = seed;
  cfg.bands = bands;
  cfg.scene.rows = rows;
  cfg.scene.cols = cols;
  cfg.scene.p = p;
  cfg.scene.smoothness = smoothness;
  cfg.scene.pure_pixel_fraction = pure_fraction;
  cfg.engine = flags.to_config(p);
  cfg.timing = timing;
  cfg.write_traces = !no_traces;
  cfg.write_plots = !no_plots;
  cfg.out_dir = resolve_out(out_dir).string();

  const std::vector<pnmf::BenchRow> rows_out = pnmf::run_bench(cfg);

  pnmf::OrderedJson manifest;
  manifest["tool_version"] = pnmf::kVersion;
  manifest["command"] = "bench";
  manifest["snrs_db"] = cfg.snrs_db;
  std::vector<std::string> names;
  for (auto kind : cfg.denoisers) names.push_back(pnmf::to_string(kind));
  manifest["denoisers"] = names;
  manifest["repeats"] = cfg.repeats;
  manifest["seed"] = cfg.seed;
  manifest["bands"] = cfg.bands;
  manifest["scene"] = pnmf::synth_config_json(cfg.scene);
  manifest["engine"] = pnmf::unmix_config_json(cfg.engine);
  manifest["timing"] = cfg.timing;
  manifest["out_dir"] = cfg.out_dir;
  pnmf::store_manifest(manifest, fs::path(cfg.out_dir) / "manifest.json");

  std::cout << "bench: " << rows_out.size() << " rows -> " << cfg.out_dir << "/results.csv\n";
  return 0;
}

int cmd_plot(const std::string& run_dir, const std::string& out_dir) {
  const fs::path run = resolve_out(run_dir);
  const fs::path out = out_dir.empty() ? run : resolve_out(out_dir);
  fs::create_directories(out);
  OutputGuard guard;

  int rows = 0, cols = 0;
  const pnmf::AbundanceMatrix a = pnmf::load_abundances(run / "abundances.hsic", &rows, &cols);
  const pnmf::MapStack maps = pnmf::reshape_to_maps(a, rows, cols);
  for (int k = 0; k < maps.count(); ++k) {
    const fs::path ppm = out / ("map_" + std::to_string(k) + ".ppm");
    guard.track(ppm);
    guard.track(ppm.string() + ".txt");
    pnmf::store_map_ppm(maps.maps[k], ppm.string());
  }

  const pnmf::EndmemberMatrix e = pnmf::load_endmember_csv(run / "endmembers.csv");
  std::vector<pnmf::PlotSeries> spectra;
  for (int k = 0; k < e.count(); ++k) {
    pnmf::PlotSeries s;
    s.name = "endmember " + std::to_string(k);
    for (int b = 0; b < e.bands(); ++b) {
      s.xs.push_back(b);
      s.ys.push_back(e.data(b, k));
    }
    spectra.push_back(s);
  }
  pnmf::store_line_chart_svg("estimated endmember spectra", "band", "reflectance", spectra,
                             guard.track(out / "spectra.svg").string());

  const pnmf::RunTrace trace = pnmf::load_trace_csv(run / "trace.csv");
  const bool has_rmse =
      !trace.records.empty() && !std::isnan(trace.records.front().rmse);
  pnmf::PlotSeries conv;
  conv.name = has_rmse ? "RMSE" : "objective";
  for (const pnmf::IterationRecord& r : trace.records) {
    conv.xs.push_back(r.iter);
    conv.ys.push_back(has_rmse ? r.rmse : r.objective);
  }
  pnmf::store_line_chart_svg("convergence", "iteration", conv.name, {conv},
                             guard.track(out / "convergence.svg").string());

  guard.disarm();
  std::cout << "plot: " << maps.count() << " maps + 2 charts under " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blind hyperspectral unmixing via NMF with plug-in denoiser priors"};
  app.set_version_flag("--version", std::string(pnmf::kVersion));
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  std::string sy_size = "64x64", sy_out, sy_endmembers;
  int sy_p = 4, sy_bands = 224;
  double sy_smooth = 2.0, sy_pure = 0.05;
  std::uint64_t sy_seed = 0;
  std::vector<double> sy_snrs;
  synth->add_option("--size", sy_size, "scene size ROWSxCOLS")->capture_default_str();
  synth->add_option("--p", sy_p, "number of endmembers")->capture_default_str();
  synth->add_option("--bands", sy_bands, "bands for the builtin toy endmembers")->capture_default_str();
  synth->add_option("--endmembers", sy_endmembers, "endmember CSV (default: builtin toy spectra)");
  synth->add_option("--smoothness", sy_smooth, "field smoothing std, px")->capture_default_str();
  synth->add_option("--pure-fraction", sy_pure, "fraction of pixels snapped pure")->capture_default_str();
  synth->add_option("--seed", sy_seed, "scene seed")->capture_default_str();
  synth->add_option("--snr", sy_snrs, "noisy copies at these SNRs (dB)")->delimiter(',');
  synth->add_option("-o,--out", sy_out, "output directory")->required();

  // unmix
  auto* unmix = app.add_subcommand("unmix", "run the unmixing engine on a cube");
  std::string ux_input, ux_out, ux_truth_e, ux_truth_a;
  int ux_p = 4;
  UnmixFlags ux_flags;
  unmix->add_option("-i,--input", ux_input, "input cube (.hsic)")->required();
  unmix->add_option("--p", ux_p, "number of endmembers")->required();
  ux_flags.add_to(unmix);
  unmix->add_option("--truth-e", ux_truth_e, "ground truth endmember CSV (enables trace RMSE)");
  unmix->add_option("--truth-a", ux_truth_a, "ground truth abundances HSIC");
  unmix->add_option("-o,--out", ux_out, "output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "score an estimate against ground truth");
  std::string ev_est_e, ev_est_a, ev_truth_e, ev_truth_a, ev_cube, ev_norm = "endmembers";
  std::string ev_append, ev_method = "pnmf", ev_denoiser = "none";
  double ev_snr = 0.0;
  std::uint64_t ev_seed = 0;
  eval->add_option("--est-e", ev_est_e, "estimated endmember CSV")->required();
  eval->add_option("--est-a", ev_est_a, "estimated abundances HSIC")->required();
  eval->add_option("--truth-e", ev_truth_e, "truth endmember CSV")->required();
  eval->add_option("--truth-a", ev_truth_a, "truth abundances HSIC")->required();
  eval->add_option("--cube", ev_cube, "observed cube for reconstruction error");
  eval->add_option("--re-normalizer", ev_norm, "endmembers|bands")
      ->check(CLI::IsMember({"endmembers", "bands"}));
  eval->add_option("--append-csv", ev_append, "append the row to this results CSV");
  eval->add_option("--method", ev_method, "method label for the CSV row");
  eval->add_option("--denoiser", ev_denoiser, "denoiser label for the CSV row");
  eval->add_option("--snr", ev_snr, "SNR label for the CSV row");
  eval->add_option("--seed", ev_seed, "seed label for the CSV row");

  // bench
  auto* bench = app.add_subcommand("bench", "SNR x denoiser sweep with paired seeds");
  std::string be_out, be_size = "64x64";
  std::vector<double> be_snrs{5, 10, 20, 30};
  std::vector<std::string> be_denoisers{"none", "gaussian", "median", "nlm", "tv"};
  int be_repeats = 1, be_p = 4, be_bands = 224;
  double be_smooth = 2.0, be_pure = 0.05;
  std::uint64_t be_seed = 7;
  bool be_timing = false, be_no_traces = false, be_no_plots = false;
  UnmixFlags be_flags;
  bench->add_option("--snrs", be_snrs, "SNRs in dB")->delimiter(',')->capture_default_str();
  bench->add_option("--denoisers", be_denoisers, "denoiser kinds")->delimiter(',')->capture_default_str();
  bench->add_option("--repeat", be_repeats, "independent scene seeds per cell")->capture_default_str();
  bench->add_option("--size", be_size, "scene size ROWSxCOLS")->capture_default_str();
  bench->add_option("--p", be_p, "number of endmembers")->capture_default_str();
  bench->add_option("--bands", be_bands, "bands for the toy endmembers")->capture_default_str();
  bench->add_option("--smoothness", be_smooth, "field smoothing std, px")->capture_default_str();
  bench->add_option("--pure-fraction", be_pure, "fraction of pixels snapped pure")->capture_default_str();
  be_flags.add_to(bench, /*with_seed=*/false);
  bench->add_option("--seed", be_seed, "base seed for the whole grid")->capture_default_str();
  bench->add_flag("--timing", be_timing, "record real wall time (breaks CSV byte-determinism)");
  bench->add_flag("--no-traces", be_no_traces, "skip per-cell trace CSVs");
  bench->add_flag("--no-plots", be_no_plots, "skip convergence SVGs");
  bench->add_option("-o,--out", be_out, "output directory")->required();

  // plot
  auto* plot = app.add_subcommand("plot", "render maps and charts for a run directory");
  std::string pl_run, pl_out;
  plot->add_option("--run", pl_run, "run directory (unmix outputs)")->required();
  plot->add_option("-o,--out", pl_out, "output directory (default: run dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth)
      return cmd_synth(sy_out, sy_size, sy_p, sy_bands, sy_smooth, sy_pure, sy_seed, sy_snrs,
                       sy_endmembers);
    if (*unmix) return cmd_unmix(ux_input, ux_p, ux_flags, ux_out, ux_truth_e, ux_truth_a);
    if (*eval)
      return cmd_eval(ev_est_e, ev_est_a, ev_truth_e, ev_truth_a, ev_cube, ev_norm, ev_append,
                      ev_method, ev_denoiser, ev_snr, ev_seed);
    if (*bench)
      return cmd_bench(be_out, be_snrs, be_denoisers, be_repeats, be_seed, be_size, be_p, be_bands,
                       be_smooth, be_pure, be_flags, be_timing, be_no_traces, be_no_plots);
    if (*plot) return cmd_plot(pl_run, pl_out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
