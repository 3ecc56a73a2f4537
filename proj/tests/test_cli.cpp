// End-to-end drives of the pnmf binary: subcommand wiring, exit codes,
// artifact layout, and byte-level determinism of synth and bench outputs.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pnmf/pnmf.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using pnmf::detail::read_file_bytes;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PNMF_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_capture(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(PNMF_TOOL_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Small scene shared by the driving tests.
fs::path scene_dir() {
  static fs::path dir = [] {
    const fs::path d = testutil::temp_dir("cli_scene");
    const int rc = run("synth --size 16x16 --p 3 --bands 40 --seed 3 --snr 10 --out " + d.string());
    REQUIRE(rc == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("version and argument errors") {
  const auto dir = testutil::temp_dir("cli_basic");
  CHECK(run_capture("--version", dir / "v.txt") == 0);
  CHECK(read_file_bytes(dir / "v.txt").find(pnmf::kVersion) != std::string::npos);
  CHECK(run("") != 0);                    // a subcommand is required
  CHECK(run("--bogus-flag") != 0);
  CHECK(run("synth") != 0);               // --out is required
  CHECK(run("unmix --p 3 --out /tmp/x") != 0);  // --input is required
}

TEST_CASE("synth: expected layout and byte determinism in the seed") {
  const auto d1 = testutil::temp_dir("cli_synth1");
  const auto d2 = testutil::temp_dir("cli_synth2");
  const auto d3 = testutil::temp_dir("cli_synth3");
  const std::string base = "synth --size 16x16 --p 3 --bands 40 --snr 10 ";
  REQUIRE(run(base + "--seed 3 --out " + d1.string()) == 0);
  REQUIRE(run(base + "--seed 3 --out " + d2.string()) == 0);
  REQUIRE(run(base + "--seed 4 --out " + d3.string()) == 0);

  for (const char* name : {"clean.hsic", "noisy_10dB.hsic", "truth_A.hsic", "truth_E.csv",
                           "manifest.json"})
    CHECK(fs::exists(d1 / name));

  CHECK(read_file_bytes(d1 / "clean.hsic") == read_file_bytes(d2 / "clean.hsic"));
  CHECK(read_file_bytes(d1 / "truth_A.hsic") == read_file_bytes(d2 / "truth_A.hsic"));
  CHECK(read_file_bytes(d1 / "noisy_10dB.hsic") == read_file_bytes(d2 / "noisy_10dB.hsic"));
  CHECK(read_file_bytes(d1 / "truth_E.csv") == read_file_bytes(d2 / "truth_E.csv"));
  CHECK(read_file_bytes(d1 / "clean.hsic") != read_file_bytes(d3 / "clean.hsic"));

  // the library reads back what the tool wrote
  const pnmf::SpectralCube cube = pnmf::load_cube(d1 / "clean.hsic");
  CHECK(cube.rows == 16);
  CHECK(cube.cols == 16);
  CHECK(cube.bands() == 40);
}

TEST_CASE("unmix: artifacts, trace, and manifest") {
  const fs::path scene = scene_dir();
  const auto out = testutil::temp_dir("cli_unmix");
  const int rc = run("unmix --input " + (scene / "noisy_10dB.hsic").string() +
                     " --p 3 --mu 0 --max-iters 4 --out " + out.string() +
                     " --truth-e " + (scene / "truth_E.csv").string() +
                     " --truth-a " + (scene / "truth_A.hsic").string());
  REQUIRE(rc == 0);
  for (const char* name : {"endmembers.csv", "abundances.hsic", "trace.csv", "manifest.json"})
    CHECK(fs::exists(out / name));

  const pnmf::RunTrace trace = pnmf::load_trace_csv(out / "trace.csv");
  REQUIRE(trace.records.size() == 4);  // max-iters 4 < patience, so the cap binds
  for (const auto& rec : trace.records) {
    CHECK(std::isfinite(rec.rmse));  // truth was supplied
    CHECK(rec.objective > 0.0);
  }

  const pnmf::EndmemberMatrix e = pnmf::load_endmember_csv(out / "endmembers.csv");
  CHECK(e.bands() == 40);
  CHECK(e.count() == 3);
  const pnmf::AbundanceMatrix a = pnmf::load_abundances(out / "abundances.hsic");
  CHECK(a.count() == 3);
  CHECK(a.pixels() == 256);

  const pnmf::OrderedJson manifest = pnmf::load_manifest(out / "manifest.json");
  CHECK(manifest["config"]["p"] == 3);
  CHECK(manifest["config"]["mu"] == 0.0);
  CHECK(manifest["tool_version"] == pnmf::kVersion);
}

TEST_CASE("unmix: bad input and bad denoiser params exit nonzero") {
  const fs::path scene = scene_dir();
  const auto out = testutil::temp_dir("cli_unmix_bad");
  const std::string good_in = " --input " + (scene / "noisy_10dB.hsic").string();
  CHECK(run("unmix --input /nonexistent.hsic --p 3 --out " + out.string()) == 1);
  CHECK(run("unmix" + good_in + " --p 3 --denoiser nlm --denoiser-param bogus=3 --out " +
            out.string()) == 1);
  CHECK(run("unmix" + good_in + " --p 3 --denoiser nlm --denoiser-param patch --out " +
            out.string()) == 1);
  CHECK(run("unmix" + good_in + " --p 3 --denoiser none --denoiser-param c_g=1 --out " +
            out.string()) == 1);
  CHECK(run("unmix" + good_in + " --p 3 --denoiser median --denoiser-param window=4 --out " +
            out.string()) == 1);  // window must be odd
  CHECK(run("unmix" + good_in + " --p 0 --out " + out.string()) != 0);
}

TEST_CASE("eval: prints one schema row and appends to a results CSV") {
  const fs::path scene = scene_dir();
  const auto out = testutil::temp_dir("cli_eval");
  REQUIRE(run("unmix --input " + (scene / "noisy_10dB.hsic").string() +
              " --p 3 --mu 0 --max-iters 3 --out " + (out / "run").string()) == 0);

  const std::string eval_args =
      "eval --est-e " + (out / "run" / "endmembers.csv").string() + " --est-a " +
      (out / "run" / "abundances.hsic").string() + " --truth-e " +
      (scene / "truth_E.csv").string() + " --truth-a " + (scene / "truth_A.hsic").string() +
      " --cube " + (scene / "noisy_10dB.hsic").string() + " --method pnmf --denoiser none" +
      " --snr 10 --seed 3";
  REQUIRE(run_capture(eval_args, out / "eval.txt") == 0);

  const std::string text = read_file_bytes(out / "eval.txt");
  CHECK(text.rfind(pnmf::kResultsCsvHeader, 0) == 0);
  std::istringstream lines(text);
  std::string header, row;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row));
  CHECK(row.rfind("pnmf,none,10,3,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 9);

  // --append-csv writes the header once, then keeps appending rows
  const fs::path csv = out / "results.csv";
  REQUIRE(run(eval_args + " --append-csv " + csv.string()) == 0);
  REQUIRE(run(eval_args + " --append-csv " + csv.string()) == 0);
  std::istringstream all(read_file_bytes(csv));
  int n = 0;
  std::string line;
  while (std::getline(all, line))
    if (!line.empty()) ++n;
  CHECK(n == 3);

  CHECK(run("eval --est-e /missing.csv --est-a /m.hsic --truth-e /m.csv --truth-a /m.hsic") == 1);
}

TEST_CASE("plot: renders maps and charts for a run directory") {
  const fs::path scene = scene_dir();
  const auto out = testutil::temp_dir("cli_plot");
  REQUIRE(run("unmix --input " + (scene / "noisy_10dB.hsic").string() +
              " --p 3 --mu 0 --max-iters 3 --out " + (out / "run").string() + " --truth-e " +
              (scene / "truth_E.csv").string() + " --truth-a " +
              (scene / "truth_A.hsic").string()) == 0);
  REQUIRE(run("plot --run " + (out / "run").string()) == 0);

  for (const char* name : {"map_0.ppm", "map_1.ppm", "map_2.ppm", "map_0.ppm.txt",
                           "spectra.svg", "convergence.svg"})
    CHECK(fs::exists(out / "run" / name));
  CHECK(read_file_bytes(out / "run" / "map_0.ppm").rfind("P6\n16 16\n255\n", 0) == 0);
  CHECK(read_file_bytes(out / "run" / "spectra.svg").rfind("<svg", 0) == 0);

  CHECK(run("plot --run /nonexistent_run_dir") == 1);
}

TEST_CASE("bench: micro grid is reproducible byte for byte") {
  const auto d1 = testutil::temp_dir("cli_bench1");
  const auto d2 = testutil::temp_dir("cli_bench2");
  const std::string base =
      "bench --snrs 30 --denoisers none median --repeat 1 --size 12x12 --p 3 --bands 30"
      " --max-iters 3 --no-traces --no-plots --seed 7 --out ";
  REQUIRE(run(base + d1.string()) == 0);
  REQUIRE(run(base + d2.string()) == 0);

  const std::string csv = read_file_bytes(d1 / "results.csv");
  CHECK(csv == read_file_bytes(d2 / "results.csv"));
  CHECK(csv.rfind(pnmf::kResultsCsvHeader, 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);  // header + 2 cells
  CHECK(fs::exists(d1 / "manifest.json"));
}

}  // TEST_SUITE
