// manifest.hpp - run manifests (JSON, stable key order) and trace CSV I/O.
//
// A manifest written next to a run's outputs carries everything needed to
// reproduce it bit-for-bit: tool version, command, full config, paths, seed.
#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pnmf/engine.hpp"
#include "pnmf/io.hpp"
#include "pnmf/synth.hpp"
#include "pnmf/version.hpp"

namespace pnmf {

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson denoiser_json(const DenoiserSpec& spec) {
  OrderedJson j;
  j["kind"] = to_string(spec.kind);
  OrderedJson params = OrderedJson::object();
  for (const auto& [key, value] : spec.params) params[key] = value;
  j["params"] = params;
  return j;
}

inline OrderedJson unmix_config_json(const UnmixConfig& cfg) {
  OrderedJson j;
  j["p"] = cfg.p;
  j["alpha"] = cfg.alpha;
  j["lambda"] = cfg.lambda;
  j["mu"] = cfg.mu;
  j["delta"] = cfg.delta;
  j["max_iters"] = cfg.max_iters;
  j["rel_tol"] = cfg.rel_tol;
  j["rel_tol_patience"] = cfg.rel_tol_patience;
  j["eps_guard"] = cfg.eps_guard;
  j["seed"] = cfg.seed;
  j["denoiser"] = denoiser_json(cfg.denoiser);
  return j;
}

inline OrderedJson synth_config_json(const SynthConfig& cfg) {
  OrderedJson j;
  j["rows"] = cfg.rows;
  j["cols"] = cfg.cols;
  j["p"] = cfg.p;
  j["smoothness"] = cfg.smoothness;
  j["pure_pixel_fraction"] = cfg.pure_pixel_fraction;
  j["seed"] = cfg.seed;
  return j;
}

inline void store_manifest(const OrderedJson& manifest, const std::filesystem::path& path) {
  detail::write_file_bytes(path, manifest.dump(2) + "\n");
}

inline OrderedJson load_manifest(const std::filesystem::path& path) {
  return OrderedJson::parse(detail::read_file_bytes(path));
}

// Trace CSV: one row per executed iteration; the rmse field is empty when
// no ground truth was supplied.
inline void store_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
  std::string out = "iter,objective,data_fit,l21,split,rmse,seconds\n";
  for (const IterationRecord& r : trace.records) {
    out += std::to_string(r.iter);
    out += ',' + detail::format_double(r.objective);
    out += ',' + detail::format_double(r.data_fit);
    out += ',' + detail::format_double(r.l21);
    out += ',' + detail::format_double(r.split);
    out += ',';
    if (!std::isnan(r.rmse)) out += detail::format_double(r.rmse);
    out += ',' + detail::format_double(r.seconds);
    out += '\n';
  }
  detail::write_file_bytes(path, out);
}

inline RunTrace load_trace_csv(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  std::istringstream in(bytes);
  std::string line;
  if (!std::getline(in, line) || line.rfind("iter,objective", 0) != 0)
    throw std::runtime_error("trace csv: missing header in " + path.string());
  RunTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (fields.size() != 7) throw std::runtime_error("trace csv: malformed row: " + line);
    IterationRecord r;
    r.iter = std::stoi(fields[0]);
    r.objective = std::stod(fields[1]);
    r.data_fit = std::stod(fields[2]);
    r.l21 = std::stod(fields[3]);
    r.split = std::stod(fields[4]);
    r.rmse = fields[5].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(fields[5]);
    r.seconds = std::stod(fields[6]);
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace pnmf
