// version.hpp - library version and persisted-schema constants.
#pragma once

namespace pnmf {

inline constexpr const char* kVersion = "0.1.0";

// HSIC container format version (see io.hpp).
inline constexpr unsigned kCubeFormatVersion = 1;

// Schema version of the results CSV emitted by eval/bench.
inline constexpr unsigned kResultsCsvVersion = 1;

}  // namespace pnmf
