// pnmf.hpp - umbrella header for the whole library.
#pragma once

#include "pnmf/bench.hpp"
#include "pnmf/denoise.hpp"
#include "pnmf/engine.hpp"
#include "pnmf/fcls.hpp"
#include "pnmf/filters.hpp"
#include "pnmf/io.hpp"
#include "pnmf/manifest.hpp"
#include "pnmf/metrics.hpp"
#include "pnmf/plots.hpp"
#include "pnmf/rng.hpp"
#include "pnmf/synth.hpp"
#include "pnmf/types.hpp"
#include "pnmf/vca.hpp"
#include "pnmf/version.hpp"
