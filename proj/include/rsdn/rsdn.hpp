#pragma once

// Umbrella header: the whole toolkit in dependency order.
#include "rsdn/error.hpp"      // IWYU pragma: export
#include "rsdn/textio.hpp"     // IWYU pragma: export
#include "rsdn/rng.hpp"        // IWYU pragma: export
#include "rsdn/special.hpp"    // IWYU pragma: export
#include "rsdn/spectrum.hpp"   // IWYU pragma: export
#include "rsdn/metrics.hpp"    // IWYU pragma: export
#include "rsdn/synth.hpp"      // IWYU pragma: export
#include "rsdn/io.hpp"         // IWYU pragma: export
#include "rsdn/whittaker.hpp"  // IWYU pragma: export
#include "rsdn/airpls.hpp"     // IWYU pragma: export
#include "rsdn/wavelet.hpp"    // IWYU pragma: export
#include "rsdn/shrinkage.hpp"  // IWYU pragma: export
#include "rsdn/tensor.hpp"     // IWYU pragma: export
#include "rsdn/layers.hpp"     // IWYU pragma: export
#include "rsdn/network.hpp"    // IWYU pragma: export
#include "rsdn/train.hpp"      // IWYU pragma: export
#include "rsdn/checkpoint.hpp" // IWYU pragma: export
#include "rsdn/bench.hpp"      // IWYU pragma: export
