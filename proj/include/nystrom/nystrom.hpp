#pragma once

// Umbrella header: column-sampled SPSD approximation, coherence analysis,
// synthetic matrix generation and the experiment harness.

#include "nystrom/approximation.hpp"
#include "nystrom/coherence.hpp"
#include "nystrom/errors.hpp"
#include "nystrom/experiments.hpp"
#include "nystrom/kernels.hpp"
#include "nystrom/matrix.hpp"
#include "nystrom/matrix_io.hpp"
#include "nystrom/rng.hpp"
#include "nystrom/spectral.hpp"
#include "nystrom/synth.hpp"
