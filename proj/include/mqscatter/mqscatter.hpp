#pragma once

// Umbrella header for the mqscatter library.

#include "constants.hpp"
#include "dataset.hpp"
#include "fitting.hpp"
#include "gate_errors.hpp"
#include "half_int.hpp"
#include "laser.hpp"
#include "protocol.hpp"
#include "rate_matrix.hpp"
#include "rng.hpp"
#include "scattering.hpp"
#include "species.hpp"
#include "wigner.hpp"
