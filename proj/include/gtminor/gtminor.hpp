#pragma once

/// Umbrella header for the library (the CLI front end lives in cli.hpp).

#include "gt_pattern.hpp"
#include "io.hpp"
#include "kernel_ct.hpp"
#include "kernel_dt.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sim_matrix.hpp"
#include "sim_particles.hpp"
#include "sim_warren.hpp"
#include "verify.hpp"
