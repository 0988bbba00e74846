#pragma once

// Umbrella header.

#include "assembly.hpp"
#include "coupling.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "harness/darcy.hpp"
#include "harness/experiment.hpp"
#include "harness/fields.hpp"
#include "harness/raster.hpp"
#include "harness/report.hpp"
#include "linalg.hpp"
#include "numerics.hpp"
#include "test_space.hpp"
#include "trial_space.hpp"
#include "harness/validation.hpp"
