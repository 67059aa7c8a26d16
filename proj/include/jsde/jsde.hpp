#pragma once

#include "jsde/approx.hpp"
#include "jsde/coeffs.hpp"
#include "jsde/errors.hpp"
#include "jsde/format.hpp"
#include "jsde/noise.hpp"
#include "jsde/parallel.hpp"
#include "jsde/paths.hpp"
#include "jsde/rng.hpp"
#include "jsde/scenario.hpp"
#include "jsde/solver.hpp"
#include "jsde/staircase.hpp"
#include "jsde/stats.hpp"
#include "jsde/system.hpp"
#include "jsde/time_grid.hpp"
#include "jsde/uniqueness.hpp"
#include "jsde/validate.hpp"
