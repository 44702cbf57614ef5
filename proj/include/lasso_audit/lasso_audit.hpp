#pragma once

#include "errors.hpp"
#include "rng.hpp"
#include "linalg.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "constants.hpp"
#include "solvers.hpp"
#include "estimators.hpp"
#include "lasso.hpp"
#include "implications.hpp"
#include "experiments.hpp"
