#pragma once

#include "pmmc/density.hpp"
#include "pmmc/diagnostics.hpp"
#include "pmmc/errors.hpp"
#include "pmmc/families.hpp"
#include "pmmc/hierarchy.hpp"
#include "pmmc/kernels.hpp"
#include "pmmc/marginal.hpp"
#include "pmmc/model.hpp"
#include "pmmc/presets.hpp"
#include "pmmc/problem.hpp"
#include "pmmc/reference.hpp"
#include "pmmc/rng.hpp"
