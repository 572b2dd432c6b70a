#pragma once

// Umbrella header.
#include "ifport/bounds.hpp"
#include "ifport/error.hpp"
#include "ifport/fuzzy.hpp"
#include "ifport/market_model.hpp"
#include "ifport/objectives.hpp"
#include "ifport/oracle.hpp"
#include "ifport/sampling.hpp"
#include "ifport/solver.hpp"
#include "ifport/types.hpp"
