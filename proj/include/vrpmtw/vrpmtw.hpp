#pragma once

// Everything: model, generator, construction, operators, search drivers,
// exact oracle, neural policy and bench harness.

#include "bench.hpp"
#include "construct.hpp"
#include "exact.hpp"
#include "gen.hpp"
#include "io.hpp"
#include "model.hpp"
#include "neural.hpp"
#include "operators.hpp"
#include "rng.hpp"
#include "search.hpp"
