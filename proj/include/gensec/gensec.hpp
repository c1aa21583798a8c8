#pragma once

#include "gensec/bench.hpp"
#include "gensec/divided_difference.hpp"
#include "gensec/errors.hpp"
#include "gensec/feasible_set.hpp"
#include "gensec/numerics.hpp"
#include "gensec/problem_io.hpp"
#include "gensec/set_valued.hpp"
#include "gensec/solver.hpp"
