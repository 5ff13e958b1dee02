#pragma once

#include "kinchem/common.hpp"
#include "kinchem/quadrature.hpp"
#include "kinchem/velocity.hpp"
#include "kinchem/chemfield.hpp"
#include "kinchem/kinsolver.hpp"
#include "kinchem/thresholds.hpp"
#include "kinchem/diagnostics.hpp"
#include "kinchem/comparison.hpp"
#include "kinchem/initial_data.hpp"
#include "kinchem/parabolic.hpp"
#include "kinchem/oracles.hpp"
#include "kinchem/checkpoint.hpp"
#include "kinchem/config.hpp"
#include "kinchem/simulate.hpp"
