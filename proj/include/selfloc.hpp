#pragma once

#include "selfloc/error.hpp"
#include "selfloc/policy.hpp"
#include "selfloc/combinatorics.hpp"
#include "selfloc/polynomial.hpp"
#include "selfloc/simulation.hpp"
#include "selfloc/dependence.hpp"
#include "selfloc/problem.hpp"
#include "selfloc/chain.hpp"
#include "selfloc/beliefs.hpp"
#include "selfloc/cdt.hpp"
#include "selfloc/simcompile.hpp"
#include "selfloc/montecarlo.hpp"
#include "selfloc/io.hpp"
#include "selfloc/fixtures.hpp"
#include "selfloc/verify.hpp"
