#pragma once

/* Umbrella header: numerical solution and simulation of two-player
 * zero-sum exit-time differential games with three exit costs. */

#include "exitgame/core.hpp"
#include "exitgame/problem.hpp"
#include "exitgame/grid.hpp"
#include "exitgame/hamiltonian.hpp"
#include "exitgame/solver.hpp"
#include "exitgame/signal.hpp"
#include "exitgame/strategy.hpp"
#include "exitgame/simulator.hpp"
#include "exitgame/oracle.hpp"
