#pragma once

// Pseudospectral quantum-fluid laboratory: wave-equation evolution, Madelung
// hydrodynamics, and acoustic-analogy verification of the density equation.

#include "qlh/analytic.hpp"
#include "qlh/config.hpp"
#include "qlh/field.hpp"
#include "qlh/gpe.hpp"
#include "qlh/grid.hpp"
#include "qlh/hydro.hpp"
#include "qlh/io.hpp"
#include "qlh/lighthill.hpp"
#include "qlh/linear.hpp"
#include "qlh/madelung.hpp"
#include "qlh/physics.hpp"
#include "qlh/presets.hpp"
#include "qlh/residual.hpp"
#include "qlh/scenario.hpp"
#include "qlh/spectral.hpp"
