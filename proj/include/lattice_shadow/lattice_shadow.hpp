#pragma once

#include "lattice_shadow/config.hpp"
#include "lattice_shadow/csv.hpp"
#include "lattice_shadow/dynamics.hpp"
#include "lattice_shadow/errors.hpp"
#include "lattice_shadow/experiments.hpp"
#include "lattice_shadow/fit.hpp"
#include "lattice_shadow/lattice.hpp"
#include "lattice_shadow/oscillatory.hpp"
#include "lattice_shadow/potential.hpp"
#include "lattice_shadow/residuals.hpp"
#include "lattice_shadow/trajectory.hpp"
#include "lattice_shadow/version.hpp"
