#pragma once

// Umbrella header.

#include "rcwave/errors.hpp"
#include "rcwave/gas.hpp"
#include "rcwave/characters.hpp"
#include "rcwave/ode.hpp"
#include "rcwave/affine.hpp"
#include "rcwave/scenario.hpp"
#include "rcwave/solver.hpp"
#include "rcwave/verify.hpp"
#include "rcwave/config.hpp"
#include "rcwave/io.hpp"
#include "rcwave/driver.hpp"
