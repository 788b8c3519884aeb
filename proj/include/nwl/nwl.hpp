#pragma once

#include "nwl/errors.hpp"
#include "nwl/symbols.hpp"
#include "nwl/spectral.hpp"
#include "nwl/kernel.hpp"
#include "nwl/solver.hpp"
#include "nwl/symmetry.hpp"
#include "nwl/evolution.hpp"
#include "nwl/io.hpp"
