#pragma once

#include "su11/calib.hpp"
#include "su11/grid.hpp"
#include "su11/metrology.hpp"
#include "su11/optics.hpp"
#include "su11/planewave.hpp"
#include "su11/schmidt.hpp"
#include "su11/solver.hpp"
#include "su11/types.hpp"
