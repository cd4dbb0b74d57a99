#pragma once

#include "cfs/types.hpp"
#include "cfs/geometry.hpp"
#include "cfs/worldfunc.hpp"
#include "cfs/bitensor.hpp"
#include "cfs/bessel.hpp"
#include "cfs/symbols.hpp"
#include "cfs/regfield.hpp"
#include "cfs/sdw.hpp"
#include "cfs/dirac.hpp"
#include "cfs/projector.hpp"
#include "cfs/action.hpp"
#include "cfs/verify.hpp"
