#pragma once

#include "quanta/circstats.hpp"
#include "quanta/error.hpp"
#include "quanta/geometry.hpp"
#include "quanta/gridfit.hpp"
#include "quanta/measurements.hpp"
#include "quanta/postholes.hpp"
#include "quanta/quantogram.hpp"
#include "quanta/random.hpp"
#include "quanta/rasterclean.hpp"
