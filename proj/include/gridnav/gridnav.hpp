#ifndef GRIDNAV_GRIDNAV_HPP
#define GRIDNAV_GRIDNAV_HPP

#include "gridnav/controller.hpp"
#include "gridnav/dataset.hpp"
#include "gridnav/env.hpp"
#include "gridnav/episode.hpp"
#include "gridnav/error.hpp"
#include "gridnav/explore.hpp"
#include "gridnav/geometry.hpp"
#include "gridnav/grid_map.hpp"
#include "gridnav/map_gen.hpp"
#include "gridnav/memory.hpp"
#include "gridnav/metrics.hpp"
#include "gridnav/planner.hpp"
#include "gridnav/rng.hpp"
#include "gridnav/synth.hpp"
#include "gridnav/time_model.hpp"
#include "gridnav/util.hpp"

#endif
