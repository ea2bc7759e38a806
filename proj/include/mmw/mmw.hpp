#pragma once

#include "antenna.hpp"
#include "association.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "interference.hpp"
#include "link.hpp"
#include "mfg.hpp"
#include "montecarlo.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "utility_table.hpp"
