#pragma once

#include "mycosys/narx/candidates.hpp"
#include "mycosys/narx/frols.hpp"
#include "mycosys/narx/grid_search.hpp"
#include "mycosys/narx/model.hpp"
#include "mycosys/narx/serialize.hpp"
#include "mycosys/narx/simulate.hpp"
