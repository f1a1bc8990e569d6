#pragma once

#include "mycosys/channel.hpp"
#include "mycosys/error.hpp"
#include "mycosys/narx.hpp"
#include "mycosys/pipeline.hpp"
#include "mycosys/recording_io.hpp"
#include "mycosys/spectral.hpp"
#include "mycosys/stats.hpp"
#include "mycosys/timeseries.hpp"
