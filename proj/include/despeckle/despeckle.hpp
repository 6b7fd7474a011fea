#pragma once

#include "despeckle/baselines.hpp"
#include "despeckle/errors.hpp"
#include "despeckle/image.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/nlm.hpp"
#include "despeckle/noise.hpp"
#include "despeckle/parallel.hpp"
#include "despeckle/pgm.hpp"
#include "despeckle/pipeline.hpp"
