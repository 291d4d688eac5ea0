#pragma once

#include "seaice/adf.hpp"
#include "seaice/calendar.hpp"
#include "seaice/causality.hpp"
#include "seaice/config.hpp"
#include "seaice/correlogram.hpp"
#include "seaice/dlm.hpp"
#include "seaice/errors.hpp"
#include "seaice/harmonic.hpp"
#include "seaice/hurst.hpp"
#include "seaice/ingest.hpp"
#include "seaice/lasso.hpp"
#include "seaice/pipeline.hpp"
#include "seaice/plots.hpp"
#include "seaice/regress.hpp"
#include "seaice/series.hpp"
#include "seaice/summary.hpp"
