#pragma once

#include "gpsurv/comparison.hpp"
#include "gpsurv/config.hpp"
#include "gpsurv/data.hpp"
#include "gpsurv/diagnostics.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/io.hpp"
#include "gpsurv/likelihood.hpp"
#include "gpsurv/numeric.hpp"
#include "gpsurv/priors.hpp"
#include "gpsurv/random.hpp"
#include "gpsurv/rjmcmc.hpp"
#include "gpsurv/simulate.hpp"
#include "gpsurv/study.hpp"
