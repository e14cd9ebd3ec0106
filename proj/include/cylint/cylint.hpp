#pragma once

// Umbrella header: the whole library in dependency order.

#include "cylint/errors.hpp"
#include "cylint/hilbert.hpp"
#include "cylint/rng.hpp"
#include "cylint/mc.hpp"
#include "cylint/characteristics.hpp"
#include "cylint/sampler.hpp"
#include "cylint/radonify.hpp"
#include "cylint/integrate.hpp"
#include "cylint/spde.hpp"
#include "cylint/fixtures.hpp"
#include "cylint/config.hpp"
#include "cylint/report.hpp"
#include "cylint/scenario.hpp"
#include "cylint/driver.hpp"
