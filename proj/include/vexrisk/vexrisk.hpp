#pragma once

#include "vexrisk/dual.hpp"
#include "vexrisk/dynamic.hpp"
#include "vexrisk/fixtures.hpp"
#include "vexrisk/oce.hpp"
#include "vexrisk/ordered.hpp"
#include "vexrisk/random.hpp"
#include "vexrisk/report.hpp"
#include "vexrisk/scenario.hpp"
#include "vexrisk/space.hpp"
#include "vexrisk/varexp.hpp"
