// qds.hpp: umbrella header

#pragma once

#include "qds/asymptotic.hpp"
#include "qds/classical.hpp"
#include "qds/classical_bridge.hpp"
#include "qds/ergodicity.hpp"
#include "qds/io.hpp"
#include "qds/linalg.hpp"
#include "qds/model.hpp"
#include "qds/picard.hpp"
#include "qds/projections.hpp"
#include "qds/resolution.hpp"
#include "qds/spectral.hpp"
#include "qds/states.hpp"
#include "qds/types.hpp"
