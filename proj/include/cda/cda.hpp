#pragma once
/// @file cda.hpp
/// @brief Umbrella header.

#include "cda/errors.hpp"
#include "cda/mesh.hpp"
#include "cda/fields.hpp"
#include "cda/linalg.hpp"
#include "cda/pressure.hpp"
#include "cda/flux_postprocess.hpp"
#include "cda/transport.hpp"
#include "cda/observation.hpp"
#include "cda/raster.hpp"
#include "cda/scenarios.hpp"
#include "cda/driver.hpp"
