#pragma once

#include "mvrecon/carve.hpp"
#include "mvrecon/error.hpp"
#include "mvrecon/eval.hpp"
#include "mvrecon/geometry.hpp"
#include "mvrecon/io.hpp"
#include "mvrecon/losses.hpp"
#include "mvrecon/mesh.hpp"
#include "mvrecon/parallel.hpp"
#include "mvrecon/posegraph.hpp"
#include "mvrecon/raster.hpp"
#include "mvrecon/scenario.hpp"
