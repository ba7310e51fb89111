#pragma once

#include "detect_io.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "geojson.hpp"
#include "geometry.hpp"
#include "labels.hpp"
#include "manifest_io.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "png_io.hpp"
#include "process.hpp"
#include "raster.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "stitch.hpp"
#include "synth.hpp"
#include "text.hpp"
#include "tiling.hpp"
#include "upscale_exchange.hpp"
