#pragma once

#include "tacoma/cotrain.hpp"
#include "tacoma/dataset.hpp"
#include "tacoma/error.hpp"
#include "tacoma/forest.hpp"
#include "tacoma/formats.hpp"
#include "tacoma/glcm.hpp"
#include "tacoma/mask.hpp"
#include "tacoma/pipeline.hpp"
#include "tacoma/raster.hpp"
#include "tacoma/rng.hpp"
#include "tacoma/salience.hpp"
#include "tacoma/split.hpp"
#include "tacoma/synth.hpp"
#include "tacoma/theory.hpp"
