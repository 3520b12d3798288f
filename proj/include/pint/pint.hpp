#pragma once

#include "pint/error.hpp"
#include "pint/rng.hpp"
#include "pint/csv.hpp"
#include "pint/grid.hpp"
#include "pint/synth.hpp"
#include "pint/field.hpp"
#include "pint/persistence.hpp"
#include "pint/intensity.hpp"
#include "pint/analyze.hpp"
#include "pint/parallel.hpp"
#include "pint/pipeline.hpp"
#include "pint/diagram_process.hpp"
#include "pint/inference.hpp"
#include "pint/experiment.hpp"
