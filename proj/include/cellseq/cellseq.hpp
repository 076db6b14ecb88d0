#pragma once

#include "cellseq/cell_complex.hpp"
#include "cellseq/diagnostics.hpp"
#include "cellseq/examples.hpp"
#include "cellseq/geometry.hpp"
#include "cellseq/io.hpp"
#include "cellseq/level_cells.hpp"
#include "cellseq/realization.hpp"
#include "cellseq/reports.hpp"
#include "cellseq/subdivision_rule.hpp"
#include "cellseq/visual_metric.hpp"
