/// @file plot.hpp
/// @brief SVG heatmaps of one time slice of a scalar field.
#pragma once

#include <string>

#include "llab/grid.hpp"

namespace llab {

/// One rectangle per node, linear colour scale between the slice min and max.
std::string heatmap_svg(const ScalarField& f, std::size_t level, const std::string& title);

}  // namespace llab
