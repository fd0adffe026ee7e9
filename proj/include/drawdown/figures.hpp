#pragma once

#include <string>
#include <vector>

#include "drawdown/value_surface.hpp"

namespace drawdown {

// Emits the plotted quantities of the paper's figures as CSV files
// (no rendering): domain boundaries, integral-curve families, the z(m)
// curve, strategy and value slices, and the gap to the ruin strategy.
// Returns the paths written.
std::vector<std::string> write_figure_data(int which, const ValueSurface& s,
                                           const std::string& out_dir);

}  // namespace drawdown
