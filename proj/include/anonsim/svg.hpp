#pragma once

#include <string>
#include <vector>

#include "anonsim/io.hpp"
#include "anonsim/metrics.hpp"

namespace anonsim {

struct PlotOptions {
    int width = 640;
    int height = 560;
    std::string title = "Detection region";
};

/// Recall on x, precision on y. Draws D = R and D = R^2, the p^2 / p corner
/// when lower-bound rows are present, every other bound as a guide line, and
/// each point with 2-stderr error bars. Output depends only on the inputs.
std::string render_region_svg(const std::vector<DetectionPoint>& points,
                              const std::vector<BoundRow>& bounds, const PlotOptions& options = {});

}  // namespace anonsim
