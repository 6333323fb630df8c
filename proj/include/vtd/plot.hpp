#pragma once

#include <optional>
#include <span>
#include <string>

#include "vtd/record.hpp"

namespace vtd::plot {

struct PlotOptions {
  double start_s = 0.0;
  std::optional<double> duration_s;  // whole record when empty
  int width_px = 1200;
  int height_px = 360;
  std::string title;
};

/// Standalone SVG: axis frame with time and amplitude ticks, the signal as
/// one <polyline>, and one <circle class="rpeak"> per R peak inside the
/// plotted window. A mean-HBR label is added when two or more peaks show.
std::string render_svg(const EcgRecord& record, std::span<const double> r_times_s,
                       const PlotOptions& opts = {});

}  // namespace vtd::plot
