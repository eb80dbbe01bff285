#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlg/eval/metrics.hpp"

namespace rlg {

struct SvgCurve {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  std::string color = "#d62728";
};

struct SvgPlot {
  std::string title;
  std::string x_label = "x";
  std::optional<Histogram> histogram;  // drawn as a density
  std::vector<SvgCurve> curves;
  int width = 640;
  int height = 400;
};

// Standalone SVG document: histogram bars, one <path> per curve, axes with
// ticks and a legend.
std::string render_svg(const SvgPlot& plot, std::uint64_t seed);
void write_svg_file(const std::string& path, const SvgPlot& plot, std::uint64_t seed);

std::string xml_escape(const std::string& text);

}  // namespace rlg
