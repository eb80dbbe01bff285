#include "rlg/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rlg/error.hpp"
#include "rlg/io/csv.hpp"

namespace rlg {

namespace {

constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

// Roughly five round-numbered ticks covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
  return ticks;
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_svg(const SvgPlot& plot, std::uint64_t seed) {
  double xlo = INFINITY, xhi = -INFINITY, ymax = 0.0;
  std::vector<double> bar_heights;
  if (plot.histogram) {
    const auto& h = *plot.histogram;
    if (h.counts.empty() || h.edges.size() != h.counts.size() + 1)
      throw Error(ErrorCode::InvalidArgument, "svg: malformed histogram");
    xlo = h.edges.front();
    xhi = h.edges.back();
    const double n = h.total > 0 ? static_cast<double>(h.total) : 1.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      bar_heights.push_back(static_cast<double>(h.counts[i]) / (n * (h.edges[i + 1] - h.edges[i])));
      ymax = std::max(ymax, bar_heights.back());
    }
  }
  for (const auto& c : plot.curves) {
    if (c.xs.size() != c.ys.size() || c.xs.size() < 2)
      throw Error(ErrorCode::InvalidArgument, "svg: curve '" + c.label + "' needs matching xs/ys of length >= 2");
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
      if (!std::isfinite(c.xs[i]) || !std::isfinite(c.ys[i]))
        throw Error(ErrorCode::NonFinite, "svg: curve '" + c.label + "' has non-finite points");
      xlo = std::min(xlo, c.xs[i]);
      xhi = std::max(xhi, c.xs[i]);
      ymax = std::max(ymax, c.ys[i]);
    }
  }
  if (!(xhi > xlo)) throw Error(ErrorCode::InvalidArgument, "svg: nothing to plot");
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.05;

  const double pw = plot.width - kLeft - kRight, ph = plot.height - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  auto sy = [&](double y) { return kTop + ph - y / ymax * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<!-- " << provenance_line(seed).substr(2) << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\"" << plot.height
     << "\" viewBox=\"0 0 " << plot.width << ' ' << plot.height << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << plot.width << "\" height=\"" << plot.height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << xml_escape(plot.title) << "</text>\n";

  if (plot.histogram) {
    const auto& h = *plot.histogram;
    os << "<g fill=\"#9ecae1\" stroke=\"#6baed6\" stroke-width=\"0.5\">\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      if (h.counts[i] == 0) continue;
      const double x0 = sx(h.edges[i]), x1 = sx(h.edges[i + 1]), y = sy(bar_heights[i]);
      os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(x1 - x0) << "\" height=\""
         << num(kTop + ph - y) << "\"/>\n";
    }
    os << "</g>\n";
  }
  for (const auto& c : plot.curves) {
    os << "<path fill=\"none\" stroke=\"" << xml_escape(c.color) << "\" stroke-width=\"2\" d=\"";
    for (std::size_t i = 0; i < c.xs.size(); ++i) os << (i ? " L" : "M") << num(sx(c.xs[i])) << ',' << num(sy(c.ys[i]));
    os << "\"/>\n";
  }

  // axes
  os << "<g stroke=\"black\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
     << num(kTop + ph) << "\"/>\n";
  os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
     << num(kTop + ph) << "\"/>\n";
  const auto xt = nice_ticks(xlo, xhi);
  const auto yt = nice_ticks(0.0, ymax);
  for (double t : xt)
    os << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(sx(t)) << "\" y2=\""
       << num(kTop + ph + 5) << "\"/>\n";
  for (double t : yt)
    os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
       << num(sy(t)) << "\"/>\n";
  os << "</g>\n<g font-size=\"11\" fill=\"black\">\n";
  for (double t : xt)
    os << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
       << tick_label(t) << "</text>\n";
  for (double t : yt)
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(sy(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
       << "</text>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(plot.height - 12.0)
     << "\" text-anchor=\"middle\">" << xml_escape(plot.x_label) << "</text>\n";
  double ly = kTop + 12;
  for (const auto& c : plot.curves) {
    os << "<text x=\"" << num(kLeft + pw - 4) << "\" y=\"" << num(ly) << "\" text-anchor=\"end\" fill=\""
       << xml_escape(c.color) << "\">" << xml_escape(c.label) << "</text>\n";
    ly += 14;
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void write_svg_file(const std::string& path, const SvgPlot& plot, std::uint64_t seed) {
  const std::string doc = render_svg(plot, seed);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  f << doc;
  if (!f) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace rlg
