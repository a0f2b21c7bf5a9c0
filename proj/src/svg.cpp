#include "opbo/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "opbo/errors.hpp"

namespace opbo {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 780.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 450.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double margin = 0.04 * (hi - lo);
      lo -= margin;
      hi += margin;
    }
  }
};

}  // namespace

std::string render_convergence_svg(const std::string& title,
                                   const std::vector<SeriesBand>& series) {
  Range xr;
  Range yr;
  for (const auto& s : series) {
    if (s.x.size() != s.median.size()) {
      throw LengthMismatch("render_convergence_svg: x/median length mismatch");
    }
    const bool banded = !s.lower.empty();
    if (banded && (s.lower.size() != s.x.size() || s.upper.size() != s.x.size())) {
      throw LengthMismatch("render_convergence_svg: band length mismatch");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xr.include(s.x[i]);
      yr.include(s.median[i]);
      if (banded) {
        yr.include(s.lower[i]);
        yr.include(s.upper[i]);
      }
    }
  }
  xr.pad();
  yr.pad();

  const auto px = [&](double v) {
    return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft);
  };
  const auto py = [&](double v) {
    return kBottom - (v - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 "
      << fmt(kWidth) << " " << fmt(kHeight) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\""
      << fmt(kHeight) << "\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\"22\" "
      << "font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
      << escape_xml(title) << "</text>\n";

  // Axes with five ticks per side.
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom)
      << "\" x2=\"" << fmt(kRight) << "\" y2=\"" << fmt(kBottom)
      << "\" stroke=\"#000000\"/>\n";
  out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
      << fmt(kLeft) << "\" y2=\"" << fmt(kBottom) << "\" stroke=\"#000000\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
    out << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << fmt(kBottom)
        << "\" x2=\"" << fmt(px(fx)) << "\" y2=\"" << fmt(kBottom + 5)
        << "\" stroke=\"#000000\"/>\n";
    out << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(kBottom + 20)
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">"
        << fmt(fx) << "</text>\n";
    out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(py(fy))
        << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(py(fy))
        << "\" stroke=\"#000000\"/>\n";
    out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py(fy) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"end\">"
        << fmt(fy) << "</text>\n";
  }
  out << "<text x=\"" << fmt((kLeft + kRight) / 2) << "\" y=\""
      << fmt(kHeight - 10)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">evaluations</text>\n";
  out << "<text x=\"16\" y=\"" << fmt((kTop + kBottom) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fmt((kTop + kBottom) / 2) << ")\">incumbent</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sb = series[s];
    const char* color = kPalette[s % kPaletteSize];
    if (!sb.lower.empty() && !sb.x.empty()) {
      out << "<polygon class=\"band\" fill=\"" << color
          << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < sb.x.size(); ++i) {
        out << fmt(px(sb.x[i])) << "," << fmt(py(sb.upper[i])) << " ";
      }
      for (std::size_t i = sb.x.size(); i-- > 0;) {
        out << fmt(px(sb.x[i])) << "," << fmt(py(sb.lower[i]));
        if (i > 0) out << " ";
      }
      out << "\"/>\n";
    }
    out << "<polyline class=\"median\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sb.x.size(); ++i) {
      out << fmt(px(sb.x[i])) << "," << fmt(py(sb.median[i]));
      if (i + 1 < sb.x.size()) out << " ";
    }
    out << "\"/>\n";
    const double ly = kTop + 18.0 * static_cast<double>(s);
    out << "<rect x=\"" << fmt(kRight - 150) << "\" y=\"" << fmt(ly)
        << "\" width=\"12\" height=\"4\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << fmt(kRight - 132) << "\" y=\"" << fmt(ly + 6)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape_xml(sb.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace opbo
