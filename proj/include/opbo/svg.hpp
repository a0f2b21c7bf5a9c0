#ifndef OPBO_SVG_HPP
#define OPBO_SVG_HPP

#include <string>
#include <vector>

namespace opbo {

/// One algorithm's convergence summary: median incumbent against cumulative
/// evaluations, with an optional interquartile band (empty lower/upper means
/// no band, e.g. single-trial cells).
struct SeriesBand {
  std::string label;
  std::vector<double> x;
  std::vector<double> median;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Self-contained SVG convergence chart. Output is byte-deterministic for
/// identical input: fixed palette, fixed tick layout, fixed "%.6g" number
/// formatting. Every median polyline carries class="median" and every band
/// polygon class="band" so consumers can count them.
std::string render_convergence_svg(const std::string& title,
                                   const std::vector<SeriesBand>& series);

}  // namespace opbo

#endif  // OPBO_SVG_HPP
