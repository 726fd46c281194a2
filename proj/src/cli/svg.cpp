#include <algorithm>
#include <numeric>
#include <sstream>

#include "rankinfer/cli.hpp"

namespace rankinfer::cli {

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
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

// Layout, in px.
constexpr double kLeft = 170.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 50.0;
constexpr double kRowHeight = 22.0;
constexpr double kPlotWidth = 560.0;

int tick_step(std::size_t p) {
  for (int step : {1, 2, 5, 10, 20, 25, 50, 100, 200, 250, 500, 1000}) {
    if (static_cast<double>(p) / step <= 12.0) return step;
  }
  return static_cast<int>(p / 10);
}

}  // namespace

std::string render_interval_chart(const RankConfidenceSet& cs,
                                  const std::vector<std::string>& labels, std::string_view title) {
  const std::size_t rows = cs.populations.size();
  const std::size_t p = std::max<std::size_t>(cs.p, 1);
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cs.rank[a] < cs.rank[b] || (cs.rank[a] == cs.rank[b] && cs.populations[a] < cs.populations[b]);
  });

  const double width = kLeft + kPlotWidth + kRight;
  const double height = kTop + kRowHeight * static_cast<double>(std::max<std::size_t>(rows, 1)) + kBottom;
  auto x_of = [&](double rank) {
    if (p == 1) return kLeft + kPlotWidth / 2.0;
    return kLeft + (rank - 1.0) / static_cast<double>(p - 1) * kPlotWidth;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(width)
      << "\" height=\"" << format_number(height) << "\" viewBox=\"0 0 " << format_number(width)
      << " " << format_number(height) << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << format_number(width) << "\" height=\""
      << format_number(height) << "\" fill=\"white\"/>\n";
  svg << "  <text x=\"" << format_number(kLeft) << "\" y=\"24\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << xml_escape(title) << "</text>\n";

  const double axis_y = kTop + kRowHeight * static_cast<double>(std::max<std::size_t>(rows, 1));
  svg << "  <g class=\"axis\" stroke=\"#444\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "    <line x1=\"" << format_number(kLeft) << "\" y1=\"" << format_number(axis_y)
      << "\" x2=\"" << format_number(kLeft + kPlotWidth) << "\" y2=\"" << format_number(axis_y)
      << "\"/>\n";
  const int step = tick_step(p);
  for (std::size_t r = 1; r <= p; ++r) {
    if (r != 1 && r % static_cast<std::size_t>(step) != 0 && r != p) continue;
    const double x = x_of(static_cast<double>(r));
    svg << "    <line x1=\"" << format_number(x) << "\" y1=\"" << format_number(axis_y)
        << "\" x2=\"" << format_number(x) << "\" y2=\"" << format_number(axis_y + 5) << "\"/>\n";
    svg << "    <text x=\"" << format_number(x) << "\" y=\"" << format_number(axis_y + 18)
        << "\" text-anchor=\"middle\" stroke=\"none\">" << r << "</text>\n";
  }
  svg << "    <text x=\"" << format_number(kLeft + kPlotWidth / 2) << "\" y=\""
      << format_number(axis_y + 38) << "\" text-anchor=\"middle\" stroke=\"none\">rank</text>\n";
  svg << "  </g>\n";

  svg << "  <g class=\"intervals\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t row = 0; row < rows; ++row) {
    const std::size_t i = order[row];
    const std::size_t pop = cs.populations[i];
    const std::string name = pop < labels.size() && !labels[pop].empty()
                                 ? labels[pop]
                                 : "population " + std::to_string(pop + 1);
    const double y = kTop + kRowHeight * (static_cast<double>(row) + 0.5);
    svg << "    <text x=\"" << format_number(kLeft - 10) << "\" y=\"" << format_number(y + 4)
        << "\" text-anchor=\"end\">" << xml_escape(name) << "</text>\n";
    svg << "    <line class=\"interval\" x1=\"" << format_number(x_of(cs.lower[i])) << "\" y1=\""
        << format_number(y) << "\" x2=\"" << format_number(x_of(cs.upper[i])) << "\" y2=\""
        << format_number(y) << "\" stroke=\"#1f77b4\" stroke-width=\"4\" "
        << "stroke-linecap=\"round\"/>\n";
    svg << "    <circle class=\"estimate\" cx=\"" << format_number(x_of(cs.rank[i])) << "\" cy=\""
        << format_number(y) << "\" r=\"4\" fill=\"black\"/>\n";
  }
  svg << "  </g>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rankinfer::cli
