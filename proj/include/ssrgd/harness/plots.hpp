// Self-contained SVG plots built from an aggregate and its cell traces.
//
// Every SVG carries a <metadata> element holding a JSON object with the run
// ids it was built from and the numeric axis extents.
#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ssrgd::harness {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  /// Axis extents in data units; computed from the data when left unset.
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
  nlohmann::json metadata = nlohmann::json::object();
};

std::string render_line_plot(const LinePlot& plot);

struct Bar {
  std::string label;
  double value = 0.0;  // in [0, 1]
  std::string note;
};

std::string render_bar_chart(const std::string& title, const std::string& y_label,
                             const std::vector<Bar>& bars, const nlohmann::json& metadata);

/// Writes plots under out_dir/plots plus plots/manifest.json and returns the
/// SVG paths. Trace paths in the aggregate are resolved against out_dir.
/// An aggregate without cells yields no SVG files and an empty manifest.
std::vector<std::string> emit_plots(const nlohmann::json& aggregate, const std::string& out_dir);

std::string xml_escape(const std::string& text);

}  // namespace ssrgd::harness
