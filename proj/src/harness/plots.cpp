#include "ssrgd/harness/plots.hpp"

#include "ssrgd/harness/scaling.hpp"
#include "ssrgd/trace.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ssrgd::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
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

namespace {

constexpr double kWidth = 720, kHeight = 460;
constexpr double kLeft = 80, kRight = 180, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string header(const std::string& title, const json& metadata) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
     << "<title>" << xml_escape(title) << "</title>\n"
     << "<metadata id=\"plot-meta\">" << xml_escape(metadata.dump()) << "</metadata>\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << xml_escape(title) << "</text>\n";
  return os.str();
}

void axis_labels(std::ostringstream& os, const std::string& x_label, const std::string& y_label) {
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  os << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << px(kHeight - 14)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(x_label)
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << px(kTop + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\" transform=\"rotate(-90 18 "
     << px(kTop + ph / 2) << ")\">" << xml_escape(y_label) << "</text>\n";
}

}  // namespace

std::string render_line_plot(const LinePlot& plot) {
  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0);
  };
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : plot.series) {
    for (const auto& [x, y] : s.points) {
      if (!usable(x, y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (plot.x_range) std::tie(xmin, xmax) = *plot.x_range;
  if (plot.y_range) std::tie(ymin, ymax) = *plot.y_range;
  if (!(xmin <= xmax)) xmin = plot.log_x ? 1.0 : 0.0, xmax = plot.log_x ? 10.0 : 1.0;
  if (!(ymin <= ymax)) ymin = plot.log_y ? 1.0 : 0.0, ymax = plot.log_y ? 10.0 : 1.0;
  double ux0 = tx(xmin), ux1 = tx(xmax), uy0 = ty(ymin), uy1 = ty(ymax);
  if (ux1 == ux0) ux0 -= 0.5, ux1 += 0.5;
  if (uy1 == uy0) uy0 -= 0.5, uy1 += 0.5;

  json meta = plot.metadata;
  meta["x_extent"] = {xmin, xmax};
  meta["y_extent"] = {ymin, ymax};
  meta["log_x"] = plot.log_x;
  meta["log_y"] = plot.log_y;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (tx(v) - ux0) / (ux1 - ux0) * pw; };
  auto sy = [&](double v) { return kTop + ph - (ty(v) - uy0) / (uy1 - uy0) * ph; };

  std::ostringstream os;
  os << header(plot.title, meta);
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fu = ux0 + (ux1 - ux0) * k / 4.0;
    const double fv = uy0 + (uy1 - uy0) * k / 4.0;
    const double xv = plot.log_x ? std::pow(10.0, fu) : fu;
    const double yv = plot.log_y ? std::pow(10.0, fv) : fv;
    const double xp = kLeft + pw * k / 4.0, yp = kTop + ph - ph * k / 4.0;
    os << "<line x1=\"" << px(xp) << "\" y1=\"" << px(kTop + ph) << "\" x2=\"" << px(xp) << "\" y2=\""
       << px(kTop + ph + 5) << "\" stroke=\"#333\"/>\n"
       << "<text x=\"" << px(xp) << "\" y=\"" << px(kTop + ph + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << num(xv) << "</text>\n"
       << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(yp) << "\" x2=\"" << px(kLeft) << "\" y2=\""
       << px(yp) << "\" stroke=\"#333\"/>\n"
       << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(yp + 3)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(yv) << "</text>\n";
  }
  axis_labels(os, plot.x_label, plot.y_label);
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::ostringstream pts;
    std::size_t count = 0;
    std::pair<double, double> only;
    for (const auto& [x, y] : s.points) {
      if (!usable(x, y)) continue;
      only = {x, y};
      pts << (count++ ? " " : "") << px(sx(x)) << "," << px(sy(y));
    }
    if (count == 1) {
      const auto [x, y] = only;
      os << "<circle cx=\"" << px(sx(x)) << "\" cy=\"" << px(sy(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    } else if (count > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\""
         << pts.str() << "\"/>\n";
    }
    if (i < 12) {
      const double ly = kTop + 12 + 16 * static_cast<double>(i);
      os << "<line x1=\"" << px(kWidth - kRight + 10) << "\" y1=\"" << px(ly) << "\" x2=\""
         << px(kWidth - kRight + 30) << "\" y2=\"" << px(ly) << "\" stroke=\"" << color
         << "\" stroke-width=\"2\"/>\n"
         << "<text x=\"" << px(kWidth - kRight + 34) << "\" y=\"" << px(ly + 4)
         << "\" font-family=\"sans-serif\" font-size=\"10\">" << xml_escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_bar_chart(const std::string& title, const std::string& y_label,
                             const std::vector<Bar>& bars, const json& metadata) {
  std::ostringstream os;
  os << header(title, metadata);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yp = kTop + ph - ph * k / 4.0;
    os << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(yp + 3)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(k / 4.0) << "</text>\n";
  }
  const double slot = bars.empty() ? pw : pw / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double v = std::clamp(bars[i].value, 0.0, 1.0);
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double h = v * ph;
    os << "<rect x=\"" << px(x) << "\" y=\"" << px(kTop + ph - h) << "\" width=\"" << px(slot * 0.7)
       << "\" height=\"" << px(h) << "\" fill=\"" << kPalette[i % std::size(kPalette)] << "\"/>\n"
       << "<text x=\"" << px(x + slot * 0.35) << "\" y=\"" << px(kTop + ph + 16)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << xml_escape(bars[i].label)
       << "</text>\n"
       << "<text x=\"" << px(x + slot * 0.35) << "\" y=\"" << px(kTop + ph - h - 4)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << xml_escape(bars[i].note)
       << "</text>\n";
  }
  axis_labels(os, "optimizer", y_label);
  os << "</svg>\n";
  return os.str();
}

namespace {

constexpr std::size_t kMaxPointsPerSeries = 2000;

std::vector<std::pair<double, double>> thin(std::vector<std::pair<double, double>> pts) {
  if (pts.size() <= kMaxPointsPerSeries) return pts;
  std::vector<std::pair<double, double>> out;
  const double stride = static_cast<double>(pts.size() - 1) / static_cast<double>(kMaxPointsPerSeries - 1);
  for (std::size_t k = 0; k < kMaxPointsPerSeries; ++k) {
    out.push_back(pts[static_cast<std::size_t>(std::llround(stride * static_cast<double>(k)))]);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_error, "cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::vector<std::string> emit_plots(const json& aggregate, const std::string& out_dir) {
  const fs::path root(out_dir);
  const fs::path dir = root / "plots";
  fs::create_directories(dir);
  std::vector<std::string> files;
  json manifest = json{{"files", json::array()}};
  auto emit = [&](const std::string& name, const std::string& kind, const std::string& svg,
                  const std::vector<std::string>& ids) {
    write_file(dir / name, svg);
    files.push_back((dir / name).string());
    manifest["files"].push_back({{"file", name}, {"kind", kind}, {"run_ids", ids}});
  };

  const json cells = aggregate.value("cells", json::array());
  if (!cells.empty()) {
    LinePlot f_plot;
    f_plot.title = "objective vs SFO";
    f_plot.x_label = "SFO (component gradients)";
    f_plot.y_label = "f(x)";
    LinePlot g_plot;
    g_plot.title = "gradient norm at epoch anchors vs SFO";
    g_plot.x_label = f_plot.x_label;
    g_plot.y_label = "||grad f|| (log scale)";
    g_plot.log_y = true;
    std::vector<std::string> ids;
    for (const auto& c : cells) {
      const std::string id = c.value("run_id", "");
      ids.push_back(id);
      std::vector<TraceRecord> trace;
      std::ifstream in(root / c.value("trace", ""));
      if (in) {
        try {
          trace = read_trace_csv(in);
        } catch (const Error&) {
          trace.clear();
        }
      }
      Series fs_{c.value("optimizer", "") + " s" + std::to_string(c.value("seed", 0)) + " " + id.substr(0, 6), {}};
      Series gs = fs_;
      for (const auto& row : trace) {
        fs_.points.emplace_back(static_cast<double>(row.sfo_count), row.f_value);
        if (row.grad_norm && *row.grad_norm > 0.0) {
          gs.points.emplace_back(static_cast<double>(row.sfo_count), *row.grad_norm);
        }
      }
      fs_.points = thin(std::move(fs_.points));
      gs.points = thin(std::move(gs.points));
      f_plot.series.push_back(std::move(fs_));
      g_plot.series.push_back(std::move(gs));
    }
    f_plot.metadata["run_ids"] = ids;
    g_plot.metadata["run_ids"] = ids;
    emit("f_vs_sfo.svg", "f_vs_sfo", render_line_plot(f_plot), ids);
    emit("grad_norm_vs_sfo.svg", "grad_norm_vs_sfo", render_line_plot(g_plot), ids);

    // Escape rates appear only when some optimizer targets second-order points.
    bool any_second = false;
    for (const auto& c : cells) any_second = any_second || c.value("second_order", false);
    if (any_second) {
      std::vector<std::string> names;
      for (const auto& c : cells) {
        const std::string name = c.value("optimizer", "");
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      }
      std::vector<Bar> bars;
      json rates = json::object();
      for (const auto& name : names) {
        std::uint64_t hits = 0, total = 0;
        for (const auto& c : cells) {
          if (c.value("optimizer", "") != name) continue;
          ++total;
          if (c.contains("is_sosp") && c["is_sosp"].is_boolean() && c["is_sosp"].get<bool>()) ++hits;
        }
        const double rate = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
        bars.push_back({name, rate, std::to_string(hits) + "/" + std::to_string(total)});
        rates[name] = rate;
      }
      json meta{{"run_ids", ids}, {"rates", rates}};
      emit("escape_rate.svg", "escape_rate",
           render_bar_chart("fraction of runs ending at a certified SOSP", "escape rate", bars, meta), ids);
    }

    const json sweep = aggregate.value("sweep", json::object());
    const std::string axis_name = sweep.value("axis", "none");
    const SweepAxis axis = axis_name == "eps" ? SweepAxis::eps : axis_name == "n" ? SweepAxis::n : SweepAxis::none;
    std::vector<double> grid;
    if (axis == SweepAxis::eps) grid = sweep.value("eps_grid", std::vector<double>{});
    if (axis == SweepAxis::n) {
      for (auto v : sweep.value("n_grid", std::vector<std::uint64_t>{})) grid.push_back(static_cast<double>(v));
    }
    if (axis != SweepAxis::none && grid.size() >= 3) {
      std::vector<ScalingFit> fits;
      try {
        fits = scaling_report(aggregate, axis);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::insufficient_data) throw;
        manifest["skipped"].push_back({{"kind", "scaling"}, {"reason", e.what()}});
      }
      const auto [gmin, gmax] = std::minmax_element(grid.begin(), grid.end());
      for (std::size_t k = 0; k < fits.size(); ++k) {
        const ScalingFit& fit = fits[k];
        LinePlot sp;
        sp.log_x = sp.log_y = true;
        sp.title = fit.optimizer + " on " + fit.problem + ": slope " + num(fit.slope);
        sp.y_label = axis == SweepAxis::eps ? "SFO to eps-FOSP" : "SFO to eps-FOSP minus n";
        sp.x_label = axis == SweepAxis::eps ? "1/eps" : "n";
        auto to_x = [&](double g) { return axis == SweepAxis::eps ? 1.0 / g : g; };
        const double x_lo = std::min(to_x(*gmin), to_x(*gmax));
        const double x_hi = std::max(to_x(*gmin), to_x(*gmax));
        sp.x_range = std::make_pair(x_lo, x_hi);
        Series measured{"mean over seeds", {}};
        for (std::size_t i = 0; i < fit.grid.size(); ++i) {
          measured.points.emplace_back(to_x(fit.grid[i]), std::exp(fit.mean_log_y[i]));
        }
        std::sort(measured.points.begin(), measured.points.end());
        Series line{"least-squares fit", {}};
        for (double x : {x_lo, x_hi}) {
          line.points.emplace_back(x, std::exp(fit.intercept + fit.slope * std::log(x)));
        }
        sp.series = {measured, line};
        sp.metadata = json{{"run_ids", fit.run_ids},
                           {"axis", axis_name},
                           {"grid_extent", {*gmin, *gmax}},
                           {"slope", fit.slope},
                           {"ci95", {fit.ci_low, fit.ci_high}}};
        const std::string name = "scaling_" + axis_name + (fits.size() > 1 ? "_" + std::to_string(k) : "") + ".svg";
        emit(name, "scaling", render_line_plot(sp), fit.run_ids);
      }
    }
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return files;
}

}  // namespace ssrgd::harness
