#include "ssrgd/harness/scaling.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace ssrgd::harness {

using nlohmann::json;

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

LineFit least_squares(const std::vector<double>& u, const std::vector<double>& y) {
  const double k = static_cast<double>(u.size());
  double mu = 0.0, my = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    my += y[i];
  }
  mu /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sxx += (u[i] - mu) * (u[i] - mu);
    sxy += (u[i] - mu) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mu;
  if (u.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * u[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (k - 2.0) / sxx);
  }
  return f;
}

double t_quantile(double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, 0.975);
}

}  // namespace

ScalingFit fit_scaling(std::span<const ScalingSample> samples, SweepAxis axis) {
  if (axis == SweepAxis::none) throw Error(ErrorKind::invalid_input, "scaling needs the eps or n axis");
  ScalingFit fit;
  fit.axis = axis;
  std::vector<double> u, y;
  std::map<double, std::vector<double>> by_x;
  std::map<std::uint64_t, std::vector<std::pair<double, double>>> by_seed;
  for (const auto& s : samples) {
    if (!(s.x > 0.0)) throw Error(ErrorKind::invalid_input, "scaling grid values must be > 0");
    const double value = axis == SweepAxis::n ? s.sfo - s.x : s.sfo;
    if (!(value > 0.0)) {
      fit.excluded++;
      continue;
    }
    const double ui = axis == SweepAxis::eps ? std::log(1.0 / s.x) : std::log(s.x);
    const double yi = std::log(value);
    u.push_back(ui);
    y.push_back(yi);
    by_x[s.x].push_back(yi);
    by_seed[s.seed].emplace_back(ui, yi);
    fit.run_ids.push_back(s.run_id);
  }
  if (by_x.size() < 3) {
    throw Error(ErrorKind::insufficient_data,
                "scaling fit needs at least 3 sweep points, have " + std::to_string(by_x.size()));
  }
  fit.samples = u.size();
  for (const auto& [x, ys] : by_x) {
    fit.grid.push_back(x);
    double m = 0.0;
    for (double v : ys) m += v;
    fit.mean_log_y.push_back(m / static_cast<double>(ys.size()));
  }
  const LineFit pooled = least_squares(u, y);
  fit.slope = pooled.slope;
  fit.intercept = pooled.intercept;

  for (const auto& [seed, pts] : by_seed) {
    std::vector<double> su, sy;
    for (const auto& [a, b] : pts) {
      su.push_back(a);
      sy.push_back(b);
    }
    const auto [lo, hi] = std::minmax_element(su.begin(), su.end());
    if (su.size() >= 2 && *hi > *lo) fit.seed_slopes.push_back(least_squares(su, sy).slope);
  }
  if (fit.seed_slopes.size() >= 2) {
    const double k = static_cast<double>(fit.seed_slopes.size());
    double mean = 0.0;
    for (double s : fit.seed_slopes) mean += s;
    mean /= k;
    double var = 0.0;
    for (double s : fit.seed_slopes) var += (s - mean) * (s - mean);
    var /= (k - 1.0);
    const double half = t_quantile(k - 1.0) * std::sqrt(var / k);
    fit.ci_low = fit.slope - half;
    fit.ci_high = fit.slope + half;
  } else {
    const double half = t_quantile(static_cast<double>(u.size()) - 2.0) * pooled.slope_se;
    fit.ci_low = fit.slope - half;
    fit.ci_high = fit.slope + half;
  }
  return fit;
}

std::vector<ScalingFit> scaling_report(const json& aggregate, SweepAxis axis) {
  if (!aggregate.contains("cells") || !aggregate["cells"].is_array()) {
    throw Error(ErrorKind::invalid_input, "aggregate has no cells array");
  }
  const char* key = axis == SweepAxis::eps ? "sweep_eps" : "sweep_n";
  std::map<std::pair<std::string, std::string>, std::vector<ScalingSample>> groups;
  for (const auto& c : aggregate["cells"]) {
    if (c.value("status", "") != "ok") continue;
    if (!c.contains(key) || c[key].is_null()) continue;
    if (!c.contains("sfo_to_fosp") || c["sfo_to_fosp"].is_null()) continue;
    ScalingSample s;
    s.x = c[key].get<double>();
    s.seed = c.value("seed", std::uint64_t{0});
    s.sfo = c["sfo_to_fosp"].get<double>();
    s.run_id = c.value("run_id", "");
    groups[{c.value("problem", ""), c.value("optimizer", "")}].push_back(s);
  }
  std::vector<ScalingFit> fits;
  std::size_t best_points = 0;
  for (const auto& [name, samples] : groups) {
    try {
      ScalingFit f = fit_scaling(samples, axis);
      f.problem = name.first;
      f.optimizer = name.second;
      fits.push_back(std::move(f));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::insufficient_data) throw;
      std::map<double, int> distinct;
      for (const auto& s : samples) distinct[s.x]++;
      best_points = std::max(best_points, distinct.size());
    }
  }
  if (fits.empty()) {
    throw Error(ErrorKind::insufficient_data,
                std::string("no group has 3 successful sweep points on the ") + to_string(axis) +
                    " axis (best: " + std::to_string(best_points) + ")");
  }
  return fits;
}

json to_json(const ScalingFit& f) {
  return json{{"axis", to_string(f.axis)},
              {"problem", f.problem},
              {"optimizer", f.optimizer},
              {"slope", f.slope},
              {"intercept", f.intercept},
              {"ci95", {f.ci_low, f.ci_high}},
              {"grid", f.grid},
              {"mean_log_y", f.mean_log_y},
              {"seed_slopes", f.seed_slopes},
              {"samples", f.samples},
              {"excluded", f.excluded},
              {"run_ids", f.run_ids}};
}

}  // namespace ssrgd::harness
