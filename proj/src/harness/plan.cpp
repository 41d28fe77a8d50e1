#include "ssrgd/harness/plan.hpp"

#include "ssrgd/trace.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace ssrgd::harness {

namespace pt = boost::property_tree;

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::eps: return "eps";
    case SweepAxis::n: return "n";
  }
  return "none";
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_dist = std::numeric_limits<std::size_t>::max();
  for (const auto& c : candidates) {
    // Levenshtein distance, two-row table.
    std::vector<std::size_t> prev(c.size() + 1), cur(c.size() + 1);
    for (std::size_t j = 0; j <= c.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= key.size(); ++i) {
      cur[0] = i;
      for (std::size_t j = 1; j <= c.size(); ++j) {
        const std::size_t sub = prev[j - 1] + (key[i - 1] == c[j - 1] ? 0 : 1);
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      }
      std::swap(prev, cur);
    }
    if (prev[c.size()] < best_dist) {
      best_dist = prev[c.size()];
      best = c;
    }
  }
  return best;
}

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::invalid_config, where + ": " + msg);
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double to_real(const std::string& where, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    config_error(where, "expected a real number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& where, const std::string& text) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // Accept integral reals such as 1e4.
    double r = 0.0;
    const auto rr = std::from_chars(s.data(), s.data() + s.size(), r);
    if (!s.empty() && rr.ec == std::errc() && rr.ptr == s.data() + s.size() && r >= 0.0 &&
        r == std::floor(r) && r < 1.8e19) {
      return static_cast<std::uint64_t>(r);
    }
    config_error(where, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& where, const std::string& text) {
  std::string s = trim(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  config_error(where, "expected a boolean (true/false), got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '[') s.erase(s.begin());
  if (!s.empty() && s.back() == ']') s.pop_back();
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_real_list(const std::string& where, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(to_real(where, item));
  if (out.empty()) config_error(where, "expected a non-empty list of reals");
  return out;
}

std::vector<std::uint64_t> to_uint_list(const std::string& where, const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(text)) {
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t lo = to_uint(where, item.substr(0, dots));
      const std::uint64_t hi = to_uint(where, item.substr(dots + 2));
      if (hi < lo || hi - lo > 1'000'000) config_error(where, "bad range '" + item + "'");
      for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(to_uint(where, item));
    }
  }
  if (out.empty()) config_error(where, "expected a non-empty list of integers");
  return out;
}

void require_positive(const std::string& where, double v, const std::string& name) {
  if (!(v > 0.0)) config_error(where, "constraint violated: " + name + " > 0");
}

void require_nonneg(const std::string& where, double v, const std::string& name) {
  if (!(v >= 0.0)) config_error(where, "constraint violated: " + name + " >= 0");
}

void check_keys(const std::string& section, const pt::ptree& tree,
                const std::vector<std::string>& allowed) {
  for (const auto& [key, _] : tree) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error("[" + section + "]", "unknown key '" + key + "' (nearest valid key: '" +
                                            nearest_key(key, allowed) + "')");
    }
  }
}

const std::vector<std::string> kProblemKeys = {
    "kind", "n", "d", "alpha", "delta_plant", "noise", "curvature_noise", "gamma4", "box",
    "scale", "anchor", "start", "seed", "path", "d_cap", "online_sigma", "start_at_saddle"};
const std::vector<std::string> kProblemKinds = {"separable_saddle", "nonconvex_logistic",
                                                "log_ramp", "libsvm", "random_quadratic"};
const std::vector<std::string> kOptimizerKeys = {
    "kind", "order", "eps", "delta", "logfactor", "budget_factor", "eta", "epoch_len",
    "minibatch", "batch", "perturb_radius", "g_thres", "f_thres", "super_epoch_len",
    "sfo_budget", "max_epochs", "stop_at_fosp", "stop_at_sosp", "with_replacement"};
const std::vector<std::string> kOptimizerKinds = {"ssrgd", "gd", "perturbed_gd", "sgd", "svrg"};
const std::vector<std::string> kSections = {"plan", "output", "sweep", "problem:", "optimizer:"};

ProblemSpec parse_problem(const std::string& name, const pt::ptree& tree,
                          const std::filesystem::path& base_dir) {
  const std::string where = "[problem:" + name + "]";
  check_keys("problem:" + name, tree, kProblemKeys);
  ProblemSpec s;
  s.name = name;
  for (const auto& [key, child] : tree) s.raw[key] = trim(child.data());
  if (!s.raw.count("kind")) config_error(where, "missing required key 'kind'");
  s.kind = s.raw["kind"];
  if (std::find(kProblemKinds.begin(), kProblemKinds.end(), s.kind) == kProblemKinds.end()) {
    config_error(where, "unknown problem kind '" + s.kind + "' (nearest: '" +
                            nearest_key(s.kind, kProblemKinds) + "')");
  }
  for (const auto& [key, val] : s.raw) {
    const std::string w = where + " " + key;
    if (key == "n") s.n = to_uint(w, val);
    else if (key == "d") s.d = to_uint(w, val);
    else if (key == "alpha") s.alpha = to_real(w, val);
    else if (key == "delta_plant") s.delta_plant = to_real(w, val);
    else if (key == "noise") s.noise = to_real(w, val);
    else if (key == "curvature_noise") s.curvature_noise = to_real(w, val);
    else if (key == "gamma4") s.gamma4 = to_real(w, val);
    else if (key == "box") s.box = to_real(w, val);
    else if (key == "scale") s.scale = to_real(w, val);
    else if (key == "anchor") s.anchor = to_real(w, val);
    else if (key == "start") s.start = to_real(w, val);
    else if (key == "seed") s.seed = to_uint(w, val);
    else if (key == "path") s.path = (base_dir / val).lexically_normal().string();
    else if (key == "d_cap") s.d_cap = to_uint(w, val);
    else if (key == "online_sigma") s.online_sigma = to_real(w, val);
    else if (key == "start_at_saddle") s.start_at_saddle = to_bool(w, val);
  }
  if (s.n == 0) config_error(where, "constraint violated: n >= 1");
  if (s.d == 0) config_error(where, "constraint violated: d >= 1");
  require_nonneg(where, s.delta_plant, "delta_plant");
  require_nonneg(where, s.noise, "noise");
  require_nonneg(where, s.curvature_noise, "curvature_noise");
  require_positive(where, s.gamma4, "gamma4");
  require_positive(where, s.box, "box");
  require_positive(where, s.scale, "scale");
  require_positive(where, s.anchor, "anchor");
  require_nonneg(where, s.alpha, "alpha");
  if (s.online_sigma) require_positive(where, *s.online_sigma, "online_sigma");
  if (s.kind == "libsvm" && s.path.empty()) config_error(where, "libsvm problems need 'path'");
  return s;
}

OptimizerSpec parse_optimizer(const std::string& name, const pt::ptree& tree) {
  const std::string where = "[optimizer:" + name + "]";
  check_keys("optimizer:" + name, tree, kOptimizerKeys);
  OptimizerSpec s;
  s.name = name;
  for (const auto& [key, child] : tree) s.raw[key] = trim(child.data());
  s.kind = s.raw.count("kind") ? s.raw["kind"] : "ssrgd";
  if (std::find(kOptimizerKinds.begin(), kOptimizerKinds.end(), s.kind) == kOptimizerKinds.end()) {
    config_error(where, "unknown optimizer kind '" + s.kind + "' (nearest: '" +
                            nearest_key(s.kind, kOptimizerKinds) + "')");
  }
  if (s.kind == "perturbed_gd") s.order = Order::second;
  for (const auto& [key, val] : s.raw) {
    const std::string w = where + " " + key;
    if (key == "order") {
      if (val == "first") s.order = Order::first;
      else if (val == "second") s.order = Order::second;
      else config_error(w, "expected 'first' or 'second', got '" + val + "'");
    }
    else if (key == "eps") s.eps = to_real(w, val);
    else if (key == "delta") s.delta = to_real(w, val);
    else if (key == "logfactor") s.logfactor = to_real(w, val);
    else if (key == "budget_factor") s.budget_factor = to_real(w, val);
    else if (key == "eta") s.eta = to_real(w, val);
    else if (key == "epoch_len") s.epoch_len = to_uint(w, val);
    else if (key == "minibatch") s.minibatch = to_uint(w, val);
    else if (key == "batch") s.batch = to_uint(w, val);
    else if (key == "perturb_radius") s.perturb_radius = to_real(w, val);
    else if (key == "g_thres") s.g_thres = to_real(w, val);
    else if (key == "f_thres") s.f_thres = to_real(w, val);
    else if (key == "super_epoch_len") s.super_epoch_len = to_uint(w, val);
    else if (key == "sfo_budget") s.sfo_budget = to_uint(w, val);
    else if (key == "max_epochs") s.max_epochs = to_uint(w, val);
    else if (key == "stop_at_fosp") s.stop_at_fosp = to_bool(w, val);
    else if (key == "stop_at_sosp") s.stop_at_sosp = to_bool(w, val);
    else if (key == "with_replacement") s.with_replacement = to_bool(w, val);
  }
  if (s.kind == "perturbed_gd" && s.order != Order::second) {
    config_error(where, "perturbed_gd is a second-order method");
  }
  require_positive(where, s.eps, "eps");
  if (s.delta) require_positive(where, *s.delta, "delta");
  require_positive(where, s.logfactor, "logfactor");
  require_positive(where, s.budget_factor, "budget_factor");
  if (s.eta) require_positive(where, *s.eta, "eta");
  if (s.epoch_len && *s.epoch_len == 0) config_error(where, "constraint violated: epoch_len >= 1");
  if (s.minibatch && *s.minibatch == 0) config_error(where, "constraint violated: minibatch >= 1");
  if (s.batch && *s.batch == 0) config_error(where, "constraint violated: batch >= 1");
  if (s.sfo_budget && *s.sfo_budget == 0) config_error(where, "constraint violated: sfo_budget >= 1");
  if (s.perturb_radius) require_nonneg(where, *s.perturb_radius, "perturb_radius");
  if (s.g_thres) require_nonneg(where, *s.g_thres, "g_thres");
  if (s.f_thres) require_nonneg(where, *s.f_thres, "f_thres");
  return s;
}

std::string canonical_map(const std::map<std::string, std::string>& raw) {
  std::string out;
  for (const auto& [k, v] : raw) out += k + "=" + v + ";";
  return out;
}

}  // namespace

namespace {

ExperimentPlan parse_config_impl(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::parse_error, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentPlan plan;
  bool have_output = false;
  std::set<std::string> problem_names, optimizer_names;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      config_error("top level", "key '" + section + "' appears outside any section");
    }
    if (section == "plan") {
      check_keys(section, body, {"seeds", "max_cells"});
      for (const auto& [key, child] : body) {
        const std::string w = "[plan] " + key;
        if (key == "seeds") plan.seeds = to_uint_list(w, child.data());
        else plan.max_cells = to_uint(w, child.data());
      }
    } else if (section == "output") {
      check_keys(section, body, {"dir", "plot"});
      for (const auto& [key, child] : body) {
        if (key == "dir") plan.out_dir = (base_dir / trim(child.data())).lexically_normal().string();
        else plan.plot = to_bool("[output] plot", child.data());
      }
      if (plan.out_dir.empty()) config_error("[output]", "missing required key 'dir'");
      have_output = true;
    } else if (section == "sweep") {
      check_keys(section, body, {"axis", "eps_grid", "n_grid"});
      for (const auto& [key, child] : body) {
        const std::string w = "[sweep] " + key;
        const std::string val = trim(child.data());
        if (key == "axis") {
          if (val == "eps") plan.sweep.axis = SweepAxis::eps;
          else if (val == "n") plan.sweep.axis = SweepAxis::n;
          else if (val == "none") plan.sweep.axis = SweepAxis::none;
          else config_error(w, "expected 'eps', 'n' or 'none', got '" + val + "'");
        } else if (key == "eps_grid") {
          plan.sweep.eps_grid = to_real_list(w, val);
          for (double e : plan.sweep.eps_grid) require_positive(w, e, "eps");
        } else {
          plan.sweep.n_grid = to_uint_list(w, val);
          for (auto n : plan.sweep.n_grid) {
            if (n == 0) config_error(w, "constraint violated: n >= 1");
          }
        }
      }
    } else if (section.rfind("problem:", 0) == 0) {
      const std::string name = section.substr(8);
      if (name.empty() || !problem_names.insert(name).second) {
        config_error("[" + section + "]", "problem sections need a unique non-empty name");
      }
      plan.problems.push_back(parse_problem(name, body, base_dir));
    } else if (section.rfind("optimizer:", 0) == 0) {
      const std::string name = section.substr(10);
      if (name.empty() || !optimizer_names.insert(name).second) {
        config_error("[" + section + "]", "optimizer sections need a unique non-empty name");
      }
      plan.optimizers.push_back(parse_optimizer(name, body));
    } else {
      config_error("[" + section + "]", "unknown section (nearest valid: '" +
                                            nearest_key(section, kSections) + "')");
    }
  }
  if (!have_output) config_error("config", "missing required section [output]");
  if (plan.problems.empty()) config_error("config", "missing required section [problem:NAME]");
  if (plan.sweep.axis == SweepAxis::eps && plan.sweep.eps_grid.empty()) {
    config_error("[sweep]", "axis = eps needs eps_grid");
  }
  if (plan.sweep.axis == SweepAxis::n) {
    if (plan.sweep.n_grid.empty()) config_error("[sweep]", "axis = n needs n_grid");
    for (const auto& p : plan.problems) {
      if (p.kind == "libsvm") config_error("[sweep]", "an n sweep cannot resize a libsvm dataset");
    }
  }
  std::sort(plan.seeds.begin(), plan.seeds.end());
  plan.seeds.erase(std::unique(plan.seeds.begin(), plan.seeds.end()), plan.seeds.end());
  const std::uint64_t points = plan.sweep.axis == SweepAxis::eps ? plan.sweep.eps_grid.size()
                               : plan.sweep.axis == SweepAxis::n ? plan.sweep.n_grid.size()
                                                                 : 1;
  const double cells = static_cast<double>(plan.problems.size()) *
                       static_cast<double>(plan.optimizers.size()) *
                       static_cast<double>(plan.seeds.size()) * static_cast<double>(points);
  if (cells > static_cast<double>(plan.max_cells)) {
    config_error("[plan]", "plan expands to " + std::to_string(static_cast<std::uint64_t>(cells)) +
                               " cells, above max_cells = " + std::to_string(plan.max_cells));
  }
  return plan;
}

}  // namespace

ExperimentPlan parse_config_text(const std::string& text) {
  return parse_config_impl(text, std::filesystem::current_path());
}

ExperimentPlan parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_impl(ss.str(), std::filesystem::absolute(path).parent_path());
}

std::vector<Cell> expand_cells(const ExperimentPlan& plan) {
  std::vector<Cell> cells;
  for (std::size_t pi = 0; pi < plan.problems.size(); ++pi) {
    const ProblemSpec& ps = plan.problems[pi];
    for (std::size_t oi = 0; oi < plan.optimizers.size(); ++oi) {
      const OptimizerSpec& os = plan.optimizers[oi];
      std::vector<std::pair<std::optional<double>, std::optional<std::uint64_t>>> points;
      if (plan.sweep.axis == SweepAxis::eps) {
        for (double e : plan.sweep.eps_grid) points.emplace_back(e, std::nullopt);
      } else if (plan.sweep.axis == SweepAxis::n) {
        for (auto n : plan.sweep.n_grid) points.emplace_back(std::nullopt, n);
      } else {
        points.emplace_back(std::nullopt, std::nullopt);
      }
      for (const auto& [eps, n] : points) {
        for (std::uint64_t seed : plan.seeds) {
          Cell c;
          c.problem = pi;
          c.optimizer = oi;
          c.seed = seed;
          c.eps = eps;
          c.n = n;
          c.canonical = "problem:" + ps.name + "{" + canonical_map(ps.raw) + "}|optimizer:" +
                        os.name + "{" + canonical_map(os.raw) + "}|seed=" + std::to_string(seed);
          if (eps) c.canonical += "|eps=" + format_real(*eps);
          if (n) c.canonical += "|n=" + std::to_string(*n);
          c.run_id = content_hash(c.canonical);
          cells.push_back(std::move(c));
        }
      }
    }
  }
  return cells;
}

ProblemInstance build_problem(const ProblemSpec& spec, std::optional<std::uint64_t> n) {
  const std::uint64_t count = n.value_or(spec.n);
  ProblemInstance inst;
  if (spec.kind == "separable_saddle") {
    SeparableSaddleOptions o;
    o.d = spec.d;
    o.n = count;
    o.delta_plant = spec.delta_plant;
    o.noise = spec.noise;
    o.curvature_noise = spec.curvature_noise;
    o.gamma4 = spec.gamma4;
    o.box = spec.box;
    o.seed = spec.seed;
    inst = make_separable_saddle(o);
  } else if (spec.kind == "nonconvex_logistic") {
    inst = make_nonconvex_logistic(count, spec.d, spec.alpha, spec.seed);
  } else if (spec.kind == "log_ramp") {
    LogRampOptions o;
    o.d = spec.d;
    o.n = count;
    o.scale = spec.scale;
    o.anchor = spec.anchor;
    o.noise = spec.noise;
    o.curvature_noise = spec.curvature_noise;
    o.start = spec.start;
    o.seed = spec.seed;
    inst = make_log_ramp(o);
  } else if (spec.kind == "libsvm") {
    if (n) throw Error(ErrorKind::invalid_config, "cannot resize a libsvm dataset");
    inst = load_libsvm(spec.path, spec.d_cap, spec.alpha);
  } else if (spec.kind == "random_quadratic") {
    inst = make_random_quadratic(count, spec.d, spec.scale, spec.seed);
  } else {
    throw Error(ErrorKind::invalid_config, "unknown problem kind '" + spec.kind + "'");
  }
  if (spec.online_sigma) inst = make_online_stream(inst, *spec.online_sigma, spec.seed);
  return inst;
}

Vector start_point(const ProblemSpec& spec, const ProblemInstance& inst) {
  if (!spec.start_at_saddle) return inst.x0;
  if (inst.saddles.empty()) {
    throw Error(ErrorKind::invalid_config,
                "[problem:" + spec.name + "] start_at_saddle set but the problem has no planted saddle");
  }
  return inst.saddles.front().x;
}

ResolvedOptimizer resolve_optimizer(const OptimizerSpec& spec, const Problem& p,
                                    std::optional<double> eps_override, std::uint64_t seed) {
  ResolvedOptimizer r;
  r.eps = eps_override.value_or(spec.eps);
  const Smoothness sm = p.smoothness();
  const bool online = p.mode() == OracleMode::online;
  r.second_order = spec.order == Order::second;
  if (spec.delta) {
    r.delta = *spec.delta;
  } else {
    r.delta = sm.lipschitz_hess > 0.0 ? std::sqrt(sm.lipschitz_hess * r.eps) : r.eps;
  }
  r.stop_at_sosp = spec.stop_at_sosp.value_or(r.second_order);

  // Default budget: the leading terms of the complexity bounds times budget_factor.
  double base;
  if (online) {
    const double s = sm.variance_bound;
    base = s * s / (r.eps * r.eps) + s / (r.eps * r.eps * r.eps);
  } else {
    const double n = static_cast<double>(p.num_components());
    base = n + std::sqrt(n) / (r.eps * r.eps);
  }
  r.sfo_budget = spec.sfo_budget.value_or(
      static_cast<std::uint64_t>(std::ceil(spec.budget_factor * std::max(1.0, base))));

  const auto where = "[optimizer:" + spec.name + "]";
  try {
    if (spec.kind == "ssrgd") {
      r.is_ssrgd = true;
      RunConfig& c = r.ssrgd;
      if (spec.order == Order::first) {
        c = online ? derive_config_online_first_order(p, r.eps) : derive_config_first_order(p, r.eps);
      } else {
        c = online ? derive_config_online_second_order(p, r.eps, r.delta, spec.logfactor)
                   : derive_config_second_order(p, r.eps, r.delta, spec.logfactor);
      }
      if (spec.eta) c.eta = *spec.eta;
      if (spec.epoch_len) c.epoch_len = *spec.epoch_len;
      if (spec.minibatch) c.minibatch = *spec.minibatch;
      if (spec.batch) c.batch = *spec.batch;
      if (spec.perturb_radius) c.perturb_radius = *spec.perturb_radius;
      if (spec.g_thres) c.g_thres = *spec.g_thres;
      if (spec.f_thres) c.f_thres = *spec.f_thres;
      if (spec.super_epoch_len) c.super_epoch_len = *spec.super_epoch_len;
      if (spec.max_epochs) c.max_epochs = *spec.max_epochs;
      if (spec.stop_at_fosp) c.stop_at_fosp = *spec.stop_at_fosp;
      if (spec.with_replacement) c.with_replacement = *spec.with_replacement;
      c.sfo_budget = r.sfo_budget;
      c.seed = seed;
      c.validate(p);
    } else {
      r.is_ssrgd = false;
      BaselineParams& b = r.baseline;
      b.kind = *parse_baseline_kind(spec.kind);
      const double L = sm.lipschitz_grad;
      const std::uint64_t n = online ? 1 : p.num_components();
      switch (b.kind) {
        case BaselineKind::gd: b.eta = 1.0 / L; break;
        case BaselineKind::perturbed_gd:
          if (online) throw Error(ErrorKind::invalid_config, "perturbed_gd needs a finite-sum problem");
          b = perturbed_gd_from(derive_config_second_order(p, r.eps, r.delta, spec.logfactor));
          break;
        case BaselineKind::sgd:
          b.eta = 0.5 / L;
          b.minibatch = 16;
          break;
        case BaselineKind::svrg: {
          const auto m = static_cast<std::uint64_t>(std::ceil(std::cbrt(static_cast<double>(n))));
          b.epoch_len = std::max<std::uint64_t>(1, m);
          b.minibatch = b.epoch_len * b.epoch_len;
          b.eta = 1.0 / (3.0 * L);
          break;
        }
      }
      b.eps = r.eps;
      b.stop_at_fosp = spec.stop_at_fosp.value_or(!r.second_order);
      if (spec.eta) b.eta = *spec.eta;
      if (spec.epoch_len) b.epoch_len = *spec.epoch_len;
      if (spec.minibatch) b.minibatch = *spec.minibatch;
      if (spec.perturb_radius) b.perturb_radius = *spec.perturb_radius;
      if (spec.g_thres) b.g_thres = *spec.g_thres;
      if (spec.f_thres) b.f_thres = *spec.f_thres;
      if (spec.super_epoch_len) b.super_epoch_len = *spec.super_epoch_len;
      if (spec.with_replacement) b.with_replacement = *spec.with_replacement;
      b.validate(p);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_config || e.kind() == ErrorKind::invalid_metadata) {
      throw Error(ErrorKind::invalid_config, where + ": " + e.what());
    }
    throw;
  }
  return r;
}

}  // namespace ssrgd::harness
