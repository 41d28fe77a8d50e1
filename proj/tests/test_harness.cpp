#include "ssrgd/harness/plan.hpp"
#include "ssrgd/harness/plots.hpp"
#include "ssrgd/harness/runner.hpp"
#include "ssrgd/harness/scaling.hpp"
#include "ssrgd/trace.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace ssrgd;
using namespace ssrgd::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ssrgd_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string unescape(std::string s) {
  const std::pair<std::string, std::string> entities[] = {
      {"&quot;", "\""}, {"&lt;", "<"}, {"&gt;", ">"}, {"&apos;", "'"}, {"&amp;", "&"}};
  for (const auto& [from, to] : entities) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
      s.replace(pos, from.size(), to);
    }
  }
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string small_plan(const fs::path& out, const std::string& extra = "") {
  return "[plan]\nseeds = 0..2\n"
         "[output]\ndir = " + out.string() + "\nplot = false\n"
         "[problem:ramp]\nkind = log_ramp\nn = 64\nd = 3\nnoise = 0.1\n"
         "[problem:saddle]\nkind = separable_saddle\nn = 16\nd = 4\ndelta_plant = 0.4\nnoise = 0.1\n"
         "[optimizer:ssrgd]\nkind = ssrgd\neps = 0.1\n"
         "[optimizer:gd]\nkind = gd\neps = 0.1\n" + extra;
}

void expect_config_error(const std::string& text, const std::string& fragment) {
  try {
    parse_config_text(text);
    FAIL("config accepted: " << text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_config);
    CHECK(std::string(e.what()).find(fragment) != std::string::npos);
  }
}

bool parses_as_xml(const std::string& svg) {
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (...) {
    return false;
  }
  return tree.count("svg") == 1;
}

}  // namespace

TEST_CASE("plan parsing fills defaults") {
  const auto plan = parse_config_text(small_plan("/tmp/x"));
  CHECK(plan.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(plan.problems.size() == 2);
  CHECK(plan.optimizers.size() == 2);
  CHECK(plan.optimizers[0].order == Order::first);
  CHECK(plan.optimizers[0].budget_factor == 50.0);
  CHECK_FALSE(plan.plot);
  CHECK(plan.max_cells == 10000);
  CHECK(plan.sweep.axis == SweepAxis::none);
  CHECK(expand_cells(plan).size() == 12);
}

TEST_CASE("eps sweep expands one cell per grid point and seed") {
  const auto plan = parse_config_text(small_plan("/tmp/x", "[sweep]\naxis = eps\neps_grid = 0.2,0.1,0.05\n"));
  CHECK(plan.sweep.eps_grid.size() == 3);
  const auto cells = expand_cells(plan);
  CHECK(cells.size() == 2 * 2 * 3 * 3);
  std::set<std::string> ids;
  for (const auto& c : cells) {
    CHECK(c.eps.has_value());
    CHECK(c.run_id.size() == 16);
    ids.insert(c.run_id);
  }
  CHECK(ids.size() == cells.size());
}

TEST_CASE("config errors name the offending key") {
  const std::string base = small_plan("/tmp/x");
  expect_config_error(base + "[optimizer:bad]\nkind = ssrgd\neta = -0.1\n", "constraint violated: eta > 0");
  expect_config_error(base + "[optimizer:bad]\nkind = ssrgd\nepz = 0.1\n", "nearest valid key: 'eps'");
  expect_config_error(base + "[optimizer:bad]\nkind = ssrgd\neps = fast\n", "eps");
  expect_config_error("[problem:a]\nkind = log_ramp\n[optimizer:b]\nkind = gd\n", "output");
  expect_config_error("[output]\ndir = /tmp/x\n[optimizer:b]\nkind = gd\n", "problem");
  expect_config_error(base + "[optimizer:bad]\nkind = adam\n", "kind");
  expect_config_error(small_plan("/tmp/x").replace(0, 6, "[plan]\nmax_cells = 5\n"), "max_cells");
  CHECK(nearest_key("minibach", {"minibatch", "batch", "eta"}) == "minibatch");
  CHECK_THROWS_AS(parse_config("/nonexistent/plan.ini"), Error);
}

TEST_CASE("optimizer resolution applies defaults and overrides") {
  const auto plan = parse_config_text(small_plan("/tmp/x", "[optimizer:sgd]\nkind = sgd\neps = 0.1\nminibatch = 8\n"));
  const auto inst = build_problem(plan.problems[1]);
  const auto ss = resolve_optimizer(plan.optimizers[0], *inst, std::nullopt, 0);
  CHECK(ss.is_ssrgd);
  CHECK(ss.ssrgd.epoch_len == 4);
  CHECK(ss.sfo_budget > 0);
  const auto gd = resolve_optimizer(plan.optimizers[1], *inst, std::nullopt, 0);
  CHECK_FALSE(gd.is_ssrgd);
  CHECK(gd.baseline.eta == doctest::Approx(1.0 / inst->smoothness().lipschitz_grad));
  const auto sgd = resolve_optimizer(plan.optimizers[2], *inst, 0.05, 0);
  CHECK(sgd.baseline.minibatch == 8);
  CHECK(sgd.eps == 0.05);
  CHECK(content_hash("abc") == content_hash("abc"));
  CHECK(content_hash("abc") != content_hash("abd"));
}

TEST_CASE("a 2x2x3 plan writes every artifact and is idempotent") {
  const fs::path out = fresh_dir("plan");
  const auto plan = parse_config_text(small_plan(out));
  const auto summary = run_plan(plan, 2);
  CHECK(summary.cells.size() == 12);
  CHECK(summary.failed == 0);
  std::size_t traces = 0, summaries = 0;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    traces += e.path().filename() == "trace.csv";
    summaries += e.path().filename() == "summary.json";
  }
  CHECK(traces == 12);
  CHECK(summaries == 12);
  REQUIRE(fs::exists(out / "aggregate.json"));
  const auto agg = nlohmann::json::parse(slurp(out / "aggregate.json"));
  std::uint64_t total = 0;
  for (const auto& c : agg["cells"]) total += c["sfo"].get<std::uint64_t>();
  CHECK(agg["total_sfo"].get<std::uint64_t>() == total);

  std::map<std::string, std::string> first;
  for (const auto& c : agg["cells"]) first[c["run_id"]] = slurp(out / c["trace"].get<std::string>());
  const auto again = run_plan(plan, 3);
  const auto agg2 = nlohmann::json::parse(slurp(out / "aggregate.json"));
  CHECK(agg2 == agg);
  for (const auto& [id, text] : first) CHECK(slurp(out / "cells" / id / "trace.csv") == text);
  std::ifstream tin(out / "cells" / first.begin()->first / "trace.csv");
  CHECK_FALSE(read_trace_csv(tin).empty());
  fs::remove_all(out);
}

TEST_CASE("smaller eps costs more oracle calls") {
  const fs::path out = fresh_dir("sweep");
  const std::string text = "[plan]\nseeds = 0,1\n[output]\ndir = " + out.string() +
                           "\nplot = true\n[sweep]\naxis = eps\neps_grid = 0.2,0.1,0.05\n"
                           "[problem:ramp]\nkind = log_ramp\nn = 64\nd = 3\nnoise = 0.1\n"
                           "[optimizer:ssrgd]\nkind = ssrgd\neps = 0.1\n";
  const auto summary = run_plan(parse_config_text(text), 2);
  REQUIRE(summary.failed == 0);
  std::map<double, double> mean;
  for (const auto& c : summary.cells) {
    REQUIRE(c.sfo_to_fosp);
    mean[c.eps] += static_cast<double>(*c.sfo_to_fosp);
  }
  CHECK(mean[0.05] > mean[0.1]);
  CHECK(mean[0.1] > mean[0.2]);

  const auto fits = scaling_report(summary.aggregate, SweepAxis::eps);
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].grid.size() == 3);
  CHECK(fits[0].slope > 0);
  CHECK_THROWS_AS(scaling_report(summary.aggregate, SweepAxis::n), Error);

  bool scaling_svg = false;
  for (const auto& f : summary.plot_files) {
    CHECK(parses_as_xml(slurp(f)));
    if (fs::path(f).filename().string().rfind("scaling_eps", 0) == 0) {
      scaling_svg = true;
      const std::string svg = slurp(f);
      const auto open = svg.find("<metadata id=\"plot-meta\">");
      REQUIRE(open != std::string::npos);
      const auto start = open + std::string("<metadata id=\"plot-meta\">").size();
      const auto meta = nlohmann::json::parse(unescape(svg.substr(start, svg.find("</metadata>") - start)));
      CHECK(meta["x_extent"][0].get<double>() == doctest::Approx(5.0));
      CHECK(meta["x_extent"][1].get<double>() == doctest::Approx(20.0));
    }
  }
  CHECK(scaling_svg);
  fs::remove_all(out);
}

TEST_CASE("a diverging cell is recorded without stopping the others") {
  const fs::path out = fresh_dir("fail");
  const std::string text = "[output]\ndir = " + out.string() + "\nplot = false\n"
                           "[problem:q]\nkind = random_quadratic\nn = 4\nd = 3\n"
                           "[optimizer:wild]\nkind = gd\neps = 0.1\neta = 1000\n"
                           "[optimizer:ok]\nkind = gd\neps = 0.1\n";
  const auto summary = run_plan(parse_config_text(text), 1);
  REQUIRE(summary.cells.size() == 2);
  CHECK(summary.failed == 1);
  CHECK_FALSE(summary.cells[0].ok);
  CHECK(summary.cells[1].ok);
  CHECK(summary.aggregate["cells"][0]["status"] == "failed");
  fs::remove_all(out);
}

TEST_CASE("synthetic scaling fits recover known slopes") {
  std::vector<ScalingSample> eps_samples, n_samples;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const double jitter = 1.0 + 0.01 * static_cast<double>(seed);
    for (double eps : {0.2, 0.1, 0.05, 0.025}) eps_samples.push_back({eps, seed, jitter * 7.0 / (eps * eps), ""});
    for (double n : {1024.0, 4096.0, 16384.0}) n_samples.push_back({n, seed, n + jitter * 30.0 * std::sqrt(n), ""});
  }
  const auto fe = fit_scaling(eps_samples, SweepAxis::eps);
  CHECK(fe.slope == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fe.ci_low <= fe.slope);
  CHECK(fe.ci_high >= fe.slope);
  const auto fn = fit_scaling(n_samples, SweepAxis::n);
  CHECK(fn.slope == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fn.excluded == 0);
  CHECK(to_json(fn).contains("slope"));

  const std::vector<ScalingSample> two = {{0.1, 0, 10, ""}, {0.05, 0, 40, ""}};
  try {
    fit_scaling(two, SweepAxis::eps);
    FAIL("expected insufficient_data");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_data);
  }
}

TEST_CASE("plot emission on empty and single-cell aggregates") {
  const fs::path out = fresh_dir("plots");
  fs::create_directories(out);
  const auto none = emit_plots(nlohmann::json{{"cells", nlohmann::json::array()}}, out.string());
  CHECK(none.empty());
  REQUIRE(fs::exists(out / "plots" / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(out / "plots" / "manifest.json"));
  CHECK(manifest["files"].empty());
  fs::remove_all(out);

  const std::string text = "[output]\ndir = " + out.string() + "\nplot = true\n"
                           "[problem:q]\nkind = random_quadratic\nn = 4\nd = 3\n"
                           "[optimizer:gd]\nkind = gd\neps = 0.1\n";
  const auto summary = run_plan(parse_config_text(text), 1);
  CHECK(summary.plot_files.size() == 2);
  for (const auto& f : summary.plot_files) {
    const std::string svg = slurp(f);
    CHECK(parses_as_xml(svg));
    CHECK(svg.find(summary.cells[0].cell.run_id) != std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("rendering escapes text and survives degenerate data") {
  CHECK(xml_escape("a<b & \"c\">") == "a&lt;b &amp; &quot;c&quot;&gt;");
  LinePlot p;
  p.title = "f & g <test>";
  p.log_y = true;
  p.series.push_back({"one", {{1.0, 0.0}, {2.0, -1.0}, {3.0, 5.0}}});
  p.series.push_back({"empty", {}});
  CHECK(parses_as_xml(render_line_plot(p)));
  const std::vector<Bar> bars = {{"x", 0.5, "5/10"}, {"y", 1.0, ""}};
  CHECK(parses_as_xml(render_bar_chart("rates", "rate", bars, nlohmann::json::object())));
}

TEST_CASE("worker count honours the environment") {
  CHECK(worker_count() >= 1);
}
