#include "ssrgd/trace.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace ssrgd {

const char* to_string(TraceEvent event) {
  switch (event) {
    case TraceEvent::none: return "none";
    case TraceEvent::epoch_start: return "epoch_start";
    case TraceEvent::perturbation: return "perturbation";
    case TraceEvent::super_epoch_end_fdecrease: return "super_epoch_end_fdecrease";
    case TraceEvent::super_epoch_end_timeout: return "super_epoch_end_timeout";
    case TraceEvent::random_stop: return "random_stop";
  }
  return "none";
}

std::optional<TraceEvent> parse_trace_event(const std::string& name) {
  for (auto e : {TraceEvent::none, TraceEvent::epoch_start, TraceEvent::perturbation,
                 TraceEvent::super_epoch_end_fdecrease, TraceEvent::super_epoch_end_timeout,
                 TraceEvent::random_stop}) {
    if (name == to_string(e)) return e;
  }
  return std::nullopt;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.iter << ',' << format_real(r.f_value) << ',';
    if (r.grad_norm) out << format_real(*r.grad_norm);
    out << ',' << r.sfo_count << ',' << to_string(r.event) << '\n';
  }
}

namespace {

[[noreturn]] void bad_row(std::size_t line, const std::string& why) {
  std::ostringstream os;
  os << "trace csv line " << line << ": " << why;
  throw Error(ErrorKind::parse_error, os.str());
}

double parse_real(const std::string& s, std::size_t line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_row(line, "bad real '" + s + "'");
  return v;
}

std::uint64_t parse_count(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_row(line, "bad integer '" + s + "'");
  return v;
}

}  // namespace

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw Error(ErrorKind::parse_error, "trace csv header must be exactly '" + std::string(kTraceHeader) + "'");
  }
  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 5) bad_row(lineno, "expected 5 fields");
    TraceRecord r;
    r.iter = parse_count(fields[0], lineno);
    r.f_value = parse_real(fields[1], lineno);
    if (!fields[2].empty()) r.grad_norm = parse_real(fields[2], lineno);
    r.sfo_count = parse_count(fields[3], lineno);
    auto ev = parse_trace_event(fields[4]);
    if (!ev) bad_row(lineno, "unknown event '" + fields[4] + "'");
    r.event = *ev;
    out.push_back(r);
  }
  return out;
}

}  // namespace ssrgd
