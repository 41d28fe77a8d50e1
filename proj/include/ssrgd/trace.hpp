// CSV serialization of optimizer traces.
#pragma once

#include "ssrgd/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ssrgd {

inline constexpr const char* kTraceHeader = "iter,f,grad_norm,sfo,event";

/// Writes the header and one row per record. Reals use 17 significant
/// digits so that read_trace_csv recovers them bit-exactly; a missing
/// grad_norm is an empty field.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(std::istream& in);

std::string format_real(double v);

}  // namespace ssrgd
