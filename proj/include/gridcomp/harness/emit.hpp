#pragma once

// Result files: the run table as CSV, sidecar tables and an SVG line plot.

#include <cstdint>
#include <string>
#include <vector>

#include "gridcomp/harness/experiment.hpp"

namespace gridcomp::harness {

inline constexpr const char* kCsvHeader = "axis,axis_value,seed,algorithm,avg_cost,runtime_s";

// Header plus one line per row. Numbers use %.17g; failed runs print nan.
// runtime_s is left empty unless with_runtime is set, which keeps the file
// independent of machine load.
std::string format_csv(const ResultTable& table, bool with_runtime = false);

// Throws InvalidArgument for an empty table (no file is created) and Error on
// I/O failure.
void write_csv(const ResultTable& table, const std::string& path, bool with_runtime = false);

// Parses a file written by write_csv; empty runtime cells read as 0.
// Throws FormatError.
ResultTable parse_csv(const std::string& text);
ResultTable read_csv(const std::string& path);

// Per-run status, trace checksum, violation counters and messages.
void write_runs_csv(const ResultTable& table, const std::string& path);
// axis,axis_value,algorithm,count,mean,stderr
void write_aggregate_csv(const std::vector<AggregateRow>& agg, SweepAxis axis, const std::string& path);

// Mean curves with +-1 standard error bands, one color per algorithm.
std::string format_svg(const std::vector<AggregateRow>& agg, SweepAxis axis, const std::string& title);
void write_svg(const std::vector<AggregateRow>& agg, SweepAxis axis, const std::string& title,
               const std::string& path);

// FNV-1a of a byte string; used to compare emitted files.
std::uint64_t content_checksum(const std::string& bytes);

}  // namespace gridcomp::harness
