#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "zoqn/solver.hpp"

namespace zoqn {

enum class TraceFormat { Csv, Json };

/// Serializes a run trace. CSV columns are exactly
///   iter,evals,fvalue,gap,batch,alpha,theta,pair_accepted,test_satisfied
/// with floating values at 17 significant digits; JSON mirrors the same
/// rows plus run metadata.
void write_trace(const RunRecord& record, std::ostream& out, TraceFormat format);
void write_trace(const RunRecord& record, const std::string& path,
                 TraceFormat format);

/// Parses a trace written by write_trace. CSV recovers rows and, from the
/// header, nothing else; JSON recovers metadata too.
RunRecord read_trace(const std::string& path, TraceFormat format);
RunRecord read_trace_stream(std::istream& in, TraceFormat format);

struct AggregateRow {
  std::uint64_t evals = 0;
  double min_gap = 0.0;
  double mean_gap = 0.0;
  double max_gap = 0.0;
};

/// Min/mean/max gap bands across seeds on a fixed evaluation grid. Each
/// trace is interpolated by previous-value hold: the gap at grid point e is
/// the last row's gap with evals <= e, or the first row's gap before that.
std::vector<AggregateRow> aggregate_traces(const std::vector<RunRecord>& records,
                                           std::uint64_t max_evals,
                                           std::size_t grid_points = 200);

void write_aggregate(const std::vector<AggregateRow>& rows, std::ostream& out);
void write_aggregate(const std::vector<AggregateRow>& rows, const std::string& path);
std::vector<AggregateRow> read_aggregate(const std::string& path);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace zoqn
