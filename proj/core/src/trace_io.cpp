#include "zoqn/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace zoqn {

namespace {

constexpr const char* kHeader =
    "iter,evals,fvalue,gap,batch,alpha,theta,pair_accepted,test_satisfied";

TerminationStatus status_from_string(const std::string& s) {
  if (s == "budget") return TerminationStatus::Budget;
  if (s == "max_iters") return TerminationStatus::MaxIters;
  if (s == "stationary") return TerminationStatus::Stationary;
  if (s == "converged") return TerminationStatus::Converged;
  if (s == "diverged") return TerminationStatus::Diverged;
  throw std::invalid_argument("unknown termination status: " + s);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

nlohmann::json row_to_json(const IterationRow& r) {
  return nlohmann::json{
      {"iter", r.iter},       {"evals", r.evals},
      {"fvalue", r.fvalue},   {"gap", r.gap},
      {"batch", r.batch},     {"alpha", r.alpha},
      {"theta", r.theta},     {"pair_accepted", r.pair_accepted},
      {"test_satisfied", r.test_satisfied}};
}

IterationRow row_from_json(const nlohmann::json& j) {
  IterationRow r;
  r.iter = j.at("iter").get<std::uint64_t>();
  r.evals = j.at("evals").get<std::uint64_t>();
  r.fvalue = j.at("fvalue").get<double>();
  r.gap = j.at("gap").get<double>();
  r.batch = j.at("batch").get<std::uint64_t>();
  r.alpha = j.at("alpha").get<double>();
  r.theta = j.at("theta").get<double>();
  r.pair_accepted = j.at("pair_accepted").get<bool>();
  r.test_satisfied = j.at("test_satisfied").get<bool>();
  return r;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace(const RunRecord& record, std::ostream& out, TraceFormat format) {
  if (format == TraceFormat::Csv) {
    out << kHeader << '\n';
    for (const auto& r : record.rows) {
      out << r.iter << ',' << r.evals << ',' << format_double(r.fvalue) << ','
          << format_double(r.gap) << ',' << r.batch << ','
          << format_double(r.alpha) << ',' << format_double(r.theta) << ','
          << (r.pair_accepted ? 1 : 0) << ',' << (r.test_satisfied ? 1 : 0)
          << '\n';
    }
    return;
  }
  nlohmann::json j;
  j["metadata"] = {{"problem", record.problem},
                   {"method", record.method},
                   {"run_seed", record.run_seed},
                   {"fstar", record.fstar},
                   {"status", to_string(record.status)}};
  j["rows"] = nlohmann::json::array();
  for (const auto& r : record.rows) j["rows"].push_back(row_to_json(r));
  out << j.dump(2) << '\n';
}

void write_trace(const RunRecord& record, const std::string& path,
                 TraceFormat format) {
  auto out = open_out(path);
  write_trace(record, out, format);
}

RunRecord read_trace_stream(std::istream& in, TraceFormat format) {
  RunRecord record;
  if (format == TraceFormat::Csv) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trace file");
    if (line != kHeader) throw std::runtime_error("unexpected trace header: " + line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      IterationRow r;
      std::istringstream ss(line);
      char comma;
      int pair_flag = 0, test_flag = 0;
      ss >> r.iter >> comma >> r.evals >> comma >> r.fvalue >> comma >> r.gap >>
          comma >> r.batch >> comma >> r.alpha >> comma >> r.theta >> comma >>
          pair_flag >> comma >> test_flag;
      if (!ss) throw std::runtime_error("malformed trace row: " + line);
      r.pair_accepted = pair_flag != 0;
      r.test_satisfied = test_flag != 0;
      record.rows.push_back(r);
    }
    return record;
  }
  nlohmann::json j;
  in >> j;
  const auto& meta = j.at("metadata");
  record.problem = meta.at("problem").get<std::string>();
  record.method = meta.at("method").get<std::string>();
  record.run_seed = meta.at("run_seed").get<std::uint64_t>();
  record.fstar = meta.at("fstar").get<double>();
  record.status = status_from_string(meta.at("status").get<std::string>());
  for (const auto& jr : j.at("rows")) record.rows.push_back(row_from_json(jr));
  return record;
}

RunRecord read_trace(const std::string& path, TraceFormat format) {
  auto in = open_in(path);
  return read_trace_stream(in, format);
}

std::vector<AggregateRow> aggregate_traces(const std::vector<RunRecord>& records,
                                           std::uint64_t max_evals,
                                           std::size_t grid_points) {
  if (records.empty()) throw std::invalid_argument("aggregate_traces: no records");
  if (grid_points < 2) throw std::invalid_argument("aggregate_traces: grid too small");

  std::vector<AggregateRow> out;
  out.reserve(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const std::uint64_t e = static_cast<std::uint64_t>(
        (static_cast<long double>(max_evals) * i) / (grid_points - 1));
    AggregateRow row;
    row.evals = e;
    row.min_gap = std::numeric_limits<double>::infinity();
    row.max_gap = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& rec : records) {
      if (rec.rows.empty()) {
        throw std::invalid_argument("aggregate_traces: record with no rows");
      }
      // Previous-value hold; before the first row the initial gap applies.
      double gap = rec.rows.front().gap;
      for (const auto& r : rec.rows) {
        if (r.evals <= e) {
          gap = r.gap;
        } else {
          break;
        }
      }
      row.min_gap = std::min(row.min_gap, gap);
      row.max_gap = std::max(row.max_gap, gap);
      sum += gap;
    }
    row.mean_gap = sum / static_cast<double>(records.size());
    out.push_back(row);
  }
  return out;
}

void write_aggregate(const std::vector<AggregateRow>& rows, std::ostream& out) {
  out << "evals,min_gap,mean_gap,max_gap\n";
  for (const auto& r : rows) {
    out << r.evals << ',' << format_double(r.min_gap) << ','
        << format_double(r.mean_gap) << ',' << format_double(r.max_gap) << '\n';
  }
}

void write_aggregate(const std::vector<AggregateRow>& rows, const std::string& path) {
  auto out = open_out(path);
  write_aggregate(rows, out);
}

std::vector<AggregateRow> read_aggregate(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "evals,min_gap,mean_gap,max_gap") {
    throw std::runtime_error("unexpected aggregate header in " + path);
  }
  std::vector<AggregateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    AggregateRow r;
    char comma;
    std::istringstream ss(line);
    ss >> r.evals >> comma >> r.min_gap >> comma >> r.mean_gap >> comma >> r.max_gap;
    if (!ss) throw std::runtime_error("malformed aggregate row: " + line);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace zoqn
