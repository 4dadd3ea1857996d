#pragma once

// Trace CSV (long format, one row per agent-axis-step), plot series and the
// metrics summary file.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "ppcform/metrics.hpp"
#include "ppcform/simulation.hpp"

namespace ppcform {

inline constexpr std::string_view kTraceHeader =
    "t,agent,axis,xp,xv,zeta_p,zeta_v,xi_p,xi_v,rho,e_p,e_v,bound_lo,bound_hi,eps,s,v,u,du,xa,"
    "fault_active";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Writes every `stride`-th record (step % stride == 0).
class CsvTraceWriter : public TraceSink {
 public:
  CsvTraceWriter(const std::filesystem::path& path, int stride = 1);
  void consume(const TraceRecord& record) override;
  void finish() override;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  int stride_;
  std::string buffer_;
};

/// Parses a trace CSV; rows sharing a time stamp form one record. Throws
/// IoError on unreadable files and ParseError on malformed content.
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);

/// Plot series in `dir`:
///   snapshot_t<T>.csv       positions of every agent at the record nearest T
///   observer_envelope.csv   t, agent, axis, xi_p, -rho, rho
///   tracking_envelope.csv   t, agent, axis, e_p, bound_lo, bound_hi, xa
/// Envelope files keep every `stride`-th step.
class PlotdataWriter : public TraceSink {
 public:
  PlotdataWriter(const std::filesystem::path& dir, double dt, std::int64_t steps,
                 std::vector<double> snapshot_times, int stride = 1);
  void consume(const TraceRecord& record) override;
  void finish() override;

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<double, std::int64_t>> snapshots_;  // requested time, step
  int stride_;
  std::ofstream observer_, tracking_;
};

void write_metrics_json(const std::filesystem::path& path, const RunMetrics& metrics,
                        const RunSummary& summary, const std::string& scenario,
                        std::uint64_t seed);

}  // namespace ppcform
