#include "ppcform/trace_io.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

#include "ppcform/errors.hpp"

namespace ppcform {

namespace fs = std::filesystem;

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void append(std::string& s, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  s.append(buf.data(), res.ptr);
}

void append(std::string& s, std::int64_t v) {
  std::array<char, 24> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  s.append(buf.data(), res.ptr);
}

void flush(std::ofstream& out, std::string& buffer, const fs::path& path) {
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  buffer.clear();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

// ----------------------------------------------------------------- CSV

CsvTraceWriter::CsvTraceWriter(const fs::path& path, int stride)
    : path_(path), out_(open_out(path)), stride_(std::max(stride, 1)) {
  buffer_.append(kTraceHeader);
  buffer_.push_back('\n');
}

void CsvTraceWriter::consume(const TraceRecord& rec) {
  if (rec.step % stride_ != 0) return;
  for (const TraceRow& r : rec.rows) {
    append(buffer_, rec.t);
    for (std::int64_t v : {std::int64_t{r.agent}, std::int64_t{r.axis}}) {
      buffer_.push_back(',');
      append(buffer_, v);
    }
    for (double v : {r.xp, r.xv, r.zeta_p, r.zeta_v, r.xi_p, r.xi_v, r.rho, r.e_p, r.e_v,
                     r.bound_lo, r.bound_hi, r.eps, r.s, r.v, r.u, r.du, r.xa}) {
      buffer_.push_back(',');
      append(buffer_, v);
    }
    buffer_.append(r.fault_active ? ",1\n" : ",0\n");
  }
  if (buffer_.size() > (1u << 20)) flush(out_, buffer_, path_);
}

void CsvTraceWriter::finish() {
  flush(out_, buffer_, path_);
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
}

std::vector<TraceRecord> read_trace_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw ParseError(path.string() + ": header does not match the trace schema", 1, 1);
  }
  std::vector<TraceRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<double, 21> f{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t k = 0; k < f.size(); ++k) {
      const auto res = std::from_chars(p, end, f[k]);
      if (res.ec != std::errc()) {
        throw ParseError(path.string() + ": bad number", line_no, static_cast<int>(p - line.data()) + 1);
      }
      p = res.ptr;
      if (k + 1 < f.size()) {
        if (p == end || *p != ',') {
          throw ParseError(path.string() + ": expected ','", line_no,
                           static_cast<int>(p - line.data()) + 1);
        }
        ++p;
      }
    }
    if (p != end) {
      throw ParseError(path.string() + ": trailing content", line_no,
                       static_cast<int>(p - line.data()) + 1);
    }
    TraceRow r;
    r.agent = static_cast<int>(f[1]);
    r.axis = static_cast<int>(f[2]);
    r.xp = f[3];
    r.xv = f[4];
    r.zeta_p = f[5];
    r.zeta_v = f[6];
    r.xi_p = f[7];
    r.xi_v = f[8];
    r.rho = f[9];
    r.e_p = f[10];
    r.e_v = f[11];
    r.bound_lo = f[12];
    r.bound_hi = f[13];
    r.eps = f[14];
    r.s = f[15];
    r.v = f[16];
    r.u = f[17];
    r.du = f[18];
    r.xa = f[19];
    r.fault_active = f[20] != 0.0;
    if (records.empty() || records.back().t != f[0]) {
      TraceRecord rec;
      rec.step = static_cast<std::int64_t>(records.size());
      rec.t = f[0];
      rec.fault_active = r.fault_active;
      records.push_back(std::move(rec));
    }
    records.back().rows.push_back(r);
  }
  return records;
}

// ------------------------------------------------------------ plotdata

PlotdataWriter::PlotdataWriter(const fs::path& dir, double dt, std::int64_t steps,
                               std::vector<double> snapshot_times, int stride)
    : dir_(dir), stride_(std::max(stride, 1)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  for (double when : snapshot_times) {
    const auto step = std::clamp<std::int64_t>(std::llround(when / dt), 0, std::max<std::int64_t>(steps - 1, 0));
    snapshots_.emplace_back(when, step);
  }
  observer_ = open_out(dir_ / "observer_envelope.csv");
  tracking_ = open_out(dir_ / "tracking_envelope.csv");
  observer_ << "t,agent,axis,xi_p,lower,upper\n";
  tracking_ << "t,agent,axis,e_p,bound_lo,bound_hi,xa\n";
}

void PlotdataWriter::consume(const TraceRecord& rec) {
  for (const auto& [when, step] : snapshots_) {
    if (rec.step != step) continue;
    std::string name = "snapshot_t" + format_double(when) + ".csv";
    std::ofstream snap = open_out(dir_ / name);
    std::string text = "t,agent,x,y,z\n";
    std::vector<std::array<double, 3>> pos;
    std::vector<int> ids;
    for (const TraceRow& r : rec.rows) {
      if (ids.empty() || ids.back() != r.agent) {
        ids.push_back(r.agent);
        pos.push_back({0.0, 0.0, std::numeric_limits<double>::quiet_NaN()});
      }
      pos.back()[static_cast<std::size_t>(r.axis)] = r.xp;
    }
    for (std::size_t k = 0; k < ids.size(); ++k) {
      append(text, rec.t);
      text.push_back(',');
      append(text, std::int64_t{ids[k]});
      for (double v : pos[k]) {
        text.push_back(',');
        if (!std::isnan(v)) append(text, v);
      }
      text.push_back('\n');
    }
    snap << text;
    if (!snap) throw IoError("write failed for " + (dir_ / name).string());
  }
  if (rec.step % stride_ != 0) return;
  std::string obs, trk;
  for (const TraceRow& r : rec.rows) {
    append(obs, rec.t);
    append(trk, rec.t);
    for (std::string* s : {&obs, &trk}) {
      s->push_back(',');
      append(*s, std::int64_t{r.agent});
      s->push_back(',');
      append(*s, std::int64_t{r.axis});
    }
    for (double v : {r.xi_p, -r.rho, r.rho}) {
      obs.push_back(',');
      append(obs, v);
    }
    for (double v : {r.e_p, r.bound_lo, r.bound_hi, r.xa}) {
      trk.push_back(',');
      append(trk, v);
    }
    obs.push_back('\n');
    trk.push_back('\n');
  }
  observer_ << obs;
  tracking_ << trk;
}

void PlotdataWriter::finish() {
  observer_.flush();
  tracking_.flush();
  if (!observer_ || !tracking_) throw IoError("write failed under " + dir_.string());
}

// ------------------------------------------------------------- metrics

void write_metrics_json(const fs::path& path, const RunMetrics& m, const RunSummary& summary,
                        const std::string& scenario, std::uint64_t seed) {
  using nlohmann::json;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto site = [&](const ViolationSite& s) {
    return std::isnan(s.t) ? json(nullptr)
                           : json{{"t", s.t}, {"agent", s.agent}, {"axis", kAxisNames[s.axis]}};
  };
  json j = {
      {"scenario", scenario},
      {"seed", seed},
      {"steps", summary.steps},
      {"observer_violations", m.observer_violations},
      {"tracking_violations", m.tracking_violations},
      {"first_observer_violation", site(m.first_observer_violation)},
      {"first_tracking_violation", site(m.first_tracking_violation)},
      {"steady_max_abs_xi_p", m.steady_max_xi_p},
      {"steady_max_abs_e_p", m.steady_max_e_p},
      {"convergence_time", finite_or_null(m.convergence_time)},
      {"hull_containment_after_T", finite_or_null(m.hull_ratio_after_horizon)},
      {"hull_containment_after_2T", finite_or_null(m.hull_ratio_after_twice_horizon)},
      {"saturation_duty", m.saturation_duty},
      {"max_abs_xa", m.max_abs_xa},
      {"corridor_revert_failures", m.corridor_revert_failures},
      {"widening_without_saturation", m.widening_without_saturation},
      {"clamps",
       {{"observer_transform", summary.clamps.observer_transform},
        {"tracking_transform", summary.clamps.tracking_transform},
        {"weight_floor", summary.clamps.weight_floor}}},
      {"tilt_clips", summary.tilt_clips},
  };
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ppcform
