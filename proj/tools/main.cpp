#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "ppcform/config.hpp"
#include "ppcform/errors.hpp"
#include "ppcform/metrics.hpp"
#include "ppcform/simulation.hpp"
#include "ppcform/trace_io.hpp"

namespace fs = std::filesystem;
using namespace ppcform;

namespace {

constexpr int kExitViolations = 1;
constexpr int kExitError = 2;

std::optional<std::uint64_t> parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

ScenarioConfig load_or_default(const std::string& path) {
  return path.empty() ? paper_scenario() : load_config(path);
}

void print_issues(const ValidationError& e) {
  std::cerr << "invalid scenario:\n";
  for (const auto& issue : e.issues()) std::cerr << "  " << issue.path << ": " << issue.message << '\n';
}

struct RunOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> dt;
  std::string fidelity;
  std::optional<int> stride;
  bool quiet = false;
};

void apply_overrides(ScenarioConfig& c, const RunOptions& o) {
  if (o.seed) {
    c.seed = *o.seed;
  } else if (const char* env = std::getenv("PPCFORM_SEED")) {
    const auto v = parse_u64(env);
    if (!v) throw std::invalid_argument("PPCFORM_SEED is not a non-negative integer");
    c.seed = *v;
  }
  if (o.duration) c.duration = *o.duration;
  if (o.dt) c.dt = *o.dt;
  if (o.fidelity == "full") c.fidelity = Fidelity::Full;
  if (o.fidelity == "simplified") c.fidelity = Fidelity::Simplified;
  if (o.stride) c.trace_stride = *o.stride;
  if (auto issues = validate(c); !issues.empty()) throw ValidationError(std::move(issues));
}

void print_metrics(const RunMetrics& m, const RunSummary& s) {
  auto site = [](const ViolationSite& v) {
    if (std::isnan(v.t)) return std::string("-");
    return "t=" + format_double(v.t) + " agent " + std::to_string(v.agent) + " axis " +
           kAxisNames[v.axis];
  };
  std::cout << "steps                      " << s.steps << '\n'
            << "observer violations        " << m.observer_violations << "  (first: "
            << site(m.first_observer_violation) << ")\n"
            << "tracking violations        " << m.tracking_violations << "  (first: "
            << site(m.first_tracking_violation) << ")\n"
            << "steady max |xi_p|          " << m.steady_max_xi_p << '\n'
            << "steady max |e_p|           " << m.steady_max_e_p << '\n'
            << "observer convergence time  " << m.convergence_time << '\n'
            << "hull containment (t>T)     " << m.hull_ratio_after_horizon << '\n'
            << "hull containment (t>2T)    " << m.hull_ratio_after_twice_horizon << '\n'
            << "saturation duty            " << m.saturation_duty << '\n'
            << "max |x_a|                  " << m.max_abs_xa << '\n'
            << "corridor revert failures   " << m.corridor_revert_failures << '\n'
            << "transform clamps           " << s.clamps.transform_total() << '\n'
            << "weight floor clamps        " << s.clamps.weight_floor << '\n';
}

int cmd_run(const RunOptions& o) {
  ScenarioConfig c = load_or_default(o.config);
  apply_overrides(c, o);
  fs::path out = o.out;
  if (out.empty()) {
    const char* env = std::getenv("PPCFORM_OUT_DIR");
    out = env ? fs::path(env) : fs::path("out");
  }
  CsvTraceWriter csv(out / "trace.csv", c.trace_stride);
  PlotdataWriter plot(out / "plotdata", c.dt, c.step_count(), {10.0, 20.0, 30.0}, c.trace_stride);
  MetricsAccumulator metrics(MetricsContext::from(c));
  TraceSink* sinks[] = {&csv, &plot, &metrics};
  const RunSummary summary = run(c, sinks);
  write_metrics_json(out / "metrics.json", metrics.metrics(), summary, c.name, c.seed);
  if (!o.quiet) {
    std::cout << "scenario " << c.name << ", seed " << c.seed << ", output " << out.string()
              << '\n';
    print_metrics(metrics.metrics(), summary);
  }
  return metrics.metrics().violations() == 0 ? 0 : kExitViolations;
}

int cmd_sweep(const RunOptions& o, const std::string& range, unsigned threads) {
  const auto dots = range.find("..");
  const auto lo = dots == std::string::npos ? std::nullopt : parse_u64(range.substr(0, dots));
  const auto hi = dots == std::string::npos ? std::nullopt : parse_u64(range.substr(dots + 2));
  if (!lo || !hi || *hi < *lo) throw std::invalid_argument("--seeds expects A..B with A <= B");

  ScenarioConfig base = load_or_default(o.config);
  RunOptions no_seed = o;
  no_seed.seed.reset();
  apply_overrides(base, no_seed);

  const std::uint64_t count = *hi - *lo + 1;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));

  struct Outcome {
    RunMetrics metrics;
    RunSummary summary;
    std::string error;
  };
  std::vector<Outcome> outcomes(count);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t k = next++; k < count; k = next++) {
      ScenarioConfig c = base;
      c.seed = *lo + k;
      try {
        MetricsAccumulator acc(MetricsContext::from(c));
        TraceSink* sinks[] = {&acc};
        outcomes[k].summary = run(c, sinks);
        outcomes[k].metrics = acc.metrics();
      } catch (const std::exception& e) {
        outcomes[k].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  int failures = 0, errors = 0;
  if (!o.quiet) std::cout << "seed,observer_violations,tracking_violations,steady_xi_p,steady_e_p,transform_clamps,error\n";
  for (std::uint64_t k = 0; k < count; ++k) {
    const Outcome& r = outcomes[k];
    const bool bad = !r.error.empty() || r.metrics.violations() != 0;
    errors += r.error.empty() ? 0 : 1;
    failures += bad ? 1 : 0;
    if (!o.quiet) {
      std::cout << *lo + k << ',' << r.metrics.observer_violations << ','
                << r.metrics.tracking_violations << ',' << r.metrics.steady_max_xi_p << ','
                << r.metrics.steady_max_e_p << ',' << r.summary.clamps.transform_total() << ','
                << r.error << '\n';
    }
  }
  std::cout << count << " seeds, " << failures << " with violations or errors\n";
  if (errors > 0) return kExitError;
  return failures == 0 ? 0 : kExitViolations;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed prescribed-performance formation control of mixed UAV/UGV teams"};
  app.require_subcommand(1);

  RunOptions opts;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "scenario JSON (default: bundled reference scenario)");
    sub->add_option("--seed", opts.seed, "fault-noise seed (overrides PPCFORM_SEED)");
    sub->add_option("--duration", opts.duration, "run length, s");
    sub->add_option("--dt", opts.dt, "integrator step, s");
    sub->add_option("--fidelity", opts.fidelity, "plant model")
        ->check(CLI::IsMember({"simplified", "full"}));
    sub->add_flag("--quiet", opts.quiet, "suppress the summary");
  };

  auto* run_cmd = app.add_subcommand("run", "simulate one scenario and export trace and metrics");
  add_run_flags(run_cmd);
  run_cmd->add_option("--out", opts.out, "output directory (overrides PPCFORM_OUT_DIR)");
  run_cmd->add_option("--stride", opts.stride, "write every n-th step to the trace")
      ->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check a scenario file");
  validate_cmd->add_option("--config", validate_path, "scenario JSON")->required();

  std::string emit_path;
  auto* paper_cmd = app.add_subcommand("paper-scenario", "print the bundled reference scenario");
  paper_cmd->add_option("--out", emit_path, "write to a file instead of stdout");

  std::string seeds;
  unsigned threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a seed range in parallel (metrics only)");
  add_run_flags(sweep_cmd);
  sweep_cmd->add_option("--seeds", seeds, "inclusive range A..B")->required();
  sweep_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(opts);
    if (*sweep_cmd) return cmd_sweep(opts, seeds, threads);
    if (*validate_cmd) {
      const ScenarioConfig c = load_config(validate_path);
      std::cout << validate_path << ": ok (" << c.agents.size() << " agents, "
                << c.step_count() << " steps)\n";
      return 0;
    }
    if (*paper_cmd) {
      const std::string text = to_json_text(paper_scenario());
      if (emit_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(emit_path, std::ios::binary);
        out << text;
        if (!out) throw IoError("cannot write " + emit_path);
      }
      return 0;
    }
  } catch (const ValidationError& e) {
    print_issues(e);
    return kExitError;
  } catch (const ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
