// Copyright 2026 The PANDA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// panda: synthetic traces, offline coefficient snapshots, online antagonist
// identification and evaluation.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad configuration or
// usage, 3 unreadable input or missing snapshot, 4 no ground truth match.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "panda/config.h"
#include "panda/eval.h"
#include "panda/parallel.h"
#include "panda/pipeline.h"
#include "panda/synth.h"
#include "panda/trace.h"
#include "spdlog/spdlog.h"

namespace {

using namespace panda;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitNoTruth = 4;

struct Globals {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<uint32_t> threads;
  std::string out_dir = "out";
};

struct Loaded {
  KeyValueConfig kv;
  SynthConfig synth;
  RunConfig run;
};

Loaded load_config(const Globals& g) {
  Loaded l;
  if (!g.config_path.empty()) l.kv = KeyValueConfig::load(g.config_path);
  if (g.seed) l.kv.set("seed", std::to_string(*g.seed));
  if (g.threads) l.kv.set("threads", std::to_string(*g.threads));
  l.synth = synth_config_from(l.kv, RunConfig::keys());
  l.run = RunConfig::from_kv(l.kv);
  return l;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::string truth_path_for(const std::string& trace_path) {
  std::filesystem::path p(trace_path);
  return (p.parent_path() / (p.stem().string() + ".truth.csv")).string();
}

struct LoadedTrace {
  std::vector<TraceRecord> records;
  std::vector<MachineSlotGroup> groups;
};

// Groups hold spans into `records`, so the struct must not be copied.
std::unique_ptr<LoadedTrace> load_trace(const std::string& path) {
  auto t = std::make_unique<LoadedTrace>();
  spdlog::info("reading {}", path);
  t->records = read_trace_file(path);
  t->groups = sort_and_group(t->records);
  spdlog::info("{} records in {} machine-slots", t->records.size(), t->groups.size());
  return t;
}

GroundTruth read_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return GroundTruth::read_csv(in);
}

SynthConfig maybe_calibrate(const Loaded& l) {
  SynthConfig c = l.synth;
  if (auto target = l.kv.raw("calibrate_twin_ratio")) {
    double t = l.kv.get_double("calibrate_twin_ratio", 0.0);
    spdlog::info("calibrating noise_sigma for twin ratio {}", *target);
    c = calibrate_noise(c, t, NoiseTarget::kTwin, 0.005, l.run.threads);
    spdlog::info("noise_sigma = {}", c.noise_sigma);
  }
  return c;
}

void cmd_synth(const Globals& g, const std::string& out_path) {
  Loaded l = load_config(g);
  SynthConfig c = maybe_calibrate(l);
  SynthOutput s = generate(c, l.run.threads);
  const std::string path =
      out_path.empty() ? (std::filesystem::path(g.out_dir) / "trace.csv").string()
                       : out_path;
  if (auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
    ensure_dir(parent.string());
  }
  write_trace_file(path, s.trace);
  std::ofstream truth(truth_path_for(path), std::ios::binary);
  if (!truth) throw IoError("cannot write " + truth_path_for(path));
  s.truth.write_csv(truth);
  spdlog::info("wrote {} records to {} (noise_sigma {})", s.trace.size(), path,
               c.noise_sigma);
}

void cmd_offline(const Globals& g, const std::string& trace_path,
                 std::optional<uint32_t> upto, bool incremental) {
  Loaded l = load_config(g);
  auto t = load_trace(trace_path);
  const uint32_t final_day = last_day(t->groups, l.run.slots_per_day);
  const uint32_t target = upto.value_or(final_day);
  OfflineDay prev;
  if (incremental) prev = load_offline_day(g.out_dir, latest_offline_day(g.out_dir));
  if (target <= prev.day) throw OutOfOrderDay(target, prev.day);
  for (const OfflineDay& d : build_offline_days(t->groups, target, prev, l.run)) {
    save_offline_day(g.out_dir, d);
    spdlog::info("day {}: {} jobs with stats, {} global accumulators", d.day,
                 d.stats.size(), d.snapshot.global.size());
  }
}

void cmd_detect(const Globals& g, const std::string& trace_path,
                std::string snapshots, const std::string& methods,
                std::optional<uint32_t> eval_from) {
  Loaded l = load_config(g);
  if (!methods.empty()) {
    l.kv.set("methods", methods);
    l.run = RunConfig::from_kv(l.kv);
  }
  if (eval_from) l.run.eval_from_day = *eval_from;
  if (snapshots.empty()) snapshots = g.out_dir;
  auto t = load_trace(trace_path);
  std::map<uint32_t, OfflineDay> cache;
  OfflineLookup lookup = [&](uint32_t day) -> const OfflineDay& {
    auto it = cache.find(day);
    if (it == cache.end()) it = cache.emplace(day, load_offline_day(snapshots, day)).first;
    return it->second;
  };
  DetectOutput out = run_detect(t->groups, lookup, l.run);
  ensure_dir(g.out_dir);
  const auto base = std::filesystem::path(g.out_dir);
  write_results_file((base / "events.jsonl").string(), out.results);
  write_victim_slots((base / "victim_slots.csv").string(), out.victim_slots);
  spdlog::info("{} identification results", out.results.size());
}

int cmd_eval(const Globals& g, const std::string& events, const std::string& truth_path,
             const std::string& victims, const std::string& trace_path) {
  Loaded l = load_config(g);
  if (!std::filesystem::exists(truth_path)) {
    spdlog::error("truth file {} not found", truth_path);
    return kExitNoTruth;
  }
  auto results = read_results_file(events);
  GroundTruth truth = read_truth(truth_path);
  if (truth.antagonists.empty()) {
    spdlog::error("{} lists no antagonists", truth_path);
    return kExitNoTruth;
  }
  EvalReport report = evaluate(results, truth);
  if (!victims.empty()) {
    std::vector<std::size_t> counts;
    for (const VictimSlot& v : read_victim_slots(victims)) counts.push_back(v.victims);
    report.multi_victim_share = multi_victim_share(counts);
  }
  if (!trace_path.empty()) {
    auto t = load_trace(trace_path);
    TwinNoiseOptions opts;
    opts.preprocess = l.run.preprocess;
    opts.seed = derive_seed(l.run.seed, 0x7A15);
    try {
      report.noise = twin_noise_analysis(t->groups, opts);
    } catch (const NoTwins& e) {
      spdlog::warn("{}", e.what());
    }
  }
  emit_report(report, g.out_dir);
  std::cout << format_summary(report);
  bool any = false;
  for (const auto& [m, s] : report.methods) any = any || s.ranks > 0;
  if (!report.methods.empty() && !any) {
    spdlog::error("no result ranks a planted antagonist");
    return kExitNoTruth;
  }
  return kExitOk;
}

void cmd_noise(const Globals& g, const std::string& trace_path) {
  Loaded l = load_config(g);
  auto t = load_trace(trace_path);
  TwinNoiseOptions opts;
  opts.preprocess = l.run.preprocess;
  opts.seed = derive_seed(l.run.seed, 0x7A15);
  TwinNoiseReport r = twin_noise_analysis(t->groups, opts);
  std::cout << "twin_ratio " << format_double(r.twin_ratio) << " over "
            << r.job_ratios.size() << " jobs\n"
            << "colocated_ratio " << format_double(r.colocated_ratio) << '\n';
  EvalReport report;
  report.noise = std::move(r);
  ensure_dir(g.out_dir);
  std::ofstream out(std::filesystem::path(g.out_dir) / "twin_hist.csv", std::ios::binary);
  out << "job_id,bin_left,bin_right,density_twin,density_random\n";
  for (const HistogramRow& h : report.noise->histograms) {
    out << h.job.value << ',' << format_double(h.bin_left) << ','
        << format_double(h.bin_right) << ',' << format_double(h.density_twin) << ','
        << format_double(h.density_random) << '\n';
  }
}

// Generates, snapshots, detects and evaluates in one process, writing every
// intermediate artifact under the output directory.
int cmd_run(const Globals& g) {
  Loaded l = load_config(g);
  SynthConfig c = maybe_calibrate(l);
  ensure_dir(g.out_dir);
  const auto base = std::filesystem::path(g.out_dir);
  SynthOutput s = generate(c, l.run.threads);
  write_trace_file((base / "trace.csv").string(), s.trace);
  {
    std::ofstream truth(base / "trace.truth.csv", std::ios::binary);
    s.truth.write_csv(truth);
  }
  auto groups = sort_and_group(s.trace);
  const uint32_t final_day = last_day(groups, l.run.slots_per_day);
  spdlog::info("{} records over {} days", s.trace.size(), final_day);
  auto days = build_offline_days(groups, final_day, OfflineDay{}, l.run);
  const std::string snap_dir = (base / "snapshots").string();
  for (const OfflineDay& d : days) save_offline_day(snap_dir, d);
  OfflineDay empty;
  OfflineLookup lookup = [&](uint32_t day) -> const OfflineDay& {
    return day == 0 ? empty : days.at(day - 1);
  };
  DetectOutput det = run_detect(groups, lookup, l.run);
  write_results_file((base / "events.jsonl").string(), det.results);
  write_victim_slots((base / "victim_slots.csv").string(), det.victim_slots);

  EvalReport report = evaluate(det.results, s.truth);
  std::vector<std::size_t> counts;
  for (const VictimSlot& v : det.victim_slots) counts.push_back(v.victims);
  report.multi_victim_share = multi_victim_share(counts);
  TwinNoiseOptions opts;
  opts.preprocess = l.run.preprocess;
  opts.seed = derive_seed(l.run.seed, 0x7A15);
  try {
    report.noise = twin_noise_analysis(groups, opts);
  } catch (const NoTwins& e) {
    spdlog::warn("{}", e.what());
  }
  emit_report(report, g.out_dir);
  std::cout << format_summary(report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* level = std::getenv("PANDA_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

  CLI::App app{"Antagonist identification for colocated workloads"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads, 0 for all cores");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic trace and its ground truth");
  synth->add_option("--out", synth_out, "Trace path (.csv or .jsonl)");

  std::string trace;
  std::optional<uint32_t> upto;
  bool incremental = false;
  auto* offline = app.add_subcommand("offline", "Build per-day statistics and coefficient snapshots");
  offline->add_option("--trace", trace, "Input trace")->required();
  offline->add_option("--upto-day", upto, "Last day to include (default: last day in trace)");
  offline->add_flag("--incremental", incremental,
                    "Extend the latest snapshot in --out-dir instead of rebuilding");

  std::string snapshots, methods;
  std::optional<uint32_t> eval_from;
  auto* detect = app.add_subcommand("detect", "Run the trigger and identify antagonists");
  detect->add_option("--trace", trace, "Input trace")->required();
  detect->add_option("--snapshots", snapshots, "Snapshot directory (default: --out-dir)");
  detect->add_option("--methods", methods, "Comma list of PANDA, PANDA-Local, CPI2, Proctor");
  detect->add_option("--eval-from-day", eval_from, "First evaluated day, 1-based (default 5)");

  std::string events, truth, victims;
  auto* eval = app.add_subcommand("eval", "Score identification results against ground truth");
  eval->add_option("--events", events, "Results file from detect")->required();
  eval->add_option("--truth", truth, "Ground-truth CSV from synth")->required();
  eval->add_option("--victims", victims, "victim_slots.csv from detect");
  eval->add_option("--trace", trace, "Trace for twin-task noise statistics");

  auto* noise = app.add_subcommand("noise", "Twin-task and colocated noise statistics");
  noise->add_option("--trace", trace, "Input trace")->required();

  auto* run = app.add_subcommand("run", "synth, offline, detect and eval in one go");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) cmd_synth(g, synth_out);
    if (offline->parsed()) cmd_offline(g, trace, upto, incremental);
    if (detect->parsed()) cmd_detect(g, trace, snapshots, methods, eval_from);
    if (eval->parsed()) return cmd_eval(g, events, truth, victims, trace);
    if (noise->parsed()) cmd_noise(g, trace);
    if (run->parsed()) return cmd_run(g);
    return kExitOk;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const OutOfOrderDay& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const MissingSnapshot& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const NoTwins& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
}
