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

#include "panda/pipeline.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "panda/parallel.h"

namespace panda {

const std::set<std::string, std::less<>>& RunConfig::keys() {
  static const std::set<std::string, std::less<>> k = {
      "epsilon",        "min_cpi_samples", "victim_threshold", "percentile",
      "run_length",     "min_obs",         "lookback_slots",   "subsample_slots",
      "chi_categories", "chi_threshold",   "max_resamples",    "methods",
      "threads",        "slots_per_day",   "eval_from_day",    "calibrate_twin_ratio",
      "trace_format"};
  return k;
}

namespace {

uint32_t get_u32(const KeyValueConfig& kv, std::string_view key, uint32_t fallback) {
  uint64_t v = kv.get_uint(key, fallback);
  if (v > UINT32_MAX) throw ConfigError(std::string(key) + " is out of range");
  return static_cast<uint32_t>(v);
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    std::size_t comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    std::string_view item = list.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("methods: empty list");
  return out;
}

}  // namespace

RunConfig RunConfig::from_kv(const KeyValueConfig& kv) {
  RunConfig c;
  c.preprocess.epsilon = kv.get_double("epsilon", c.preprocess.epsilon);
  c.preprocess.min_cpi_samples =
      kv.get_uint("min_cpi_samples", c.preprocess.min_cpi_samples);
  c.detector.victim_threshold =
      kv.get_double("victim_threshold", c.detector.victim_threshold);
  c.detector.percentile = kv.get_double("percentile", c.detector.percentile);
  c.detector.run_length = get_u32(kv, "run_length", c.detector.run_length);
  c.detector.min_obs = kv.get_uint("min_obs", c.detector.min_obs);
  c.baselines.lookback_slots = get_u32(kv, "lookback_slots", c.baselines.lookback_slots);
  c.baselines.subsample_slots =
      get_u32(kv, "subsample_slots", c.baselines.subsample_slots);
  c.baselines.chi_categories = get_u32(kv, "chi_categories", c.baselines.chi_categories);
  c.baselines.chi_threshold = kv.get_double("chi_threshold", c.baselines.chi_threshold);
  c.baselines.max_resamples = get_u32(kv, "max_resamples", c.baselines.max_resamples);
  if (auto m = kv.raw("methods")) c.methods = parse_methods(*m);
  c.seed = kv.get_uint("seed", c.seed);
  c.threads = get_u32(kv, "threads", c.threads);
  c.slots_per_day = get_u32(kv, "slots_per_day", c.slots_per_day);
  c.eval_from_day = get_u32(kv, "eval_from_day", c.eval_from_day);

  if (!(c.preprocess.epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (c.preprocess.min_cpi_samples < 1) throw ConfigError("min_cpi_samples must be >= 1");
  if (!(c.detector.percentile > 0 && c.detector.percentile <= 1)) {
    throw ConfigError("percentile must be in (0, 1]");
  }
  if (c.detector.run_length < 1) throw ConfigError("run_length must be >= 1");
  if (c.baselines.lookback_slots < 2) throw ConfigError("lookback_slots must be >= 2");
  if (c.baselines.subsample_slots < 2 ||
      c.baselines.subsample_slots > c.baselines.lookback_slots) {
    throw ConfigError("subsample_slots must be in [2, lookback_slots]");
  }
  if (c.baselines.chi_categories < 1) throw ConfigError("chi_categories must be >= 1");
  if (c.slots_per_day < 1) throw ConfigError("slots_per_day must be >= 1");
  if (c.eval_from_day < 1) throw ConfigError("eval_from_day must be >= 1");
  return c;
}

std::vector<MachineIndex> index_by_machine(std::span<const MachineSlotGroup> groups) {
  std::vector<MachineIndex> out;
  std::size_t begin = 0;
  while (begin < groups.size()) {
    std::size_t end = begin + 1;
    while (end < groups.size() && groups[end].machine == groups[begin].machine) ++end;
    out.push_back({groups[begin].machine, groups.subspan(begin, end - begin)});
    begin = end;
  }
  return out;
}

uint32_t last_day(std::span<const MachineSlotGroup> groups, uint32_t slots_per_day) {
  uint32_t d = 0;
  for (const MachineSlotGroup& g : groups) d = std::max(d, day_of(g.slot, slots_per_day));
  return d;
}

namespace {

// Groups of one machine that fall on `day`.
std::span<const MachineSlotGroup> day_range(std::span<const MachineSlotGroup> groups,
                                            uint32_t day, uint32_t slots_per_day) {
  auto lo = std::partition_point(groups.begin(), groups.end(), [&](const auto& g) {
    return day_of(g.slot, slots_per_day) < day;
  });
  auto hi = std::partition_point(lo, groups.end(), [&](const auto& g) {
    return day_of(g.slot, slots_per_day) <= day;
  });
  return {lo, hi};
}

}  // namespace

std::vector<OfflineDay> build_offline_days(std::span<const MachineSlotGroup> groups,
                                           uint32_t upto_day, const OfflineDay& prev,
                                           const RunConfig& config) {
  if (upto_day <= prev.day) throw OutOfOrderDay(upto_day, prev.day);
  const auto machines = index_by_machine(groups);
  const uint32_t spd = config.slots_per_day;
  std::vector<OfflineDay> out;
  const OfflineDay* last = &prev;
  for (uint32_t day = prev.day + 1; day <= upto_day; ++day) {
    OfflineDay next;
    next.day = day;

    std::vector<JobStatsTable> partial_stats(machines.size());
    parallel_for(machines.size(), config.threads, [&](std::size_t i) {
      for (const MachineSlotGroup& g : day_range(machines[i].groups, day, spd)) {
        for (const TraceRecord& r : g.records) partial_stats[i].add(r);
      }
    });
    next.stats = last->stats;
    for (const JobStatsTable& t : partial_stats) next.stats.merge(t);

    std::vector<CoefficientSnapshot> partial(machines.size());
    parallel_for(machines.size(), config.threads, [&](std::size_t i) {
      for (const MachineSlotGroup& g : day_range(machines[i].groups, day, spd)) {
        partial[i].accumulate(aggregate_machine_slot(g, next.stats, config.preprocess));
      }
    });
    next.snapshot = last->snapshot;
    for (const CoefficientSnapshot& s : partial) next.snapshot.merge_from(s);
    next.snapshot.as_of_day = day;

    out.push_back(std::move(next));
    last = &out.back();
  }
  return out;
}

namespace {

std::string day_file(const std::string& dir, const char* prefix, uint32_t day) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_day%03u.csv", prefix, day);
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::string stats_path(const std::string& dir, uint32_t day) {
  return day_file(dir, "stats", day);
}

std::string snapshot_path(const std::string& dir, uint32_t day) {
  return day_file(dir, "coeff", day);
}

void save_offline_day(const std::string& dir, const OfflineDay& day) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  // Write to a temporary name first so a crash never leaves a half file that
  // later looks like a valid snapshot.
  auto write = [](const std::string& path, auto&& body) {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw IoError("cannot write " + tmp);
      body(out);
      if (!out) throw IoError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
  };
  write(stats_path(dir, day.day), [&](std::ostream& o) { day.stats.write_csv(o); });
  write(snapshot_path(dir, day.day),
        [&](std::ostream& o) { day.snapshot.write_csv(o); });
}

OfflineDay load_offline_day(const std::string& dir, uint32_t day) {
  OfflineDay out;
  if (day == 0) return out;
  std::ifstream stats(stats_path(dir, day), std::ios::binary);
  std::ifstream coeff(snapshot_path(dir, day), std::ios::binary);
  if (!stats || !coeff) throw MissingSnapshot(day);
  out.day = day;
  out.stats = JobStatsTable::read_csv(stats);
  out.snapshot = CoefficientSnapshot::read_csv(coeff);
  out.snapshot.as_of_day = day;
  return out;
}

uint32_t latest_offline_day(const std::string& dir) {
  uint32_t best = 0;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    unsigned day = 0;
    if (std::sscanf(name.c_str(), "coeff_day%u.csv", &day) != 1) continue;
    if (name != std::filesystem::path(snapshot_path("", day)).filename().string()) {
      continue;
    }
    if (std::filesystem::exists(stats_path(dir, day))) best = std::max<uint32_t>(best, day);
  }
  return best;
}

DetectOutput run_detect(std::span<const MachineSlotGroup> groups,
                        const OfflineLookup& offline, const RunConfig& config) {
  const uint32_t spd = config.slots_per_day;
  const uint32_t final_day = last_day(groups, spd);
  DetectOutput out;
  if (final_day < config.eval_from_day) return out;

  // Resolve offline state up front; the lookup need not be thread-safe.
  std::map<uint32_t, const OfflineDay*> states;
  for (uint32_t d = config.eval_from_day; d <= final_day; ++d) {
    states[d - 1] = &offline(d - 1);
  }

  auto wants = [&](Method m) {
    return std::find(config.methods.begin(), config.methods.end(), m) !=
           config.methods.end();
  };
  const bool cpi2 = wants(Method::kCpi2);
  const bool proctor = wants(Method::kProctor);
  const auto machines = index_by_machine(groups);
  std::vector<DetectOutput> partial(machines.size());
  parallel_for(machines.size(), config.threads, [&](std::size_t i) {
    const MachineIndex& mi = machines[i];
    DetectOutput& mine = partial[i];
    TriggerScanner scanner(config.detector.run_length);
    std::vector<NormalizedSample> norm;
    for (uint32_t day = config.eval_from_day; day <= final_day; ++day) {
      const OfflineDay& state = *states.at(day - 1);
      auto today = day_range(mi.groups, day, spd);
      if (today.empty()) continue;

      std::vector<double> history;
      auto before = mi.groups.subspan(
          0, static_cast<std::size_t>(today.data() - mi.groups.data()));
      for (const MachineSlotGroup& g : before) {
        auto p = aggregate_machine_slot(g, state.stats, config.preprocess);
        if (p.mncpi) history.push_back(*p.mncpi);
      }
      double p99 = 0.0;
      try {
        p99 = machine_p99(history, config.detector.percentile);
      } catch (const EmptyHistory&) {
        continue;
      }

      for (const MachineSlotGroup& g : today) {
        norm.clear();
        MachineSlotProfile profile =
            aggregate_machine_slot(g, state.stats, config.preprocess, &norm);
        std::vector<VictimFlag> victims =
            detect_victims(profile, norm, config.detector.victim_threshold);
        if (!victims.empty()) mine.victim_slots.push_back({g.machine, g.slot, victims.size()});
        if (!scanner.push(g.slot, qualifies(profile, victims, p99))) continue;

        TriggerEvent event{g.machine, g.slot, std::move(victims), *profile.mncpi};
        for (Method m : config.methods) {
          if (m != Method::kPanda && m != Method::kPandaLocal) continue;
          mine.results.push_back(identify_panda(
              event, profile, state.snapshot,
              m == Method::kPanda ? CoefficientScope::kGlobal : CoefficientScope::kLocal,
              config.detector.min_obs));
        }
        if (!cpi2 && !proctor) continue;
        for (const VictimFlag& v : event.victims) {
          WindowSeries window =
              build_window(mi.groups, event.slot, config.baselines.lookback_slots, v.task);
          if (cpi2) mine.results.push_back(identify_cpi2(event, v, window));
          if (proctor) {
            uint64_t seed = derive_seed(config.seed, event.machine.value, event.slot.value,
                                        v.task.job.value, v.task.task_index);
            mine.results.push_back(
                identify_proctor(event, v, window, seed, config.baselines));
          }
        }
      }
    }
  });
  for (DetectOutput& p : partial) {
    std::move(p.results.begin(), p.results.end(), std::back_inserter(out.results));
    out.victim_slots.insert(out.victim_slots.end(), p.victim_slots.begin(),
                            p.victim_slots.end());
  }
  return out;
}

void write_results_file(const std::string& path,
                        std::span<const IdentificationResult> results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const IdentificationResult& r : results) write_result_jsonl(out, r);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<IdentificationResult> read_results_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_results_jsonl(in);
}

void write_victim_slots(const std::string& path, std::span<const VictimSlot> slots) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "machine_id,slot,victims\n";
  for (const VictimSlot& v : slots) {
    out << v.machine.value << ',' << v.slot.value << ',' << v.victims << '\n';
  }
}

std::vector<VictimSlot> read_victim_slots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<VictimSlot> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    VictimSlot v;
    unsigned long long m = 0, s = 0, n = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%llu", &m, &s, &n) != 3) {
      throw ParseError(line_no, "bad victim_slots row");
    }
    v.machine = MachineId{m};
    v.slot = SlotTime{static_cast<uint32_t>(s)};
    v.victims = n;
    out.push_back(v);
  }
  return out;
}

}  // namespace panda
