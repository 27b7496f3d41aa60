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

// End-to-end stages shared by the CLI and the tests: offline statistics and
// coefficient snapshots per day, online detection, and evaluation.

#ifndef PANDA_PIPELINE_H_
#define PANDA_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "panda/baselines.h"
#include "panda/config.h"
#include "panda/detector.h"
#include "panda/eval.h"
#include "panda/preprocess.h"
#include "panda/scoring.h"
#include "panda/trace.h"

namespace panda {

struct RunConfig {
  PreprocessOptions preprocess;
  DetectorOptions detector;
  BaselineOptions baselines;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  uint64_t seed = 1;
  uint32_t threads = 0;  // 0 = hardware concurrency
  uint32_t slots_per_day = 288;
  uint32_t eval_from_day = 5;  // first evaluated day, 1-based

  // Keys read by from_kv, excluding "seed" which it shares with the
  // generator.
  static const std::set<std::string, std::less<>>& keys();
  static RunConfig from_kv(const KeyValueConfig& kv);
};

class MissingSnapshot : public Error {
 public:
  explicit MissingSnapshot(uint32_t day)
      : Error("no offline snapshot for day " + std::to_string(day)), day(day) {}
  uint32_t day;
};

// Cumulative job statistics and coefficient accumulators as of the end of
// `day`. Day 0 is the empty state.
struct OfflineDay {
  uint32_t day = 0;
  JobStatsTable stats;
  CoefficientSnapshot snapshot;
};

// Index of groups (sorted by machine, slot) split by machine.
struct MachineIndex {
  MachineId machine;
  std::span<const MachineSlotGroup> groups;
};
std::vector<MachineIndex> index_by_machine(std::span<const MachineSlotGroup> groups);

uint32_t last_day(std::span<const MachineSlotGroup> groups, uint32_t slots_per_day);

// Extends `prev` one day at a time up to and including `upto_day`. Each day
// first folds that day's CPI samples into the statistics, then adds the
// day's machine-slot contributions to the accumulators using the updated
// statistics. Returns every new day in order.
std::vector<OfflineDay> build_offline_days(std::span<const MachineSlotGroup> groups,
                                           uint32_t upto_day, const OfflineDay& prev,
                                           const RunConfig& config);

std::string stats_path(const std::string& dir, uint32_t day);
std::string snapshot_path(const std::string& dir, uint32_t day);
void save_offline_day(const std::string& dir, const OfflineDay& day);
// Day 0 loads as empty. Throws MissingSnapshot.
OfflineDay load_offline_day(const std::string& dir, uint32_t day);
// Highest day with both files in `dir`, or 0.
uint32_t latest_offline_day(const std::string& dir);

struct VictimSlot {
  MachineId machine;
  SlotTime slot;
  std::size_t victims = 0;
};

struct DetectOutput {
  std::vector<IdentificationResult> results;
  std::vector<VictimSlot> victim_slots;  // evaluated slots with victims
};

// Provides the offline state as of the end of a day.
using OfflineLookup = std::function<const OfflineDay&(uint32_t day)>;

// Runs the trigger over days [eval_from_day, last day] and identifies
// antagonists with every configured method. Day D uses the offline state of
// day D-1; the machine's percentile threshold comes from its mnCPI history
// over days before D. Output order is machine, slot, then method.
DetectOutput run_detect(std::span<const MachineSlotGroup> groups,
                        const OfflineLookup& offline, const RunConfig& config);

void write_results_file(const std::string& path,
                        std::span<const IdentificationResult> results);
std::vector<IdentificationResult> read_results_file(const std::string& path);
void write_victim_slots(const std::string& path, std::span<const VictimSlot> slots);
std::vector<VictimSlot> read_victim_slots(const std::string& path);

}  // namespace panda

#endif  // PANDA_PIPELINE_H_
