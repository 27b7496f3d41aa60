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

// Evaluation metrics: percentile rank of planted antagonists, multi-victim
// consistency, twin-task noise statistics, and report files.

#ifndef PANDA_EVAL_H_
#define PANDA_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panda/detector.h"
#include "panda/preprocess.h"
#include "panda/synth.h"
#include "panda/trace.h"

namespace panda {

class NoTruthPresent : public Error {
 public:
  NoTruthPresent() : Error("no planted antagonist among the candidates") {}
};

class NoMultiVictimEvents : public Error {
 public:
  NoMultiVictimEvents() : Error("no events with two or more victims") {}
};

class NoTwins : public Error {
 public:
  NoTwins() : Error("trace has no usable twin-task occurrences") {}
};

// (n - r) / (n - 1); absent when n < 2.
std::optional<double> percentile_from_rank(uint32_t rank, uint32_t n);

struct PercentileRank {
  MachineId machine;
  SlotTime slot;
  Method method = Method::kPanda;
  std::optional<TaskRef> victim;
  TaskRef antagonist;
  uint32_t rank = 0;  // 1-based
  uint32_t n = 0;
  std::optional<double> percentile;
};

// One entry per planted-antagonist task among the result's candidates.
// Throws NoTruthPresent when there is none.
std::vector<PercentileRank> percentile_of(const IdentificationResult& result,
                                          const GroundTruth& truth);

struct ConsistencyRecord {
  MachineId machine;
  SlotTime slot;
  Method method = Method::kPanda;
  TaskRef first;
  TaskRef second;
  bool agree = false;
};

struct ConsistencySummary {
  uint64_t pairs = 0;
  uint64_t agreeing = 0;
  double rate() const {
    return pairs == 0 ? 0.0
                      : static_cast<double>(agreeing) / static_cast<double>(pairs);
  }
};

// Every unordered pair of victims on the same (machine, slot, method) whose
// accusations both exist; agreement is at job granularity. Results without a
// `victim` apply their accusation to every victim of the event.
std::vector<ConsistencyRecord> consistency_pairs(
    std::span<const IdentificationResult> results);

// Per-method agreement rates. Throws NoMultiVictimEvents when no method has
// a single victim pair.
std::map<Method, ConsistencySummary> consistency_rate(
    std::span<const IdentificationResult> results);

// Fraction of victim-bearing (machine, slot) records with two or more
// victims. Entries of zero are ignored.
double multi_victim_share(std::span<const std::size_t> victims_per_slot);

struct TwinNoiseOptions {
  uint64_t seed = 7;
  uint32_t random_pairs_per_job = 1000;
  uint32_t min_twin_pairs = 10;
  uint32_t hist_bins = 30;
  uint32_t hist_jobs = 4;
  PreprocessOptions preprocess;
};

struct HistogramRow {
  JobId job;
  double bin_left = 0.0;
  double bin_right = 0.0;
  double density_twin = 0.0;
  double density_random = 0.0;
};

struct TwinNoiseReport {
  double twin_ratio = 0.0;       // mean over jobs of twin/random std ratio
  double colocated_ratio = 0.0;  // pooled colocated/random nCPI std ratio
  std::map<JobId, double> job_ratios;
  std::map<JobId, uint64_t> twin_pairs;
  std::vector<HistogramRow> histograms;
};

// `groups` is the output of sort_and_group over the trace.
TwinNoiseReport twin_noise_analysis(std::span<const MachineSlotGroup> groups,
                                    const TwinNoiseOptions& options = {});

struct MethodSummary {
  uint64_t results = 0;          // identification results seen
  uint64_t without_truth = 0;    // results with no planted antagonist
  uint64_t single_candidate = 0; // ranks excluded because n == 1
  uint64_t ranks = 0;            // ranks averaged
  std::optional<double> mean_percentile;
  std::optional<ConsistencySummary> consistency;
};

struct EvalReport {
  std::map<Method, MethodSummary> methods;
  std::vector<PercentileRank> ranks;
  std::vector<ConsistencyRecord> pairs;
  uint64_t events = 0;  // distinct (machine, slot) trigger events
  std::optional<double> multi_victim_share;
  std::optional<TwinNoiseReport> noise;
};

EvalReport evaluate(std::span<const IdentificationResult> results,
                    const GroundTruth& truth);

// Aligned text table in the layout CPI2 | Proctor | PANDA | PANDA-Local.
std::string format_summary(const EvalReport& report);

// Writes summary.txt, percentiles.csv, consistency.csv and, when noise
// statistics are present, twin_hist.csv into `dir`. Throws IoError.
void emit_report(const EvalReport& report, const std::string& dir);

}  // namespace panda

#endif  // PANDA_EVAL_H_
