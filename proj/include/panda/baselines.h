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

// Local recent-history correlation baselines: CPI2-style full-window Pearson
// and Proctor-style chi-square-screened random subsamples.

#ifndef PANDA_BASELINES_H_
#define PANDA_BASELINES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "panda/detector.h"
#include "panda/trace.h"
#include "panda/types.h"

namespace panda {

class InsufficientData : public Error {
 public:
  InsufficientData() : Error("fewer than two paired points") {}
};

// Pearson product-moment correlation. Returns 0 when either side has zero
// variance; throws InsufficientData below two points.
double pearson(std::span<const double> x, std::span<const double> y);

// Same, keeping only positions where y is present.
double pearson_pairwise(std::span<const double> x,
                        std::span<const std::optional<double>> y);

struct BaselineOptions {
  uint32_t lookback_slots = 24;
  uint32_t subsample_slots = 12;
  uint32_t chi_categories = 3;
  double chi_threshold = 1.0;
  uint32_t max_resamples = 20;
};

struct CandidateSeries {
  TaskRef task;
  double usage_at_event = 0.0;
  std::vector<double> usage;  // one entry per window slot, 0 when absent
};

struct WindowSeries {
  MachineId machine;
  std::vector<SlotTime> slots;
  std::vector<std::optional<double>> victim_cpi;
  std::vector<CandidateSeries> candidates;
};

// Window of `lookback` slots ending at `end` on one machine. `machine_groups`
// holds that machine's groups in ascending slot order. Candidates are the
// batch tasks present at `end`.
WindowSeries build_window(std::span<const MachineSlotGroup> machine_groups,
                          SlotTime end, uint32_t lookback, TaskRef victim);

struct ChiSquareResult {
  double statistic = 0.0;
  bool ok = true;
  bool degenerate = false;  // all full-window values equal
};

// Bins `full` into `categories` equal-frequency bins (edges from `full`) and
// tests whether `sub` occupies them in proportion.
ChiSquareResult chi_square_representative(std::span<const double> full,
                                          std::span<const double> sub,
                                          uint32_t categories,
                                          double threshold);

IdentificationResult identify_cpi2(const TriggerEvent& event,
                                   const VictimFlag& victim,
                                   const WindowSeries& window);

struct SubsampleSpec {
  std::vector<uint32_t> indices;  // empty when Proctor fell back to the full window
};

IdentificationResult identify_proctor(const TriggerEvent& event,
                                      const VictimFlag& victim,
                                      const WindowSeries& window,
                                      uint64_t rng_seed,
                                      const BaselineOptions& options,
                                      SubsampleSpec* used = nullptr);

}  // namespace panda

#endif  // PANDA_BASELINES_H_
