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

// Antagonist coefficients: per-job least-squares slope through the origin of
// machine mnCPI against the job's CPU usage, kept as mergeable running sums.

#ifndef PANDA_SCORING_H_
#define PANDA_SCORING_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "panda/preprocess.h"
#include "panda/types.h"

namespace panda {

struct AntagonistAccumulator {
  double sum_u_mncpi = 0.0;
  double sum_u_sq = 0.0;
  uint64_t n_obs = 0;

  bool operator==(const AntagonistAccumulator&) const = default;
};

// Zero-usage observations add nothing to either sum and are skipped without
// counting toward n_obs.
AntagonistAccumulator observe(AntagonistAccumulator acc, double usage,
                              double mncpi);
AntagonistAccumulator merge(const AntagonistAccumulator& a,
                            const AntagonistAccumulator& b);
std::optional<double> coefficient(const AntagonistAccumulator& acc,
                                  uint64_t min_obs);

struct JobMachineKey {
  JobId job;
  MachineId machine;
  auto operator<=>(const JobMachineKey&) const = default;
};

struct JobMachineKeyHash {
  std::size_t operator()(const JobMachineKey& k) const noexcept {
    return std::hash<uint64_t>{}(k.job.value * 0x9E3779B97F4A7C15ull ^
                                 (k.machine.value << 1));
  }
};

class OutOfOrderDay : public Error {
 public:
  OutOfOrderDay(uint32_t upto, uint32_t prev)
      : Error("snapshot day " + std::to_string(upto) +
              " is not after previous snapshot day " + std::to_string(prev)) {}
};

struct CoefficientSnapshot {
  uint32_t as_of_day = 0;
  std::unordered_map<JobId, AntagonistAccumulator> global;
  std::unordered_map<JobMachineKey, AntagonistAccumulator, JobMachineKeyHash>
      local;

  // Feeds one machine-slot into both the per-job and per-(job, machine)
  // accumulators. Profiles without an mnCPI contribute nothing.
  void accumulate(const MachineSlotProfile& profile);
  void merge_from(const CoefficientSnapshot& other);

  const AntagonistAccumulator* find_global(JobId job) const;
  const AntagonistAccumulator* find_local(JobId job, MachineId machine) const;

  // Rows: global rows sorted by job, then local rows sorted by (machine, job).
  void write_csv(std::ostream& out) const;
  static CoefficientSnapshot read_csv(std::istream& in);
};

// prev merged with the accumulators of `profiles`. Throws OutOfOrderDay when
// upto_day does not advance past prev->as_of_day.
CoefficientSnapshot build_snapshot(std::span<const MachineSlotProfile> profiles,
                                   uint32_t upto_day,
                                   const CoefficientSnapshot* prev);

}  // namespace panda

#endif  // PANDA_SCORING_H_
