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

// Synthetic cluster traces with planted antagonists.
//
// CPI model for a latency-sensitive task of job j on machine m at slot t:
//
//   cpi = base_j * (1 + offset_m + scale * sum_a beta_a * u_a(t)
//                     + load_j(t) + disturbance_m(t)) + noise
//
// where the sum runs over planted antagonist tasks colocated at (m, t),
// load_j is a job-wide AR(1) series shared by all of the job's tasks,
// disturbance_m models machine-wide slowdowns unrelated to any batch task,
// and noise is i.i.d. Normal(0, noise_sigma) in CPI units. The result is
// floored at cpi_floor. Batch tasks carry no CPI sample. This is one
// admissible instantiation of linear usage-driven interference; nothing
// downstream depends on its exact form.

#ifndef PANDA_SYNTH_H_
#define PANDA_SYNTH_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "panda/config.h"
#include "panda/types.h"

namespace panda {

enum class Placement {
  kChurn,   // positions are refilled with random tasks as lifetimes expire
  kStatic,  // every LS and benign batch job on every machine, one antagonist
            // per machine, fixed for the whole trace
};

struct UsageModel {
  double batch_mean_median = 0.4;  // lognormal median of per-job mean usage
  double batch_mean_spread = 0.5;  // lognormal sigma
  double ls_mean_median = 0.3;
  double ls_mean_spread = 0.4;
  double ar_coeff = 0.9;
  double ar_cv = 0.3;  // stationary coefficient of variation
  double diurnal_amplitude = 0.2;
  uint32_t diurnal_period_slots = 288;
  double burst_prob = 0.01;  // per-slot chance that a burst starts
  double burst_mean_slots = 8.0;
  double burst_multiplier = 2.5;
};

struct SynthConfig {
  uint32_t n_machines = 50;
  uint32_t n_jobs = 200;
  uint32_t n_days = 7;
  uint32_t slot_width_s = 300;
  double ls_fraction = 0.3;
  uint32_t colocation = 50;
  double ls_task_share = 0.28;
  Placement placement = Placement::kChurn;
  double ls_lifetime_slots = 576.0;
  double batch_lifetime_slots = 72.0;

  uint32_t n_antagonists = 6;
  double beta_min = 1.0;
  double beta_max = 3.0;
  // Explicit (job -> beta) overrides n_antagonists when nonempty.
  std::map<JobId, double> antagonist_jobs;

  double interference_scale = 0.1;
  double base_cpi_min = 1.0;
  double base_cpi_max = 2.0;
  double cpi_floor = 0.05;
  double noise_sigma = 0.1;
  double machine_offset_sigma = 0.0;
  double job_load_sigma = 0.0;
  double job_load_ar = 0.95;
  double disturbance_rate = 0.0;  // per-slot chance a disturbance starts
  double disturbance_mean_slots = 6.0;
  double disturbance_magnitude = 0.0;
  double cpi_sample_prob = 1.0;
  double twin_rate = 0.05;

  UsageModel usage;
  uint32_t round_decimals = 6;  // 0 keeps full precision
  uint64_t seed = 1;
  bool record_placements = false;

  uint32_t slots_per_day() const { return 86400 / slot_width_s; }
  uint32_t n_slots() const { return n_days * slots_per_day(); }
};

class InvalidConfig : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

void validate(const SynthConfig& config);

// Reads keys named like the SynthConfig fields (usage fields prefixed with
// "usage."). Unknown keys are rejected unless listed in `extra_keys`.
SynthConfig synth_config_from(const KeyValueConfig& kv,
                              const std::set<std::string, std::less<>>&
                                  extra_keys = {});

struct GroundTruth {
  std::map<JobId, double> antagonists;  // job -> beta
  std::map<JobId, double> base_cpi;     // LS jobs only
  // Filled only with SynthConfig::record_placements.
  std::map<std::pair<MachineId, SlotTime>, std::vector<TaskRef>> placements;

  bool is_antagonist(JobId job) const { return antagonists.contains(job); }

  void write_csv(std::ostream& out) const;
  static GroundTruth read_csv(std::istream& in);
};

struct SynthOutput {
  std::vector<TraceRecord> trace;  // canonical (machine, slot, job, task) order
  GroundTruth truth;
};

SynthOutput generate(const SynthConfig& config, uint32_t threads = 1);

enum class NoiseTarget {
  kTwin,       // twin vs random same-job |CPI difference| std ratio
  kColocated,  // colocated vs random LS-pair |nCPI difference| std ratio
};

class Unreachable : public Error {
 public:
  explicit Unreachable(double target)
      : Error("noise calibration cannot reach ratio " + std::to_string(target)) {}
};

// Bisects noise_sigma on reduced-size traces until the measured ratio is
// within `tolerance` of `target`.
SynthConfig calibrate_noise(const SynthConfig& config, double target,
                            NoiseTarget mode = NoiseTarget::kTwin,
                            double tolerance = 0.005, uint32_t threads = 1);

}  // namespace panda

#endif  // PANDA_SYNTH_H_
