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

// Per-job CPI normalization and the machine-level mean normalized CPI.

#ifndef PANDA_PREPROCESS_H_
#define PANDA_PREPROCESS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "panda/trace.h"
#include "panda/types.h"

namespace panda {

struct JobCpiStats {
  JobId job;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  uint64_t n_samples = 0;
};

// Running count/mean/M2 of CPI samples. Partitions combine with merge() in
// any order, so per-day and per-machine folds can be reduced afterwards.
struct CpiMoments {
  uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const CpiMoments& other);
  double population_std() const;
};

struct PreprocessOptions {
  double epsilon = 1e-9;
  uint64_t min_cpi_samples = 5;
};

// Job statistics keyed by job. Only jobs with at least one sample appear.
class JobStatsTable {
 public:
  void add(const TraceRecord& r);
  void merge(const JobStatsTable& other);

  // Stats usable for normalization, i.e. the job has >= min_samples samples.
  const JobCpiStats* find(JobId job, uint64_t min_samples) const;
  const JobCpiStats* find(JobId job) const { return find(job, 1); }

  std::size_t size() const { return stats_.size(); }
  std::vector<JobCpiStats> sorted() const;

  void write_csv(std::ostream& out) const;
  static JobStatsTable read_csv(std::istream& in);

 private:
  struct Entry {
    CpiMoments moments;
    JobCpiStats stats;
  };
  void refresh(JobId job, Entry& e);

  std::unordered_map<JobId, Entry> stats_;
};

JobStatsTable compute_job_stats(std::span<const TraceRecord> records);

struct NormalizedSample {
  TaskRef task;
  MachineId machine;
  SlotTime slot;
  double ncpi = 0.0;
};

// (cpi - mean) / max(std, epsilon); absent when the record has no CPI.
std::optional<NormalizedSample> normalize(const TraceRecord& record,
                                          const JobCpiStats& stats,
                                          double epsilon);

struct ColocatedTask {
  TaskRef task;
  WorkloadClass cls;
  double cpu_usage = 0.0;
};

struct MachineSlotProfile {
  MachineId machine;
  SlotTime slot;
  std::optional<double> mncpi;
  uint64_t ls_sample_count = 0;
  std::vector<ColocatedTask> colocated;
};

// mnCPI over the LS tasks that carry a CPI sample and whose job has stats
// with at least options.min_cpi_samples samples. When `normalized` is given,
// the contributing samples are appended to it.
MachineSlotProfile aggregate_machine_slot(
    const MachineSlotGroup& group, const JobStatsTable& stats,
    const PreprocessOptions& options,
    std::vector<NormalizedSample>* normalized = nullptr);

}  // namespace panda

#endif  // PANDA_PREPROCESS_H_
