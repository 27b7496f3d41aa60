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

#include "panda/preprocess.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace panda {

void CpiMoments::add(double x) {
  ++count;
  double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void CpiMoments::merge(const CpiMoments& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  double na = static_cast<double>(count);
  double nb = static_cast<double>(other.count);
  double n = na + nb;
  double delta = other.mean - mean;
  mean += delta * nb / n;
  m2 += other.m2 + delta * delta * na * nb / n;
  count += other.count;
}

double CpiMoments::population_std() const {
  if (count == 0) return 0.0;
  return std::sqrt(std::max(0.0, m2 / static_cast<double>(count)));
}

void JobStatsTable::refresh(JobId job, Entry& e) {
  e.stats = {job, e.moments.mean, e.moments.population_std(), e.moments.count};
}

void JobStatsTable::add(const TraceRecord& r) {
  if (!r.cpi_sample) return;
  Entry& e = stats_[r.task.job];
  e.moments.add(*r.cpi_sample);
  refresh(r.task.job, e);
}

void JobStatsTable::merge(const JobStatsTable& other) {
  for (const auto& [job, theirs] : other.stats_) {
    Entry& e = stats_[job];
    e.moments.merge(theirs.moments);
    refresh(job, e);
  }
}

const JobCpiStats* JobStatsTable::find(JobId job, uint64_t min_samples) const {
  auto it = stats_.find(job);
  if (it == stats_.end() || it->second.stats.n_samples < min_samples) {
    return nullptr;
  }
  return &it->second.stats;
}

std::vector<JobCpiStats> JobStatsTable::sorted() const {
  std::vector<JobCpiStats> out;
  out.reserve(stats_.size());
  for (const auto& [job, e] : stats_) out.push_back(e.stats);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.job < b.job; });
  return out;
}

void JobStatsTable::write_csv(std::ostream& out) const {
  out << "job_id,mean,std,n_samples\n";
  std::string line;
  for (const JobCpiStats& s : sorted()) {
    line = std::to_string(s.job.value);
    line += ',';
    append_double(line, s.mean);
    line += ',';
    append_double(line, s.std);
    line += ',';
    line += std::to_string(s.n_samples);
    out << line << '\n';
  }
}

JobStatsTable JobStatsTable::read_csv(std::istream& in) {
  JobStatsTable table;
  std::string line;
  if (!std::getline(in, line) || line != "job_id,mean,std,n_samples") {
    throw ParseError(1, "bad job stats header");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string job, mean, sd, n;
    if (!std::getline(row, job, ',') || !std::getline(row, mean, ',') ||
        !std::getline(row, sd, ',') || !std::getline(row, n)) {
      throw ParseError(lineno, "expected 4 columns");
    }
    try {
      JobId id{std::stoull(job)};
      Entry e;
      e.moments.count = std::stoull(n);
      e.moments.mean = std::stod(mean);
      double s = std::stod(sd);
      e.moments.m2 = s * s * static_cast<double>(e.moments.count);
      if (e.moments.count == 0 || s < 0) {
        throw ParseError(lineno, "invalid stats row");
      }
      // Keep the stored std verbatim so normalization is unaffected by the
      // M2 reconstruction.
      e.stats = {id, e.moments.mean, s, e.moments.count};
      table.stats_[id] = e;
    } catch (const std::logic_error&) {
      throw ParseError(lineno, "non-numeric field");
    }
  }
  return table;
}

JobStatsTable compute_job_stats(std::span<const TraceRecord> records) {
  JobStatsTable table;
  for (const TraceRecord& r : records) table.add(r);
  return table;
}

std::optional<NormalizedSample> normalize(const TraceRecord& record,
                                          const JobCpiStats& stats,
                                          double epsilon) {
  if (!record.cpi_sample) return std::nullopt;
  double divisor = std::max(stats.std, epsilon);
  return NormalizedSample{record.task, record.machine, record.slot,
                          (*record.cpi_sample - stats.mean) / divisor};
}

MachineSlotProfile aggregate_machine_slot(
    const MachineSlotGroup& group, const JobStatsTable& stats,
    const PreprocessOptions& options,
    std::vector<NormalizedSample>* normalized) {
  MachineSlotProfile profile;
  profile.machine = group.machine;
  profile.slot = group.slot;
  profile.colocated.reserve(group.records.size());
  double sum = 0.0;
  for (const TraceRecord& r : group.records) {
    profile.colocated.push_back({r.task, r.cls, r.cpu_usage});
    if (!r.cls.latency_sensitive() || !r.cpi_sample) continue;
    const JobCpiStats* s = stats.find(r.task.job, options.min_cpi_samples);
    if (s == nullptr) continue;
    auto n = normalize(r, *s, options.epsilon);
    sum += n->ncpi;
    ++profile.ls_sample_count;
    if (normalized != nullptr) normalized->push_back(*n);
  }
  if (profile.ls_sample_count > 0) {
    profile.mncpi = sum / static_cast<double>(profile.ls_sample_count);
  }
  return profile;
}

}  // namespace panda
