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

#include "panda/scoring.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "panda/trace.h"

namespace panda {

AntagonistAccumulator observe(AntagonistAccumulator acc, double usage,
                              double mncpi) {
  if (usage == 0.0) return acc;
  acc.sum_u_mncpi += usage * mncpi;
  acc.sum_u_sq += usage * usage;
  ++acc.n_obs;
  return acc;
}

AntagonistAccumulator merge(const AntagonistAccumulator& a,
                            const AntagonistAccumulator& b) {
  return {a.sum_u_mncpi + b.sum_u_mncpi, a.sum_u_sq + b.sum_u_sq,
          a.n_obs + b.n_obs};
}

std::optional<double> coefficient(const AntagonistAccumulator& acc,
                                  uint64_t min_obs) {
  if (acc.n_obs < min_obs || !(acc.sum_u_sq > 0.0)) return std::nullopt;
  return acc.sum_u_mncpi / acc.sum_u_sq;
}

void CoefficientSnapshot::accumulate(const MachineSlotProfile& profile) {
  if (!profile.mncpi) return;
  const double m = *profile.mncpi;
  for (const ColocatedTask& t : profile.colocated) {
    if (t.cpu_usage == 0.0) continue;
    AntagonistAccumulator& g = global[t.task.job];
    g = observe(g, t.cpu_usage, m);
    AntagonistAccumulator& l = local[{t.task.job, profile.machine}];
    l = observe(l, t.cpu_usage, m);
  }
}

void CoefficientSnapshot::merge_from(const CoefficientSnapshot& other) {
  for (const auto& [job, acc] : other.global) {
    global[job] = merge(global[job], acc);
  }
  for (const auto& [key, acc] : other.local) {
    local[key] = merge(local[key], acc);
  }
  as_of_day = std::max(as_of_day, other.as_of_day);
}

const AntagonistAccumulator* CoefficientSnapshot::find_global(JobId job) const {
  auto it = global.find(job);
  return it == global.end() ? nullptr : &it->second;
}

const AntagonistAccumulator* CoefficientSnapshot::find_local(
    JobId job, MachineId machine) const {
  auto it = local.find({job, machine});
  return it == local.end() ? nullptr : &it->second;
}

namespace {

constexpr std::string_view kSnapshotHeader =
    "scope,job_id,sum_u_mncpi,sum_u_sq,n_obs,as_of_day";

void write_row(std::ostream& out, const std::string& scope, JobId job,
               const AntagonistAccumulator& acc, uint32_t day) {
  std::string line = scope;
  line += ',';
  line += std::to_string(job.value);
  line += ',';
  append_double(line, acc.sum_u_mncpi);
  line += ',';
  append_double(line, acc.sum_u_sq);
  line += ',';
  line += std::to_string(acc.n_obs);
  line += ',';
  line += std::to_string(day);
  out << line << '\n';
}

}  // namespace

void CoefficientSnapshot::write_csv(std::ostream& out) const {
  out << kSnapshotHeader << '\n';
  std::vector<JobId> jobs;
  jobs.reserve(global.size());
  for (const auto& [job, acc] : global) jobs.push_back(job);
  std::sort(jobs.begin(), jobs.end());
  for (JobId job : jobs) write_row(out, "global", job, global.at(job), as_of_day);

  std::vector<JobMachineKey> keys;
  keys.reserve(local.size());
  for (const auto& [key, acc] : local) keys.push_back(key);
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    return std::tie(a.machine, a.job) < std::tie(b.machine, b.job);
  });
  for (const JobMachineKey& key : keys) {
    write_row(out, std::to_string(key.machine.value), key.job, local.at(key),
              as_of_day);
  }
}

CoefficientSnapshot CoefficientSnapshot::read_csv(std::istream& in) {
  CoefficientSnapshot snap;
  std::string line;
  if (!std::getline(in, line) || line != kSnapshotHeader) {
    throw ParseError(1, "bad snapshot header");
  }
  std::size_t lineno = 1;
  bool have_day = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string scope, job, sum_um, sum_uu, n, day;
    if (!std::getline(row, scope, ',') || !std::getline(row, job, ',') ||
        !std::getline(row, sum_um, ',') || !std::getline(row, sum_uu, ',') ||
        !std::getline(row, n, ',') || !std::getline(row, day)) {
      throw ParseError(lineno, "expected 6 columns");
    }
    AntagonistAccumulator acc;
    uint32_t row_day = 0;
    JobId id;
    try {
      id = JobId{std::stoull(job)};
      acc = {std::stod(sum_um), std::stod(sum_uu), std::stoull(n)};
      row_day = static_cast<uint32_t>(std::stoul(day));
    } catch (const std::logic_error&) {
      throw ParseError(lineno, "non-numeric field");
    }
    if (acc.sum_u_sq < 0) throw ParseError(lineno, "negative sum_u_sq");
    if (have_day && row_day != snap.as_of_day) {
      throw ParseError(lineno, "mixed as_of_day values");
    }
    snap.as_of_day = row_day;
    have_day = true;
    if (scope == "global") {
      snap.global[id] = acc;
    } else {
      try {
        snap.local[{id, MachineId{std::stoull(scope)}}] = acc;
      } catch (const std::logic_error&) {
        throw ParseError(lineno, "bad scope '" + scope + "'");
      }
    }
  }
  return snap;
}

CoefficientSnapshot build_snapshot(std::span<const MachineSlotProfile> profiles,
                                   uint32_t upto_day,
                                   const CoefficientSnapshot* prev) {
  if (prev != nullptr && upto_day <= prev->as_of_day) {
    throw OutOfOrderDay(upto_day, prev->as_of_day);
  }
  CoefficientSnapshot fresh;
  for (const MachineSlotProfile& p : profiles) fresh.accumulate(p);
  CoefficientSnapshot out = prev != nullptr ? *prev : CoefficientSnapshot{};
  out.merge_from(fresh);
  out.as_of_day = upto_day;
  return out;
}

}  // namespace panda
