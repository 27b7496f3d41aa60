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

// Core trace vocabulary shared by every stage of the pipeline.

#ifndef PANDA_TYPES_H_
#define PANDA_TYPES_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace panda {

struct JobId {
  uint64_t value = 0;
  auto operator<=>(const JobId&) const = default;
};

struct MachineId {
  uint64_t value = 0;
  auto operator<=>(const MachineId&) const = default;
};

// Index of a fixed-width time window. Slot width lives in the config, not
// in the record, so grouping on (machine, slot) is exact.
struct SlotTime {
  uint32_t value = 0;
  auto operator<=>(const SlotTime&) const = default;
};

struct TaskRef {
  JobId job;
  uint32_t task_index = 0;
  auto operator<=>(const TaskRef&) const = default;
};

enum class WorkloadKind { kLatencySensitive, kBatch };

inline constexpr int kLsMinPriority = 120;
inline constexpr int kLsMinSchedulingClass = 2;

struct WorkloadClass {
  int32_t priority = 0;
  int32_t scheduling_class = 0;

  WorkloadKind kind() const {
    return priority >= kLsMinPriority &&
                   scheduling_class >= kLsMinSchedulingClass
               ? WorkloadKind::kLatencySensitive
               : WorkloadKind::kBatch;
  }
  bool latency_sensitive() const {
    return kind() == WorkloadKind::kLatencySensitive;
  }
  bool operator==(const WorkloadClass&) const = default;
};

inline WorkloadClass classify(int32_t priority, int32_t scheduling_class) {
  return WorkloadClass{priority, scheduling_class};
}

struct TraceRecord {
  MachineId machine;
  SlotTime slot;
  TaskRef task;
  WorkloadClass cls;
  double cpu_usage = 0.0;
  std::optional<double> cpi_sample;

  bool operator==(const TraceRecord&) const = default;
};

// Day index (1-based) for a slot, given how many slots make up a day.
inline uint32_t day_of(SlotTime slot, uint32_t slots_per_day) {
  return slot.value / slots_per_day + 1;
}

// Errors. Every failure the pipeline reports derives from Error so the CLI
// can map categories to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DuplicateTaskInSlot : public Error {
 public:
  DuplicateTaskInSlot(MachineId m, SlotTime t, TaskRef task)
      : Error("duplicate task " + std::to_string(task.job.value) + "/" +
              std::to_string(task.task_index) + " on machine " +
              std::to_string(m.value) + " slot " + std::to_string(t.value)) {}
};

}  // namespace panda

template <>
struct std::hash<panda::JobId> {
  std::size_t operator()(const panda::JobId& j) const noexcept {
    return std::hash<uint64_t>{}(j.value);
  }
};

template <>
struct std::hash<panda::MachineId> {
  std::size_t operator()(const panda::MachineId& m) const noexcept {
    return std::hash<uint64_t>{}(m.value);
  }
};

template <>
struct std::hash<panda::TaskRef> {
  std::size_t operator()(const panda::TaskRef& t) const noexcept {
    return std::hash<uint64_t>{}(t.job.value * 0x9E3779B97F4A7C15ull ^
                                 t.task_index);
  }
};

#endif  // PANDA_TYPES_H_
