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

// Trace file formats (CSV and JSONL) and (machine, slot) grouping.

#ifndef PANDA_TRACE_H_
#define PANDA_TRACE_H_

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panda/types.h"

namespace panda {

enum class TraceFormat { kCsv, kJsonl };

// Accepts "csv" or "jsonl"; throws Error for anything else.
TraceFormat parse_format(std::string_view name);
// Picks the format from a file extension (.jsonl -> JSONL, else CSV).
TraceFormat format_for_path(std::string_view path);

inline constexpr std::string_view kTraceCsvHeader =
    "machine_id,slot,job_id,task_index,priority,scheduling_class,cpu_usage,"
    "cpi_sample";

// Calls `sink` once per record in file order. Malformed rows throw
// ParseError carrying the 1-based line number.
void for_each_record(std::istream& in, TraceFormat format,
                     const std::function<void(const TraceRecord&)>& sink);

std::vector<TraceRecord> parse_trace(std::istream& in, TraceFormat format);
std::vector<TraceRecord> read_trace_file(const std::string& path);

void write_trace(std::ostream& out, std::span<const TraceRecord> records,
                 TraceFormat format);
void write_trace_file(const std::string& path,
                      std::span<const TraceRecord> records);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
void append_double(std::string& out, double v);

// All records of one (machine, slot), sorted by task.
struct MachineSlotGroup {
  MachineId machine;
  SlotTime slot;
  std::span<const TraceRecord> records;
};

// Sorts `records` in place into canonical (machine, slot, job, task) order
// and returns one group per (machine, slot), keys ascending. The groups view
// into `records`, which must outlive them. Throws DuplicateTaskInSlot.
std::vector<MachineSlotGroup> sort_and_group(std::vector<TraceRecord>& records);

}  // namespace panda

#endif  // PANDA_TRACE_H_
