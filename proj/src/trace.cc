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

#include "panda/trace.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "json.hpp"

namespace panda {
namespace {

constexpr std::array<std::string_view, 8> kColumns = {
    "machine_id", "slot",     "job_id",    "task_index",
    "priority",   "scheduling_class", "cpu_usage", "cpi_sample"};

template <typename T>
T parse_number(std::string_view field, std::size_t line,
               std::string_view column) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError(line, "bad " + std::string(column) + " '" +
                               std::string(field) + "'");
  }
  return value;
}

void validate(const TraceRecord& r, std::size_t line) {
  if (r.machine.value == 0) throw ParseError(line, "machine_id must be nonzero");
  if (r.task.job.value == 0) throw ParseError(line, "job_id must be nonzero");
  if (!std::isfinite(r.cpu_usage) || r.cpu_usage < 0.0) {
    throw ParseError(line, "cpu_usage must be a nonnegative real");
  }
  if (r.cpi_sample && (!std::isfinite(*r.cpi_sample) || *r.cpi_sample <= 0.0)) {
    throw ParseError(line, "cpi_sample must be positive when present");
  }
}

TraceRecord parse_csv_row(std::string_view row, std::size_t line) {
  std::array<std::string_view, 8> f;
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = row.find(',', start);
    if (n == f.size()) throw ParseError(line, "too many columns");
    f[n++] = row.substr(start, comma == std::string_view::npos
                                   ? std::string_view::npos
                                   : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n != f.size()) {
    throw ParseError(line, "expected 8 columns, found " + std::to_string(n));
  }
  TraceRecord r;
  r.machine.value = parse_number<uint64_t>(f[0], line, kColumns[0]);
  r.slot.value = parse_number<uint32_t>(f[1], line, kColumns[1]);
  r.task.job.value = parse_number<uint64_t>(f[2], line, kColumns[2]);
  r.task.task_index = parse_number<uint32_t>(f[3], line, kColumns[3]);
  r.cls.priority = parse_number<int32_t>(f[4], line, kColumns[4]);
  r.cls.scheduling_class = parse_number<int32_t>(f[5], line, kColumns[5]);
  r.cpu_usage = parse_number<double>(f[6], line, kColumns[6]);
  if (!f[7].empty()) r.cpi_sample = parse_number<double>(f[7], line, kColumns[7]);
  validate(r, line);
  return r;
}

template <typename T>
T json_field(const nlohmann::json& obj, std::string_view key,
             std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ParseError(line, "missing or non-numeric " + std::string(key));
  }
  if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) {
      throw ParseError(line, std::string(key) + " must be an integer");
    }
    if constexpr (std::is_unsigned_v<T>) {
      if (it->is_number_integer() && !it->is_number_unsigned()) {
        throw ParseError(line, std::string(key) + " must be unsigned");
      }
    }
  }
  return it->get<T>();
}

TraceRecord parse_json_row(std::string_view row, std::size_t line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(row);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line, "expected a JSON object");
  TraceRecord r;
  r.machine.value = json_field<uint64_t>(obj, "machine_id", line);
  r.slot.value = json_field<uint32_t>(obj, "slot", line);
  r.task.job.value = json_field<uint64_t>(obj, "job_id", line);
  r.task.task_index = json_field<uint32_t>(obj, "task_index", line);
  r.cls.priority = json_field<int32_t>(obj, "priority", line);
  r.cls.scheduling_class = json_field<int32_t>(obj, "scheduling_class", line);
  r.cpu_usage = json_field<double>(obj, "cpu_usage", line);
  auto cpi = obj.find("cpi_sample");
  if (cpi != obj.end() && !cpi->is_null()) {
    if (!cpi->is_number()) throw ParseError(line, "non-numeric cpi_sample");
    r.cpi_sample = cpi->get<double>();
  }
  validate(r, line);
  return r;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

TraceFormat parse_format(std::string_view name) {
  if (name == "csv") return TraceFormat::kCsv;
  if (name == "jsonl") return TraceFormat::kJsonl;
  throw Error("unknown trace format '" + std::string(name) + "'");
}

TraceFormat format_for_path(std::string_view path) {
  return path.ends_with(".jsonl") ? TraceFormat::kJsonl : TraceFormat::kCsv;
}

void for_each_record(std::istream& in, TraceFormat format,
                     const std::function<void(const TraceRecord&)>& sink) {
  std::string buf;
  std::size_t line = 0;
  if (format == TraceFormat::kCsv) {
    if (!std::getline(in, buf)) throw ParseError(1, "missing CSV header");
    ++line;
    if (strip_cr(buf) != kTraceCsvHeader) {
      throw ParseError(1, "unexpected CSV header '" + buf + "'");
    }
  }
  while (std::getline(in, buf)) {
    ++line;
    std::string_view row = strip_cr(buf);
    if (row.empty()) continue;
    sink(format == TraceFormat::kCsv ? parse_csv_row(row, line)
                                     : parse_json_row(row, line));
  }
}

std::vector<TraceRecord> parse_trace(std::istream& in, TraceFormat format) {
  std::vector<TraceRecord> out;
  for_each_record(in, format,
                  [&](const TraceRecord& r) { out.push_back(r); });
  return out;
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace " + path);
  return parse_trace(in, format_for_path(path));
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

void write_trace(std::ostream& out, std::span<const TraceRecord> records,
                 TraceFormat format) {
  std::string line;
  if (format == TraceFormat::kCsv) {
    out << kTraceCsvHeader << '\n';
    for (const TraceRecord& r : records) {
      line.clear();
      line += std::to_string(r.machine.value);
      line += ',';
      line += std::to_string(r.slot.value);
      line += ',';
      line += std::to_string(r.task.job.value);
      line += ',';
      line += std::to_string(r.task.task_index);
      line += ',';
      line += std::to_string(r.cls.priority);
      line += ',';
      line += std::to_string(r.cls.scheduling_class);
      line += ',';
      append_double(line, r.cpu_usage);
      line += ',';
      if (r.cpi_sample) append_double(line, *r.cpi_sample);
      line += '\n';
      out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }
    return;
  }
  for (const TraceRecord& r : records) {
    nlohmann::ordered_json obj;
    obj["machine_id"] = r.machine.value;
    obj["slot"] = r.slot.value;
    obj["job_id"] = r.task.job.value;
    obj["task_index"] = r.task.task_index;
    obj["priority"] = r.cls.priority;
    obj["scheduling_class"] = r.cls.scheduling_class;
    obj["cpu_usage"] = r.cpu_usage;
    obj["cpi_sample"] =
        r.cpi_sample ? nlohmann::ordered_json(*r.cpi_sample) : nullptr;
    out << obj.dump() << '\n';
  }
}

void write_trace_file(const std::string& path,
                      std::span<const TraceRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace " + path);
  write_trace(out, records, format_for_path(path));
  if (!out) throw IoError("write failed for " + path);
}

std::vector<MachineSlotGroup> sort_and_group(
    std::vector<TraceRecord>& records) {
  auto key = [](const TraceRecord& r) {
    return std::tie(r.machine, r.slot, r.task);
  };
  auto less = [&](const TraceRecord& a, const TraceRecord& b) {
    return key(a) < key(b);
  };
  if (!std::is_sorted(records.begin(), records.end(), less)) {
    std::stable_sort(records.begin(), records.end(), less);
  }
  std::vector<MachineSlotGroup> groups;
  std::span<const TraceRecord> all(records);
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= all.size(); ++i) {
    bool boundary = i == all.size() || all[i].machine != all[begin].machine ||
                    all[i].slot != all[begin].slot;
    if (i > begin && i < all.size() && !boundary &&
        all[i].task == all[i - 1].task) {
      throw DuplicateTaskInSlot(all[i].machine, all[i].slot, all[i].task);
    }
    if (boundary && i > begin) {
      groups.push_back({all[begin].machine, all[begin].slot,
                        all.subspan(begin, i - begin)});
      begin = i;
    }
  }
  return groups;
}

}  // namespace panda
