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

#include "panda/detector.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

namespace panda {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kPanda:
      return "PANDA";
    case Method::kPandaLocal:
      return "PANDA-Local";
    case Method::kCpi2:
      return "CPI2";
    case Method::kProctor:
      return "Proctor";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::vector<VictimFlag> detect_victims(
    const MachineSlotProfile& profile,
    std::span<const NormalizedSample> normalized, double threshold) {
  std::vector<VictimFlag> victims;
  for (const NormalizedSample& s : normalized) {
    if (s.ncpi < threshold) continue;
    auto it = std::find_if(profile.colocated.begin(), profile.colocated.end(),
                           [&](const ColocatedTask& c) { return c.task == s.task; });
    if (it == profile.colocated.end() || !it->cls.latency_sensitive()) continue;
    victims.push_back({s.task, s.slot, s.ncpi});
  }
  return victims;
}

double machine_p99(std::span<const double> history, double q) {
  std::vector<double> values;
  values.reserve(history.size());
  for (double v : history) {
    if (std::isfinite(v)) values.push_back(v);
  }
  if (values.empty()) throw EmptyHistory();
  // Nearest rank: the ceil(q * n)-th order statistic (1-based). The small
  // slack keeps q * n from rounding just above an integer.
  auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

bool TriggerScanner::push(SlotTime slot, bool qualifies) {
  if (last_ && slot.value != last_->value + 1) run_ = 0;
  last_ = slot;
  if (!qualifies) {
    run_ = 0;
    return false;
  }
  if (++run_ < run_length_) return false;
  run_ = 0;
  return true;
}

bool qualifies(const MachineSlotProfile& profile,
               std::span<const VictimFlag> victims, double p99) {
  return profile.mncpi.has_value() && *profile.mncpi > p99 && !victims.empty();
}

std::vector<TriggerEvent> evaluate_trigger(
    std::span<const SlotObservation> stream, double p99, uint32_t run_length) {
  std::vector<TriggerEvent> events;
  TriggerScanner scanner(run_length);
  for (const SlotObservation& obs : stream) {
    const MachineSlotProfile& p = *obs.profile;
    if (scanner.push(p.slot, qualifies(p, obs.victims, p99))) {
      events.push_back({p.machine, p.slot, obs.victims, *p.mncpi});
    }
  }
  return events;
}

void rank_candidates(IdentificationResult& result) {
  std::sort(result.scored.begin(), result.scored.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.cpu_usage != b.cpu_usage) return a.cpu_usage > b.cpu_usage;
              return a.task < b.task;
            });
  if (result.scored.empty()) {
    result.accused.reset();
  } else {
    result.accused = result.scored.front().task;
  }
}

IdentificationResult identify_panda(const TriggerEvent& event,
                                    const MachineSlotProfile& profile,
                                    const CoefficientSnapshot& snapshot,
                                    CoefficientScope scope, uint64_t min_obs) {
  IdentificationResult result;
  result.event = event;
  result.method = scope == CoefficientScope::kGlobal ? Method::kPanda
                                                     : Method::kPandaLocal;
  for (const ColocatedTask& c : profile.colocated) {
    if (c.cls.latency_sensitive()) continue;
    const AntagonistAccumulator* acc =
        scope == CoefficientScope::kGlobal
            ? snapshot.find_global(c.task.job)
            : snapshot.find_local(c.task.job, event.machine);
    double a = 0.0;
    if (acc != nullptr) a = coefficient(*acc, min_obs).value_or(0.0);
    result.scored.push_back({c.task, c.cpu_usage * a, c.cpu_usage});
  }
  rank_candidates(result);
  return result;
}

namespace {

nlohmann::ordered_json task_json(const TaskRef& t) {
  return {{"job", t.job.value}, {"task", t.task_index}};
}

TaskRef task_from_json(const nlohmann::json& j) {
  return {JobId{j.at("job").get<uint64_t>()}, j.at("task").get<uint32_t>()};
}

}  // namespace

void write_result_jsonl(std::ostream& out, const IdentificationResult& r) {
  nlohmann::ordered_json obj;
  obj["machine"] = r.event.machine.value;
  obj["slot"] = r.event.slot.value;
  obj["method"] = method_name(r.method);
  obj["mncpi"] = r.event.mncpi;
  obj["victim"] = r.victim ? task_json(*r.victim) : nlohmann::ordered_json();
  auto victims = nlohmann::ordered_json::array();
  for (const VictimFlag& v : r.event.victims) {
    auto vj = task_json(v.task);
    vj["ncpi"] = v.ncpi;
    victims.push_back(std::move(vj));
  }
  obj["victims"] = std::move(victims);
  auto scored = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.scored.size(); ++i) {
    const ScoredCandidate& c = r.scored[i];
    auto cj = task_json(c.task);
    cj["score"] = c.score;
    cj["rank"] = i + 1;
    cj["cpu_usage"] = c.cpu_usage;
    scored.push_back(std::move(cj));
  }
  obj["scored"] = std::move(scored);
  obj["accused"] = r.accused ? task_json(*r.accused) : nlohmann::ordered_json();
  out << obj.dump() << '\n';
}

std::vector<IdentificationResult> read_results_jsonl(std::istream& in) {
  std::vector<IdentificationResult> results;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto obj = nlohmann::json::parse(line);
      IdentificationResult r;
      r.event.machine = MachineId{obj.at("machine").get<uint64_t>()};
      r.event.slot = SlotTime{obj.at("slot").get<uint32_t>()};
      r.event.mncpi = obj.at("mncpi").get<double>();
      r.method = parse_method(obj.at("method").get<std::string>());
      if (!obj.at("victim").is_null()) r.victim = task_from_json(obj["victim"]);
      for (const auto& v : obj.at("victims")) {
        r.event.victims.push_back(
            {task_from_json(v), r.event.slot, v.at("ncpi").get<double>()});
      }
      for (const auto& c : obj.at("scored")) {
        r.scored.push_back({task_from_json(c), c.at("score").get<double>(),
                            c.at("cpu_usage").get<double>()});
      }
      if (!obj.at("accused").is_null()) r.accused = task_from_json(obj["accused"]);
      results.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("bad event line: ") + e.what());
    } catch (const ConfigError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return results;
}

}  // namespace panda
