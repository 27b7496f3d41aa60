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

// Online phase: victim flags, the mnCPI trigger, and coefficient-based
// antagonist ranking. Also owns the event JSONL schema shared with the
// correlation baselines.

#ifndef PANDA_DETECTOR_H_
#define PANDA_DETECTOR_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "panda/preprocess.h"
#include "panda/scoring.h"
#include "panda/types.h"

namespace panda {

enum class Method { kPanda, kPandaLocal, kCpi2, kProctor };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::kPanda, Method::kPandaLocal,
                                         Method::kCpi2, Method::kProctor};

struct VictimFlag {
  TaskRef task;
  SlotTime slot;
  double ncpi = 0.0;
};

struct TriggerEvent {
  MachineId machine;
  SlotTime slot;  // last slot of the qualifying run
  std::vector<VictimFlag> victims;
  double mncpi = 0.0;
};

struct ScoredCandidate {
  TaskRef task;
  double score = 0.0;
  double cpu_usage = 0.0;
};

struct IdentificationResult {
  TriggerEvent event;
  Method method = Method::kPanda;
  // Set for per-victim methods (CPI2, Proctor); PANDA results apply to every
  // victim of the event.
  std::optional<TaskRef> victim;
  std::vector<ScoredCandidate> scored;  // descending, tie-broken
  std::optional<TaskRef> accused;
};

struct DetectorOptions {
  double victim_threshold = 2.0;
  double percentile = 0.99;
  uint32_t run_length = 3;
  uint64_t min_obs = 10;
};

class EmptyHistory : public Error {
 public:
  EmptyHistory() : Error("no mnCPI history for percentile threshold") {}
};

// Flags LS tasks whose nCPI is at or above `threshold`.
std::vector<VictimFlag> detect_victims(
    const MachineSlotProfile& profile,
    std::span<const NormalizedSample> normalized, double threshold);

// Nearest-rank percentile (`q` in (0, 1]) of the history values.
double machine_p99(std::span<const double> history, double q = 0.99);

// Counts consecutive qualifying slots and fires on every run_length-th one.
// A non-qualifying slot, or a gap in slot numbers, resets the run; firing
// starts a fresh run so events never overlap.
class TriggerScanner {
 public:
  explicit TriggerScanner(uint32_t run_length = 3) : run_length_(run_length) {}

  bool push(SlotTime slot, bool qualifies);
  void reset() { run_ = 0; }

 private:
  uint32_t run_length_;
  uint32_t run_ = 0;
  std::optional<SlotTime> last_;
};

struct SlotObservation {
  const MachineSlotProfile* profile;
  std::vector<VictimFlag> victims;
};

bool qualifies(const MachineSlotProfile& profile,
               std::span<const VictimFlag> victims, double p99);

std::vector<TriggerEvent> evaluate_trigger(
    std::span<const SlotObservation> stream, double p99, uint32_t run_length);

// Sorts by score descending, then cpu_usage descending, then job and task
// ascending, and sets `accused` to the head.
void rank_candidates(IdentificationResult& result);

enum class CoefficientScope { kGlobal, kLocal };

// Scores every colocated batch task as usage x job coefficient. Jobs without
// a published coefficient (fewer than min_obs observations) score 0.
IdentificationResult identify_panda(const TriggerEvent& event,
                                    const MachineSlotProfile& profile,
                                    const CoefficientSnapshot& snapshot,
                                    CoefficientScope scope, uint64_t min_obs);

void write_result_jsonl(std::ostream& out, const IdentificationResult& result);
std::vector<IdentificationResult> read_results_jsonl(std::istream& in);

}  // namespace panda

#endif  // PANDA_DETECTOR_H_
