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

#include "panda/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace panda {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientData();
  // A constant series has zero variance even when the floating mean leaves
  // tiny residuals behind.
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v[0]; });
  };
  if (constant(x) || constant(y)) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_pairwise(std::span<const double> x,
                        std::span<const std::optional<double>> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!y[i]) continue;
    xs.push_back(x[i]);
    ys.push_back(*y[i]);
  }
  return pearson(xs, ys);
}

WindowSeries build_window(std::span<const MachineSlotGroup> machine_groups,
                          SlotTime end, uint32_t lookback, TaskRef victim) {
  WindowSeries w;
  const uint32_t first = end.value + 1 >= lookback ? end.value + 1 - lookback : 0;
  const std::size_t len = end.value - first + 1;
  w.slots.reserve(len);
  for (uint32_t s = first; s <= end.value; ++s) w.slots.push_back(SlotTime{s});
  w.victim_cpi.assign(len, std::nullopt);

  auto by_slot = [](const MachineSlotGroup& g, SlotTime t) { return g.slot < t; };
  auto begin = std::lower_bound(machine_groups.begin(), machine_groups.end(),
                                SlotTime{first}, by_slot);
  std::vector<const MachineSlotGroup*> window(len, nullptr);
  for (auto it = begin; it != machine_groups.end() && it->slot <= end; ++it) {
    window[it->slot.value - first] = &*it;
    w.machine = it->machine;
  }
  const MachineSlotGroup* last = window.back();
  if (last == nullptr) return w;
  for (const TraceRecord& r : last->records) {
    if (r.cls.latency_sensitive()) continue;
    w.candidates.push_back({r.task, r.cpu_usage, std::vector<double>(len, 0.0)});
  }
  // Records within a group are sorted by task, as are the candidates.
  for (std::size_t i = 0; i < len; ++i) {
    if (window[i] == nullptr) continue;
    auto cand = w.candidates.begin();
    for (const TraceRecord& r : window[i]->records) {
      if (r.task == victim) w.victim_cpi[i] = r.cpi_sample;
      while (cand != w.candidates.end() && cand->task < r.task) ++cand;
      if (cand != w.candidates.end() && cand->task == r.task) {
        cand->usage[i] = r.cpu_usage;
      }
    }
  }
  return w;
}

ChiSquareResult chi_square_representative(std::span<const double> full,
                                          std::span<const double> sub,
                                          uint32_t categories,
                                          double threshold) {
  if (categories < 2) throw Error("chi-square needs at least two categories");
  if (full.empty()) throw Error("chi-square needs a nonempty full window");
  std::vector<double> sorted(full.begin(), full.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) return {0.0, true, true};

  const std::size_t n = sorted.size();
  std::vector<double> edges;  // lower edges of bins 1..categories-1
  for (uint32_t i = 1; i < categories; ++i) {
    edges.push_back(sorted[i * n / categories]);
  }
  auto bin_of = [&](double v) {
    return static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
  };
  std::vector<double> full_count(categories, 0.0), sub_count(categories, 0.0);
  for (double v : full) full_count[bin_of(v)] += 1.0;
  for (double v : sub) sub_count[bin_of(v)] += 1.0;

  double stat = 0.0;
  const auto m = static_cast<double>(sub.size());
  for (uint32_t b = 0; b < categories; ++b) {
    if (full_count[b] == 0.0) continue;
    double expected = m * full_count[b] / static_cast<double>(n);
    if (expected <= 0.0) continue;
    double d = sub_count[b] - expected;
    stat += d * d / expected;
  }
  return {stat, stat <= threshold, false};
}

namespace {

IdentificationResult score_window(const TriggerEvent& event,
                                  const VictimFlag& victim,
                                  const WindowSeries& window, Method method,
                                  std::span<const uint32_t> positions) {
  IdentificationResult result;
  result.event = event;
  result.method = method;
  result.victim = victim.task;

  std::vector<std::optional<double>> cpi;
  cpi.reserve(positions.size());
  for (uint32_t p : positions) cpi.push_back(window.victim_cpi[p]);
  std::vector<double> usage(positions.size());
  try {
    for (const CandidateSeries& c : window.candidates) {
      for (std::size_t i = 0; i < positions.size(); ++i) {
        usage[i] = c.usage[positions[i]];
      }
      result.scored.push_back(
          {c.task, pearson_pairwise(usage, cpi), c.usage_at_event});
    }
  } catch (const InsufficientData&) {
    result.scored.clear();
  }
  rank_candidates(result);
  return result;
}

std::vector<uint32_t> all_positions(const WindowSeries& w) {
  std::vector<uint32_t> p(w.slots.size());
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

}  // namespace

IdentificationResult identify_cpi2(const TriggerEvent& event,
                                   const VictimFlag& victim,
                                   const WindowSeries& window) {
  return score_window(event, victim, window, Method::kCpi2,
                      all_positions(window));
}

IdentificationResult identify_proctor(const TriggerEvent& event,
                                      const VictimFlag& victim,
                                      const WindowSeries& window,
                                      uint64_t rng_seed,
                                      const BaselineOptions& options,
                                      SubsampleSpec* used) {
  const std::vector<uint32_t> positions = all_positions(window);
  std::vector<double> full;
  for (const auto& v : window.victim_cpi) {
    if (v) full.push_back(*v);
  }
  std::mt19937_64 rng(rng_seed);
  const std::size_t size =
      std::min<std::size_t>(options.subsample_slots, positions.size());
  if (!full.empty() && size < positions.size()) {
    std::vector<uint32_t> pick;
    std::vector<double> sub;
    for (uint32_t attempt = 0; attempt < options.max_resamples; ++attempt) {
      pick.clear();
      std::sample(positions.begin(), positions.end(), std::back_inserter(pick),
                  size, rng);
      sub.clear();
      for (uint32_t p : pick) {
        if (window.victim_cpi[p]) sub.push_back(*window.victim_cpi[p]);
      }
      if (sub.size() < 2) continue;
      auto chi = chi_square_representative(full, sub, options.chi_categories,
                                           options.chi_threshold);
      if (!chi.ok) continue;
      if (used != nullptr) used->indices = pick;
      return score_window(event, victim, window, Method::kProctor, pick);
    }
  }
  if (used != nullptr) used->indices.clear();
  return score_window(event, victim, window, Method::kProctor, positions);
}

}  // namespace panda
