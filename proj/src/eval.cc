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

#include "panda/eval.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "panda/parallel.h"

namespace panda {

std::optional<double> percentile_from_rank(uint32_t rank, uint32_t n) {
  if (n < 2 || rank < 1 || rank > n) return std::nullopt;
  return static_cast<double>(n - rank) / static_cast<double>(n - 1);
}

std::vector<PercentileRank> percentile_of(const IdentificationResult& result,
                                          const GroundTruth& truth) {
  std::vector<PercentileRank> out;
  const auto n = static_cast<uint32_t>(result.scored.size());
  for (uint32_t i = 0; i < n; ++i) {
    const TaskRef& task = result.scored[i].task;
    if (!truth.is_antagonist(task.job)) continue;
    PercentileRank pr;
    pr.machine = result.event.machine;
    pr.slot = result.event.slot;
    pr.method = result.method;
    pr.victim = result.victim;
    pr.antagonist = task;
    pr.rank = i + 1;
    pr.n = n;
    pr.percentile = percentile_from_rank(pr.rank, n);
    out.push_back(pr);
  }
  if (out.empty()) throw NoTruthPresent();
  return out;
}

std::vector<ConsistencyRecord> consistency_pairs(
    std::span<const IdentificationResult> results) {
  using Key = std::tuple<MachineId, SlotTime, Method>;
  std::map<Key, std::map<TaskRef, std::optional<JobId>>> accusations;
  for (const IdentificationResult& r : results) {
    auto& bucket = accusations[{r.event.machine, r.event.slot, r.method}];
    std::optional<JobId> job;
    if (r.accused) job = r.accused->job;
    if (r.victim) {
      bucket[*r.victim] = job;
    } else {
      for (const VictimFlag& v : r.event.victims) bucket[v.task] = job;
    }
  }
  std::vector<ConsistencyRecord> pairs;
  for (const auto& [key, victims] : accusations) {
    for (auto a = victims.begin(); a != victims.end(); ++a) {
      if (!a->second) continue;
      for (auto b = std::next(a); b != victims.end(); ++b) {
        if (!b->second) continue;
        pairs.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                         a->first, b->first, *a->second == *b->second});
      }
    }
  }
  return pairs;
}

std::map<Method, ConsistencySummary> consistency_rate(
    std::span<const IdentificationResult> results) {
  std::map<Method, ConsistencySummary> out;
  for (const ConsistencyRecord& p : consistency_pairs(results)) {
    ConsistencySummary& s = out[p.method];
    ++s.pairs;
    if (p.agree) ++s.agreeing;
  }
  if (out.empty()) throw NoMultiVictimEvents();
  return out;
}

double multi_victim_share(std::span<const std::size_t> victims_per_slot) {
  std::size_t bearing = 0, multi = 0;
  for (std::size_t v : victims_per_slot) {
    if (v == 0) continue;
    ++bearing;
    if (v >= 2) ++multi;
  }
  return bearing == 0 ? 0.0
                      : static_cast<double>(multi) / static_cast<double>(bearing);
}

namespace {

// Population std of |d| over the given differences.
double abs_std(std::span<const double> diffs) {
  if (diffs.empty()) return 0.0;
  double mean = 0.0;
  for (double d : diffs) mean += std::abs(d);
  mean /= static_cast<double>(diffs.size());
  double ss = 0.0;
  for (double d : diffs) ss += (std::abs(d) - mean) * (std::abs(d) - mean);
  return std::sqrt(ss / static_cast<double>(diffs.size()));
}

struct Sample {
  MachineId machine;
  SlotTime slot;
  double value;
};

// Pairs of samples on different machines and different slots: all of them
// when there are at most `want`, otherwise `want` random ones.
std::vector<double> random_pair_diffs(const std::vector<Sample>& samples,
                                      uint32_t want, std::mt19937_64& rng) {
  std::vector<double> diffs;
  const std::size_t n = samples.size();
  if (n < 2) return diffs;
  auto valid = [&](std::size_t i, std::size_t j) {
    return samples[i].machine != samples[j].machine &&
           samples[i].slot != samples[j].slot;
  };
  if (n * (n - 1) / 2 <= want) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (valid(i, j)) diffs.push_back(samples[i].value - samples[j].value);
      }
    }
    return diffs;
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const uint64_t max_attempts = 20ull * want;
  for (uint64_t a = 0; a < max_attempts && diffs.size() < want; ++a) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j || !valid(i, j)) continue;
    diffs.push_back(samples[i].value - samples[j].value);
  }
  return diffs;
}

void histogram(JobId job, std::span<const double> twin,
               std::span<const double> random, uint32_t bins,
               std::vector<HistogramRow>& out) {
  double hi = 0.0;
  for (double d : twin) hi = std::max(hi, std::abs(d));
  for (double d : random) hi = std::max(hi, std::abs(d));
  if (hi <= 0.0 || bins == 0) return;
  const double width = hi / bins;
  std::vector<double> ct(bins, 0.0), cr(bins, 0.0);
  auto bin = [&](double d) {
    return std::min<std::size_t>(static_cast<std::size_t>(std::abs(d) / width),
                                 bins - 1);
  };
  for (double d : twin) ct[bin(d)] += 1.0;
  for (double d : random) cr[bin(d)] += 1.0;
  for (uint32_t b = 0; b < bins; ++b) {
    out.push_back({job, b * width, (b + 1) * width,
                   twin.empty() ? 0.0 : ct[b] / (twin.size() * width),
                   random.empty() ? 0.0 : cr[b] / (random.size() * width)});
  }
}

}  // namespace

TwinNoiseReport twin_noise_analysis(std::span<const MachineSlotGroup> groups,
                                    const TwinNoiseOptions& options) {
  std::map<JobId, std::vector<Sample>> samples;
  std::map<JobId, std::vector<double>> twin_diffs;
  JobStatsTable stats;
  for (const MachineSlotGroup& g : groups) {
    for (std::size_t i = 0; i < g.records.size(); ++i) {
      const TraceRecord& r = g.records[i];
      if (!r.cpi_sample) continue;
      stats.add(r);
      samples[r.task.job].push_back({g.machine, g.slot, *r.cpi_sample});
      // Records are sorted by task, so same-job instances are adjacent.
      for (std::size_t j = i + 1;
           j < g.records.size() && g.records[j].task.job == r.task.job; ++j) {
        if (g.records[j].cpi_sample) {
          twin_diffs[r.task.job].push_back(*r.cpi_sample - *g.records[j].cpi_sample);
        }
      }
    }
  }

  TwinNoiseReport report;
  std::map<JobId, std::vector<double>> random_diffs;
  double ratio_sum = 0.0;
  for (const auto& [job, diffs] : twin_diffs) {
    report.twin_pairs[job] = diffs.size();
    if (diffs.size() < options.min_twin_pairs) continue;
    std::mt19937_64 rng(derive_seed(options.seed, job.value));
    auto rdiffs = random_pair_diffs(samples[job], options.random_pairs_per_job, rng);
    double denom = abs_std(rdiffs);
    if (rdiffs.size() < 2 || denom <= 0.0) continue;
    double ratio = abs_std(diffs) / denom;
    report.job_ratios[job] = ratio;
    ratio_sum += ratio;
    random_diffs[job] = std::move(rdiffs);
  }
  if (report.job_ratios.empty()) throw NoTwins();
  report.twin_ratio = ratio_sum / static_cast<double>(report.job_ratios.size());

  // Figure-style densities for the jobs with the most twin occurrences.
  std::vector<std::pair<uint64_t, JobId>> by_count;
  for (const auto& [job, ratio] : report.job_ratios) {
    by_count.push_back({report.twin_pairs[job], job});
  }
  std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t k = 0; k < by_count.size() && k < options.hist_jobs; ++k) {
    JobId job = by_count[k].second;
    histogram(job, twin_diffs[job], random_diffs[job], options.hist_bins,
              report.histograms);
  }

  // Colocated vs random pairs of distinct LS jobs, on nCPI so that jobs with
  // different baseline CPI pool together.
  std::mt19937_64 rng(derive_seed(options.seed, 0xC0C0));
  std::vector<double> coloc;
  std::vector<Sample> pool;
  std::vector<NormalizedSample> norm;
  for (const MachineSlotGroup& g : groups) {
    norm.clear();
    aggregate_machine_slot(g, stats, options.preprocess, &norm);
    for (const NormalizedSample& s : norm) pool.push_back({g.machine, g.slot, s.ncpi});
    if (norm.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> pick(0, norm.size() - 1);
    for (int attempt = 0; attempt < 8; ++attempt) {
      std::size_t i = pick(rng), j = pick(rng);
      if (norm[i].task.job == norm[j].task.job) continue;
      coloc.push_back(norm[i].ncpi - norm[j].ncpi);
      break;
    }
  }
  if (coloc.size() >= 2) {
    auto rdiffs = random_pair_diffs(pool, static_cast<uint32_t>(coloc.size()), rng);
    double denom = abs_std(rdiffs);
    if (denom > 0.0) report.colocated_ratio = abs_std(coloc) / denom;
  }
  return report;
}

EvalReport evaluate(std::span<const IdentificationResult> results,
                    const GroundTruth& truth) {
  EvalReport report;
  std::set<std::pair<MachineId, SlotTime>> events;
  std::map<Method, double> sums;
  for (const IdentificationResult& r : results) {
    events.insert({r.event.machine, r.event.slot});
    MethodSummary& m = report.methods[r.method];
    ++m.results;
    if (r.scored.empty()) {
      ++m.without_truth;
      continue;
    }
    std::vector<PercentileRank> ranks;
    try {
      ranks = percentile_of(r, truth);
    } catch (const NoTruthPresent&) {
      ++m.without_truth;
      continue;
    }
    for (const PercentileRank& pr : ranks) {
      if (!pr.percentile) {
        ++m.single_candidate;
        continue;
      }
      ++m.ranks;
      sums[r.method] += *pr.percentile;
      report.ranks.push_back(pr);
    }
  }
  report.events = events.size();
  for (auto& [method, m] : report.methods) {
    if (m.ranks > 0) m.mean_percentile = sums[method] / static_cast<double>(m.ranks);
  }
  report.pairs = consistency_pairs(results);
  for (const ConsistencyRecord& p : report.pairs) {
    auto& c = report.methods[p.method].consistency;
    if (!c) c = ConsistencySummary{};
    ++c->pairs;
    if (p.agree) ++c->agreeing;
  }
  return report;
}

namespace {

constexpr Method kTableOrder[] = {Method::kCpi2, Method::kProctor,
                                  Method::kPanda, Method::kPandaLocal};

std::string fixed3(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(3) << v;
  return ss.str();
}

}  // namespace

std::string format_summary(const EvalReport& report) {
  std::vector<Method> cols;
  for (Method m : kTableOrder) {
    if (report.methods.contains(m)) cols.push_back(m);
  }
  std::ostringstream out;
  const int w = 13;
  out << std::left << std::setw(26) << "metric";
  for (Method m : cols) out << std::right << std::setw(w) << method_name(m);
  out << '\n';
  auto row = [&](const std::string& label, auto&& cell) {
    out << std::left << std::setw(26) << label;
    for (Method m : cols) out << std::right << std::setw(w) << cell(report.methods.at(m));
    out << '\n';
  };
  row("mean percentile", [](const MethodSummary& s) {
    return s.mean_percentile ? fixed3(*s.mean_percentile) : std::string("-");
  });
  row("consistency rate", [](const MethodSummary& s) {
    return s.consistency && s.consistency->pairs > 0 ? fixed3(s.consistency->rate())
                                                     : std::string("-");
  });
  row("ranked antagonists", [](const MethodSummary& s) { return std::to_string(s.ranks); });
  row("results", [](const MethodSummary& s) { return std::to_string(s.results); });
  row("results without truth", [](const MethodSummary& s) {
    return std::to_string(s.without_truth);
  });
  row("single-candidate skips", [](const MethodSummary& s) {
    return std::to_string(s.single_candidate);
  });
  row("victim pairs", [](const MethodSummary& s) {
    return std::to_string(s.consistency ? s.consistency->pairs : 0);
  });
  out << "\ntrigger events: " << report.events << '\n';
  if (report.multi_victim_share) {
    out << "multi-victim share: " << fixed3(*report.multi_victim_share) << '\n';
  }
  if (report.noise) {
    out << "twin/random CPI-difference std ratio: " << fixed3(report.noise->twin_ratio)
        << " over " << report.noise->job_ratios.size() << " jobs\n";
    out << "colocated/random nCPI-difference std ratio: "
        << fixed3(report.noise->colocated_ratio) << '\n';
  }
  return out.str();
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

}  // namespace

void emit_report(const EvalReport& report, const std::string& dir) {
  if (report.methods.empty()) throw Error("report has no methods");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);

  open_out(base / "summary.txt") << format_summary(report);

  {
    auto out = open_out(base / "percentiles.csv");
    out << "method,machine,slot,victim_job,victim_task,antagonist_job,"
           "antagonist_task,rank,n,percentile\n";
    for (const PercentileRank& pr : report.ranks) {
      out << method_name(pr.method) << ',' << pr.machine.value << ','
          << pr.slot.value << ',';
      if (pr.victim) {
        out << pr.victim->job.value << ',' << pr.victim->task_index;
      } else {
        out << ',';
      }
      out << ',' << pr.antagonist.job.value << ',' << pr.antagonist.task_index
          << ',' << pr.rank << ',' << pr.n << ','
          << (pr.percentile ? format_double(*pr.percentile) : std::string()) << '\n';
    }
  }
  {
    auto out = open_out(base / "consistency.csv");
    out << "method,pairs,agreeing,rate\n";
    for (Method m : kTableOrder) {
      auto it = report.methods.find(m);
      if (it == report.methods.end() || !it->second.consistency) continue;
      const ConsistencySummary& c = *it->second.consistency;
      out << method_name(m) << ',' << c.pairs << ',' << c.agreeing << ','
          << format_double(c.rate()) << '\n';
    }
  }
  if (report.noise) {
    auto out = open_out(base / "twin_hist.csv");
    out << "job_id,bin_left,bin_right,density_twin,density_random\n";
    for (const HistogramRow& h : report.noise->histograms) {
      out << h.job.value << ',' << format_double(h.bin_left) << ','
          << format_double(h.bin_right) << ',' << format_double(h.density_twin)
          << ',' << format_double(h.density_random) << '\n';
    }
  }
}

}  // namespace panda
