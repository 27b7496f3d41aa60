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

#include "panda/synth.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "panda/eval.h"
#include "panda/parallel.h"
#include "panda/trace.h"

namespace panda {
namespace {

// Stream tags for derive_seed.
constexpr uint64_t kJobStream = 0x4a4f4253;
constexpr uint64_t kLoadStream = 0x4c4f4144;
constexpr uint64_t kMachineStream = 0x4d414348;

struct JobSpec {
  JobId id;
  WorkloadClass cls;
  bool ls = false;
  double mean_usage = 0.0;
  double phase = 0.0;
  double base_cpi = 0.0;
  double beta = 0.0;  // > 0 for planted antagonists
  std::vector<double> load;
};

double round_to(double v, uint32_t decimals) {
  if (decimals == 0) return v;
  double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

uint32_t geometric_length(std::mt19937_64& rng, double mean) {
  if (mean <= 1.0) return 1;
  std::geometric_distribution<uint32_t> g(1.0 / mean);
  return g(rng) + 1;
}

std::vector<JobSpec> make_jobs(const SynthConfig& c) {
  std::mt19937_64 rng(derive_seed(c.seed, kJobStream));
  const uint32_t n = c.n_jobs;
  std::vector<JobSpec> jobs(n);
  for (uint32_t i = 0; i < n; ++i) jobs[i].id = JobId{i + 1};

  // Explicit antagonists are forced to be batch; LS jobs come from the rest.
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_partition(order.begin(), order.end(), [&](uint32_t i) {
    return !c.antagonist_jobs.contains(jobs[i].id);
  });
  auto n_ls = static_cast<uint32_t>(std::lround(c.ls_fraction * n));
  n_ls = std::clamp<uint32_t>(n_ls, 1, n - 1);
  for (uint32_t k = 0; k < n_ls; ++k) jobs[order[k]].ls = true;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int ls_prio[] = {120, 200, 360};
  for (JobSpec& j : jobs) {
    if (j.ls) {
      j.cls = {ls_prio[rng() % 3], static_cast<int32_t>(2 + rng() % 2)};
      j.mean_usage = c.usage.ls_mean_median *
                     std::exp(c.usage.ls_mean_spread * normal(rng));
      j.base_cpi = c.base_cpi_min + (c.base_cpi_max - c.base_cpi_min) * unit(rng);
    } else {
      // Mostly low priority; some high-priority jobs are batch by class.
      if (unit(rng) < 0.7) {
        j.cls = {static_cast<int32_t>(rng() % 120), static_cast<int32_t>(rng() % 4)};
      } else {
        j.cls = {ls_prio[1 + rng() % 2], static_cast<int32_t>(rng() % 2)};
      }
      j.mean_usage = c.usage.batch_mean_median *
                     std::exp(c.usage.batch_mean_spread * normal(rng));
    }
    j.phase = 2.0 * std::numbers::pi * unit(rng);
  }

  if (!c.antagonist_jobs.empty()) {
    for (const auto& [id, beta] : c.antagonist_jobs) jobs[id.value - 1].beta = beta;
  } else {
    std::vector<uint32_t> batch;
    for (uint32_t i = 0; i < n; ++i) {
      if (!jobs[i].ls) batch.push_back(i);
    }
    std::shuffle(batch.begin(), batch.end(), rng);
    for (uint32_t k = 0; k < c.n_antagonists; ++k) {
      jobs[batch[k]].beta = c.beta_min + (c.beta_max - c.beta_min) * unit(rng);
    }
  }

  const uint32_t slots = c.n_slots();
  for (JobSpec& j : jobs) {
    if (!j.ls) continue;
    j.load.assign(slots, 0.0);
    if (c.job_load_sigma <= 0.0) continue;
    std::mt19937_64 lr(derive_seed(c.seed, kLoadStream, j.id.value));
    std::normal_distribution<double> z(0.0, 1.0);
    const double rho = c.job_load_ar;
    const double step = c.job_load_sigma * std::sqrt(1.0 - rho * rho);
    double x = c.job_load_sigma * z(lr);
    for (uint32_t t = 0; t < slots; ++t) {
      j.load[t] = x;
      x = rho * x + step * z(lr);
    }
  }
  return jobs;
}

struct LiveTask {
  const JobSpec* job = nullptr;
  uint32_t index = 0;
  bool twin = false;
  uint32_t twin_index = 0;
  uint64_t remaining = 0;  // slots left; UINT64_MAX for static placement
  double ar = 1.0;
  uint32_t burst_left = 0;
};

class MachineGenerator {
 public:
  MachineGenerator(const SynthConfig& c, const std::vector<JobSpec>& jobs,
                   uint32_t machine)
      : c_(c),
        jobs_(jobs),
        machine_(machine),
        rng_(derive_seed(c.seed, kMachineStream, machine)) {
    for (const JobSpec& j : jobs_) {
      (j.ls ? ls_jobs_ : batch_jobs_).push_back(&j);
      if (j.beta > 0.0) antagonists_.push_back(&j);
      else if (!j.ls) benign_.push_back(&j);
    }
  }

  void run(std::vector<TraceRecord>& out, GroundTruth* placements);

 private:
  uint32_t next_index() { return counter_++ * c_.n_machines + (machine_ - 1); }

  void init_usage(LiveTask& t) {
    t.ar = 1.0 + c_.usage.ar_cv * normal_(rng_);
    t.burst_left = 0;
  }

  LiveTask spawn(const std::vector<const JobSpec*>& pool, double lifetime) {
    LiveTask t;
    t.job = pool[rng_() % pool.size()];
    t.index = next_index();
    t.twin = unit_(rng_) < c_.twin_rate;
    t.twin_index = t.twin ? next_index() : 0;
    t.remaining = geometric_length(rng_, lifetime);
    init_usage(t);
    return t;
  }

  LiveTask pinned(const JobSpec* job) {
    LiveTask t;
    t.job = job;
    t.index = next_index();
    t.twin = unit_(rng_) < c_.twin_rate;
    t.twin_index = t.twin ? next_index() : 0;
    t.remaining = UINT64_MAX;
    init_usage(t);
    return t;
  }

  double step_usage(LiveTask& t, uint32_t slot) {
    const UsageModel& u = c_.usage;
    t.ar = 1.0 + u.ar_coeff * (t.ar - 1.0) +
           u.ar_cv * std::sqrt(1.0 - u.ar_coeff * u.ar_coeff) * normal_(rng_);
    bool start_burst = unit_(rng_) < u.burst_prob;
    if (t.burst_left > 0) {
      --t.burst_left;
    } else if (start_burst) {
      t.burst_left = geometric_length(rng_, u.burst_mean_slots);
    }
    double diurnal =
        1.0 + u.diurnal_amplitude *
                  std::sin(2.0 * std::numbers::pi * slot / u.diurnal_period_slots +
                           t.job->phase);
    double v = t.job->mean_usage * std::max(0.0, t.ar) * std::max(0.0, diurnal);
    if (t.burst_left > 0) v *= u.burst_multiplier;
    return round_to(v, c_.round_decimals);
  }

  const SynthConfig& c_;
  const std::vector<JobSpec>& jobs_;
  uint32_t machine_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<const JobSpec*> ls_jobs_, batch_jobs_, antagonists_, benign_;
  uint32_t counter_ = 0;
};

void MachineGenerator::run(std::vector<TraceRecord>& out,
                           GroundTruth* placements) {
  const MachineId mid{machine_};
  const double offset = c_.machine_offset_sigma * normal_(rng_);

  std::vector<LiveTask> ls, batch;
  if (c_.placement == Placement::kStatic) {
    for (const JobSpec* j : ls_jobs_) ls.push_back(pinned(j));
    for (const JobSpec* j : benign_) batch.push_back(pinned(j));
    if (!antagonists_.empty()) {
      batch.push_back(pinned(antagonists_[(machine_ - 1) % antagonists_.size()]));
    }
  } else {
    auto n_ls = static_cast<uint32_t>(std::lround(c_.colocation * c_.ls_task_share));
    n_ls = std::clamp<uint32_t>(n_ls, 1, c_.colocation - 1);
    for (uint32_t i = 0; i < n_ls; ++i) {
      ls.push_back(spawn(ls_jobs_, c_.ls_lifetime_slots));
    }
    for (uint32_t i = n_ls; i < c_.colocation; ++i) {
      batch.push_back(spawn(batch_jobs_, c_.batch_lifetime_slots));
    }
  }

  uint32_t disturbance_left = 0;
  double disturbance = 0.0;
  std::vector<TraceRecord> slot_records;
  std::vector<double> batch_usage(batch.size()), ls_usage(ls.size());

  for (uint32_t t = 0; t < c_.n_slots(); ++t) {
    const SlotTime slot{t};
    for (LiveTask& task : ls) {
      if (task.remaining == 0) task = spawn(ls_jobs_, c_.ls_lifetime_slots);
    }
    for (LiveTask& task : batch) {
      if (task.remaining == 0) task = spawn(batch_jobs_, c_.batch_lifetime_slots);
    }

    double interference = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      batch_usage[i] = step_usage(batch[i], t);
      const double beta = batch[i].job->beta;
      if (beta > 0.0) {
        interference += beta * batch_usage[i] * (batch[i].twin ? 2.0 : 1.0);
      }
    }
    for (std::size_t i = 0; i < ls.size(); ++i) ls_usage[i] = step_usage(ls[i], t);

    bool start_disturbance = unit_(rng_) < c_.disturbance_rate;
    double magnitude = c_.disturbance_magnitude * (0.5 + unit_(rng_));
    if (disturbance_left > 0) {
      --disturbance_left;
    } else if (start_disturbance) {
      disturbance_left = geometric_length(rng_, c_.disturbance_mean_slots);
      disturbance = magnitude;
    }
    const double dist = disturbance_left > 0 ? disturbance : 0.0;

    slot_records.clear();
    auto emit = [&](const LiveTask& task, uint32_t index, double usage,
                    std::optional<double> cpi) {
      TraceRecord r;
      r.machine = mid;
      r.slot = slot;
      r.task = {task.job->id, index};
      r.cls = task.job->cls;
      r.cpu_usage = usage;
      r.cpi_sample = cpi;
      slot_records.push_back(r);
    };
    auto sample_cpi = [&](const LiveTask& task) -> std::optional<double> {
      // Draws happen unconditionally so that changing noise_sigma or the
      // sampling rate does not shift the rest of the random stream.
      const double z = normal_(rng_);
      const bool sampled = unit_(rng_) < c_.cpi_sample_prob;
      const JobSpec& j = *task.job;
      double cpi = j.base_cpi * (1.0 + offset +
                                 c_.interference_scale * interference +
                                 j.load[t] + dist) +
                   c_.noise_sigma * z;
      cpi = round_to(std::max(cpi, c_.cpi_floor), c_.round_decimals);
      if (!sampled) return std::nullopt;
      return cpi;
    };
    for (std::size_t i = 0; i < ls.size(); ++i) {
      emit(ls[i], ls[i].index, ls_usage[i], sample_cpi(ls[i]));
      if (ls[i].twin) emit(ls[i], ls[i].twin_index, ls_usage[i], sample_cpi(ls[i]));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      emit(batch[i], batch[i].index, batch_usage[i], std::nullopt);
      if (batch[i].twin) emit(batch[i], batch[i].twin_index, batch_usage[i], std::nullopt);
    }
    std::sort(slot_records.begin(), slot_records.end(),
              [](const TraceRecord& a, const TraceRecord& b) { return a.task < b.task; });
    if (placements != nullptr) {
      auto& set = placements->placements[{mid, slot}];
      for (const TraceRecord& r : slot_records) set.push_back(r.task);
    }
    out.insert(out.end(), slot_records.begin(), slot_records.end());

    for (LiveTask& task : ls) {
      if (task.remaining != UINT64_MAX) --task.remaining;
    }
    for (LiveTask& task : batch) {
      if (task.remaining != UINT64_MAX) --task.remaining;
    }
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidConfig("invalid synth config: " + what);
}

}  // namespace

void validate(const SynthConfig& c) {
  require(c.n_machines >= 1, "n_machines must be >= 1");
  require(c.n_jobs >= 2, "n_jobs must be >= 2");
  require(c.n_days >= 1, "n_days must be >= 1");
  require(c.slot_width_s > 0 && 86400 % c.slot_width_s == 0,
          "slot_width_s must divide a day");
  require(c.ls_fraction > 0.0 && c.ls_fraction < 1.0, "ls_fraction in (0,1)");
  require(c.colocation >= 2, "colocation must be >= 2");
  require(c.ls_task_share > 0.0 && c.ls_task_share < 1.0, "ls_task_share in (0,1)");
  require(c.twin_rate >= 0.0 && c.twin_rate <= 1.0, "twin_rate in [0,1]");
  require(c.cpi_sample_prob >= 0.0 && c.cpi_sample_prob <= 1.0,
          "cpi_sample_prob in [0,1]");
  require(c.usage.burst_prob >= 0.0 && c.usage.burst_prob <= 1.0,
          "usage.burst_prob in [0,1]");
  require(c.disturbance_rate >= 0.0 && c.disturbance_rate <= 1.0,
          "disturbance_rate in [0,1]");
  require(c.noise_sigma >= 0.0, "noise_sigma must be >= 0");
  require(c.machine_offset_sigma >= 0.0 && c.job_load_sigma >= 0.0,
          "offset and load sigmas must be >= 0");
  require(c.job_load_ar >= 0.0 && c.job_load_ar < 1.0, "job_load_ar in [0,1)");
  require(c.usage.ar_coeff >= 0.0 && c.usage.ar_coeff < 1.0,
          "usage.ar_coeff in [0,1)");
  require(c.usage.diurnal_period_slots > 0, "usage.diurnal_period_slots > 0");
  require(c.base_cpi_min > 0.0 && c.base_cpi_max >= c.base_cpi_min,
          "base CPI range");
  require(c.cpi_floor > 0.0, "cpi_floor must be positive");
  require(c.ls_lifetime_slots >= 1.0 && c.batch_lifetime_slots >= 1.0,
          "lifetimes must be >= 1 slot");
  const auto n_ls = static_cast<uint32_t>(
      std::clamp<long>(std::lround(c.ls_fraction * c.n_jobs), 1, c.n_jobs - 1));
  const uint32_t n_batch = c.n_jobs - n_ls;
  if (c.antagonist_jobs.empty()) {
    require(c.n_antagonists <= n_batch, "more antagonists than batch jobs");
    require(c.n_antagonists == 0 || (c.beta_min > 0.0 && c.beta_max >= c.beta_min),
            "beta range must be positive");
  } else {
    require(c.antagonist_jobs.size() <= n_batch, "more antagonists than batch jobs");
    for (const auto& [job, beta] : c.antagonist_jobs) {
      require(job.value >= 1 && job.value <= c.n_jobs, "antagonist job id out of range");
      require(beta > 0.0, "antagonist beta must be positive");
    }
  }
}

SynthConfig synth_config_from(const KeyValueConfig& kv,
                              const std::set<std::string, std::less<>>& extra) {
  std::set<std::string, std::less<>> known = {
      "n_machines", "n_jobs", "n_days", "slot_width_s", "ls_fraction",
      "colocation", "ls_task_share", "placement", "ls_lifetime_slots",
      "batch_lifetime_slots", "n_antagonists", "beta_min", "beta_max",
      "antagonists", "interference_scale", "base_cpi_min", "base_cpi_max",
      "cpi_floor", "noise_sigma", "machine_offset_sigma", "job_load_sigma",
      "job_load_ar", "disturbance_rate", "disturbance_mean_slots",
      "disturbance_magnitude", "cpi_sample_prob", "twin_rate",
      "round_decimals", "seed", "record_placements",
      "usage.batch_mean_median", "usage.batch_mean_spread",
      "usage.ls_mean_median", "usage.ls_mean_spread", "usage.ar_coeff",
      "usage.ar_cv", "usage.diurnal_amplitude", "usage.diurnal_period_slots",
      "usage.burst_prob", "usage.burst_mean_slots", "usage.burst_multiplier"};
  known.insert(extra.begin(), extra.end());
  kv.reject_unknown(known);

  SynthConfig c;
  auto u32 = [&](const char* key, uint32_t fallback) {
    return static_cast<uint32_t>(kv.get_uint(key, fallback));
  };
  c.n_machines = u32("n_machines", c.n_machines);
  c.n_jobs = u32("n_jobs", c.n_jobs);
  c.n_days = u32("n_days", c.n_days);
  c.slot_width_s = u32("slot_width_s", c.slot_width_s);
  c.ls_fraction = kv.get_double("ls_fraction", c.ls_fraction);
  c.colocation = u32("colocation", c.colocation);
  c.ls_task_share = kv.get_double("ls_task_share", c.ls_task_share);
  std::string placement = kv.get_string("placement", "churn");
  if (placement == "churn") {
    c.placement = Placement::kChurn;
  } else if (placement == "static") {
    c.placement = Placement::kStatic;
  } else {
    throw InvalidConfig("placement must be churn or static");
  }
  c.ls_lifetime_slots = kv.get_double("ls_lifetime_slots", c.ls_lifetime_slots);
  c.batch_lifetime_slots =
      kv.get_double("batch_lifetime_slots", c.batch_lifetime_slots);
  c.n_antagonists = u32("n_antagonists", c.n_antagonists);
  c.beta_min = kv.get_double("beta_min", c.beta_min);
  c.beta_max = kv.get_double("beta_max", c.beta_max);
  if (auto list = kv.raw("antagonists"); list && !list->empty()) {
    // "job:beta,job:beta"
    std::istringstream in(*list);
    std::string item;
    while (std::getline(in, item, ',')) {
      auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw InvalidConfig("antagonists entries must be job:beta");
      }
      try {
        c.antagonist_jobs[JobId{std::stoull(item.substr(0, colon))}] =
            std::stod(item.substr(colon + 1));
      } catch (const std::logic_error&) {
        throw InvalidConfig("bad antagonists entry '" + item + "'");
      }
    }
  }
  c.interference_scale = kv.get_double("interference_scale", c.interference_scale);
  c.base_cpi_min = kv.get_double("base_cpi_min", c.base_cpi_min);
  c.base_cpi_max = kv.get_double("base_cpi_max", c.base_cpi_max);
  c.cpi_floor = kv.get_double("cpi_floor", c.cpi_floor);
  c.noise_sigma = kv.get_double("noise_sigma", c.noise_sigma);
  c.machine_offset_sigma =
      kv.get_double("machine_offset_sigma", c.machine_offset_sigma);
  c.job_load_sigma = kv.get_double("job_load_sigma", c.job_load_sigma);
  c.job_load_ar = kv.get_double("job_load_ar", c.job_load_ar);
  c.disturbance_rate = kv.get_double("disturbance_rate", c.disturbance_rate);
  c.disturbance_mean_slots =
      kv.get_double("disturbance_mean_slots", c.disturbance_mean_slots);
  c.disturbance_magnitude =
      kv.get_double("disturbance_magnitude", c.disturbance_magnitude);
  c.cpi_sample_prob = kv.get_double("cpi_sample_prob", c.cpi_sample_prob);
  c.twin_rate = kv.get_double("twin_rate", c.twin_rate);
  c.round_decimals = u32("round_decimals", c.round_decimals);
  c.seed = kv.get_uint("seed", c.seed);
  c.record_placements = kv.get_bool("record_placements", c.record_placements);

  UsageModel& u = c.usage;
  u.batch_mean_median = kv.get_double("usage.batch_mean_median", u.batch_mean_median);
  u.batch_mean_spread = kv.get_double("usage.batch_mean_spread", u.batch_mean_spread);
  u.ls_mean_median = kv.get_double("usage.ls_mean_median", u.ls_mean_median);
  u.ls_mean_spread = kv.get_double("usage.ls_mean_spread", u.ls_mean_spread);
  u.ar_coeff = kv.get_double("usage.ar_coeff", u.ar_coeff);
  u.ar_cv = kv.get_double("usage.ar_cv", u.ar_cv);
  u.diurnal_amplitude = kv.get_double("usage.diurnal_amplitude", u.diurnal_amplitude);
  u.diurnal_period_slots = u32("usage.diurnal_period_slots", u.diurnal_period_slots);
  u.burst_prob = kv.get_double("usage.burst_prob", u.burst_prob);
  u.burst_mean_slots = kv.get_double("usage.burst_mean_slots", u.burst_mean_slots);
  u.burst_multiplier = kv.get_double("usage.burst_multiplier", u.burst_multiplier);
  validate(c);
  return c;
}

void GroundTruth::write_csv(std::ostream& out) const {
  out << "job_id,beta\n";
  for (const auto& [job, beta] : antagonists) {
    out << job.value << ',' << format_double(beta) << '\n';
  }
}

GroundTruth GroundTruth::read_csv(std::istream& in) {
  GroundTruth truth;
  std::string line;
  if (!std::getline(in, line) || line != "job_id,beta") {
    throw ParseError(1, "bad ground-truth header");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(lineno, "expected 2 columns");
    try {
      truth.antagonists[JobId{std::stoull(line.substr(0, comma))}] =
          std::stod(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw ParseError(lineno, "non-numeric field");
    }
  }
  return truth;
}

SynthOutput generate(const SynthConfig& config, uint32_t threads) {
  validate(config);
  const std::vector<JobSpec> jobs = make_jobs(config);
  SynthOutput result;
  for (const JobSpec& j : jobs) {
    if (j.beta > 0.0) result.truth.antagonists[j.id] = j.beta;
    if (j.ls) result.truth.base_cpi[j.id] = j.base_cpi;
  }

  std::vector<std::vector<TraceRecord>> per_machine(config.n_machines);
  std::vector<GroundTruth> per_machine_truth(config.n_machines);
  parallel_for(config.n_machines, threads, [&](std::size_t i) {
    const auto machine = static_cast<uint32_t>(i + 1);
    MachineGenerator gen(config, jobs, machine);
    per_machine[i].reserve(static_cast<std::size_t>(config.n_slots()) *
                           (config.colocation + 4));
    gen.run(per_machine[i],
            config.record_placements ? &per_machine_truth[i] : nullptr);
  });

  std::size_t total = 0;
  for (const auto& v : per_machine) total += v.size();
  result.trace.reserve(total);
  for (std::size_t i = 0; i < per_machine.size(); ++i) {
    result.trace.insert(result.trace.end(), per_machine[i].begin(),
                        per_machine[i].end());
    std::vector<TraceRecord>().swap(per_machine[i]);
    result.truth.placements.merge(per_machine_truth[i].placements);
  }
  return result;
}

namespace {

double measure_ratio(const SynthConfig& config, NoiseTarget mode,
                     uint32_t threads) {
  SynthOutput out = generate(config, threads);
  auto groups = sort_and_group(out.trace);
  TwinNoiseOptions opts;
  opts.seed = derive_seed(config.seed, 0xCA11B);
  TwinNoiseReport report = twin_noise_analysis(groups, opts);
  return mode == NoiseTarget::kTwin ? report.twin_ratio : report.colocated_ratio;
}

}  // namespace

SynthConfig calibrate_noise(const SynthConfig& config, double target,
                            NoiseTarget mode, double tolerance,
                            uint32_t threads) {
  if (!(target > 0.0 && target < 1.0)) {
    throw InvalidConfig("calibration target must be in (0, 1)");
  }
  if (mode == NoiseTarget::kTwin && config.twin_rate <= 0.0) {
    throw InvalidConfig("twin calibration needs twin_rate > 0");
  }
  SynthConfig mini = config;
  mini.n_machines = std::min<uint32_t>(config.n_machines, 20);
  mini.n_days = std::min<uint32_t>(config.n_days, 2);
  mini.record_placements = false;

  auto ratio_at = [&](double sigma) {
    mini.noise_sigma = sigma;
    return measure_ratio(mini, mode, threads);
  };

  double lo = 0.0;
  double f_lo = ratio_at(lo);
  if (f_lo > target + tolerance) throw Unreachable(target);
  double hi = 0.05 * config.base_cpi_max;
  double f_hi = ratio_at(hi);
  for (int i = 0; i < 30 && f_hi < target; ++i) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = ratio_at(hi);
  }
  if (f_hi < target) throw Unreachable(target);

  double best = std::abs(f_lo - target) < std::abs(f_hi - target) ? lo : hi;
  double best_err = std::min(std::abs(f_lo - target), std::abs(f_hi - target));
  for (int i = 0; i < 40 && best_err > tolerance; ++i) {
    double mid = 0.5 * (lo + hi);
    double f_mid = ratio_at(mid);
    if (std::abs(f_mid - target) < best_err) {
      best = mid;
      best_err = std::abs(f_mid - target);
    }
    if (f_mid < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_err > tolerance) throw Unreachable(target);
  SynthConfig out = config;
  out.noise_sigma = best;
  return out;
}

}  // namespace panda
