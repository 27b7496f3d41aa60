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
#include <random>
#include <sstream>

#include "gtest/gtest.h"

namespace panda {
namespace {

TraceRecord sample(uint64_t job, uint32_t k, double cpi, bool ls = true,
                   double usage = 0.5) {
  TraceRecord r;
  r.machine = MachineId{1};
  r.slot = SlotTime{0};
  r.task = {JobId{job}, k};
  r.cls = ls ? WorkloadClass{200, 2} : WorkloadClass{10, 0};
  r.cpu_usage = usage;
  r.cpi_sample = cpi;
  return r;
}

TEST(JobStatsTest, MeanAndPopulationStd) {
  std::vector<TraceRecord> rs = {sample(7, 0, 1.0), sample(7, 1, 2.0), sample(7, 2, 3.0)};
  auto t = compute_job_stats(rs);
  const JobCpiStats* s = t.find(JobId{7});
  ASSERT_NE(s, nullptr);
  EXPECT_DOUBLE_EQ(s->mean, 2.0);
  EXPECT_NEAR(s->std, std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_EQ(s->n_samples, 3u);
}

TEST(JobStatsTest, SingleSampleHasZeroStd) {
  std::vector<TraceRecord> rs = {sample(1, 0, 5.0)};
  auto t = compute_job_stats(rs);
  EXPECT_DOUBLE_EQ(t.find(JobId{1})->mean, 5.0);
  EXPECT_DOUBLE_EQ(t.find(JobId{1})->std, 0.0);
}

TEST(JobStatsTest, JobsAreIndependentAndUnsampledAbsent) {
  std::vector<TraceRecord> rs = {sample(1, 0, 1.0), sample(2, 0, 10.0),
                                 sample(1, 1, 3.0), sample(2, 1, 30.0)};
  TraceRecord no_cpi = sample(3, 0, 1.0);
  no_cpi.cpi_sample.reset();
  rs.push_back(no_cpi);
  auto t = compute_job_stats(rs);
  EXPECT_DOUBLE_EQ(t.find(JobId{1})->mean, 2.0);
  EXPECT_DOUBLE_EQ(t.find(JobId{2})->mean, 20.0);
  EXPECT_EQ(t.find(JobId{3}), nullptr);
  EXPECT_EQ(t.find(JobId{1}, 3), nullptr);
}

TEST(JobStatsTest, MergeMatchesSinglePass) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> d(0.0, 0.5);
  std::vector<TraceRecord> rs;
  for (uint32_t i = 0; i < 1000; ++i) rs.push_back(sample(1 + i % 3, i, d(rng)));
  auto whole = compute_job_stats(rs);
  JobStatsTable merged;
  for (std::size_t begin = 0; begin < rs.size(); begin += 137) {
    auto end = std::min(rs.size(), begin + 137);
    merged.merge(compute_job_stats(std::span(rs).subspan(begin, end - begin)));
  }
  for (const JobCpiStats& s : whole.sorted()) {
    const JobCpiStats* m = merged.find(s.job);
    ASSERT_NE(m, nullptr);
    EXPECT_NEAR(m->mean, s.mean, 1e-12 * s.mean);
    EXPECT_NEAR(m->std, s.std, 1e-12 * s.std);
    EXPECT_EQ(m->n_samples, s.n_samples);
  }
}

TEST(JobStatsTest, CsvRoundTrip) {
  std::vector<TraceRecord> rs = {sample(7, 0, 1.0), sample(7, 1, 2.5), sample(9, 0, 0.3)};
  auto t = compute_job_stats(rs);
  std::stringstream ss;
  t.write_csv(ss);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "job_id,mean,std,n_samples");
  auto back = JobStatsTable::read_csv(ss);
  for (const JobCpiStats& s : t.sorted()) {
    EXPECT_EQ(back.find(s.job)->mean, s.mean);
    EXPECT_EQ(back.find(s.job)->std, s.std);
    EXPECT_EQ(back.find(s.job)->n_samples, s.n_samples);
  }
}

TEST(NormalizeTest, Examples) {
  JobCpiStats s{JobId{7}, 2.0, 0.8165, 3};
  EXPECT_DOUBLE_EQ(normalize(sample(7, 0, 2.0), s, 1e-9)->ncpi, 0.0);
  EXPECT_NEAR(normalize(sample(7, 0, 3.0), s, 1e-9)->ncpi, 1.2247, 1e-4);
  JobCpiStats flat{JobId{7}, 5.0, 0.0, 1};
  EXPECT_NEAR(normalize(sample(7, 0, 9.9), flat, 1e-9)->ncpi, 4.9e9, 1e-3);
  TraceRecord none = sample(7, 0, 1.0);
  none.cpi_sample.reset();
  EXPECT_FALSE(normalize(none, s, 1e-9));
}

MachineSlotGroup group_of(const std::vector<TraceRecord>& rs) {
  return {rs.front().machine, rs.front().slot, rs};
}

// Stats chosen so that cpi == ncpi for jobs 1..3.
JobStatsTable unit_stats() {
  JobStatsTable t;
  for (uint64_t j = 1; j <= 3; ++j) {
    for (double v : {-1.0, 1.0, -1.0, 1.0, 0.0, 0.0}) {
      TraceRecord r = sample(j, 0, 1.0);
      r.cpi_sample = v;  // mean 0, std sqrt(2/3)
      t.add(r);
    }
  }
  return t;
}

TEST(AggregateTest, MeanOfLsTasks) {
  JobStatsTable t;
  for (double v : {0.0, 2.0, 4.0, 2.0, 2.0}) t.add(sample(1, 0, v));   // mean 2
  for (double v : {0.0, 2.0, 4.0, 2.0, 2.0}) t.add(sample(2, 0, v));
  const double sd = t.find(JobId{1})->std;
  std::vector<TraceRecord> rs = {sample(1, 0, 2.0 + 1.0 * sd), sample(2, 0, 2.0 + 3.0 * sd),
                                 sample(3, 0, 1.0, false)};
  std::vector<NormalizedSample> norm;
  auto p = aggregate_machine_slot(group_of(rs), t, {}, &norm);
  ASSERT_TRUE(p.mncpi);
  EXPECT_NEAR(*p.mncpi, 2.0, 1e-12);
  EXPECT_EQ(p.ls_sample_count, 2u);
  EXPECT_EQ(p.colocated.size(), 3u);
  EXPECT_EQ(norm.size(), 2u);
}

TEST(AggregateTest, SingletonAndEmpty) {
  JobStatsTable t;
  for (double v : {1.0, 3.0, 1.0, 3.0, 2.0, 2.0}) t.add(sample(1, 0, v));
  const JobCpiStats* s = t.find(JobId{1});
  std::vector<TraceRecord> one = {sample(1, 0, s->mean - 0.5 * s->std)};
  EXPECT_NEAR(*aggregate_machine_slot(group_of(one), t, {}).mncpi, -0.5, 1e-12);

  std::vector<TraceRecord> batch_only = {sample(1, 0, 2.0, false)};
  auto p = aggregate_machine_slot(group_of(batch_only), t, {});
  EXPECT_FALSE(p.mncpi);
  EXPECT_EQ(p.ls_sample_count, 0u);
  EXPECT_EQ(p.colocated.size(), 1u);
}

TEST(AggregateTest, MinCpiSamplesGate) {
  JobStatsTable t;
  for (double v : {1.0, 2.0, 3.0}) t.add(sample(1, 0, v));
  std::vector<TraceRecord> rs = {sample(1, 0, 3.0)};
  EXPECT_FALSE(aggregate_machine_slot(group_of(rs), t, {}).mncpi);
  PreprocessOptions lax;
  lax.min_cpi_samples = 3;
  EXPECT_TRUE(aggregate_machine_slot(group_of(rs), t, lax).mncpi);
}

TEST(AggregateTest, PermutationInvariantAndBounded) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  JobStatsTable t;
  for (int i = 0; i < 50; ++i) {
    for (uint64_t j = 1; j <= 6; ++j) t.add(sample(j, 0, 2.0 + z(rng)));
  }
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TraceRecord> rs;
    for (uint64_t j = 1; j <= 6; ++j) rs.push_back(sample(j, 0, 2.0 + z(rng), j % 2 == 0));
    std::vector<NormalizedSample> norm;
    auto p = aggregate_machine_slot(group_of(rs), t, {}, &norm);
    ASSERT_TRUE(p.mncpi);
    double lo = 1e300, hi = -1e300;
    for (const auto& n : norm) lo = std::min(lo, n.ncpi), hi = std::max(hi, n.ncpi);
    EXPECT_LE(lo, *p.mncpi);
    EXPECT_GE(hi, *p.mncpi);
    std::shuffle(rs.begin(), rs.end(), rng);
    EXPECT_NEAR(*aggregate_machine_slot(group_of(rs), t, {}).mncpi, *p.mncpi, 1e-12);
  }
}

}  // namespace
}  // namespace panda
