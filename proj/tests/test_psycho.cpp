// Copyright 2026 The Gesikit Authors. All Rights Reserved.
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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "gesi/psycho.hpp"
#include "gesi/stats.hpp"
#include "test_support.hpp"

using namespace gesi;
namespace ts = test_support;

namespace {

std::vector<TrialRecord> make_records(double mu, double sigma, double lapse, int n_per_cell,
                                      uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TrialRecord> records;
  for (double snr : {-3.0, 0.0, 3.0, 6.0, 9.0}) {
    const double p = (1.0 - lapse) * ts::oracle_normal_cdf((snr - mu) / sigma);
    int correct = 0;
    for (int t = 0; t < n_per_cell; ++t)
      if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < p) ++correct;
    records.push_back({"p1", "unprocessed", snr, correct, n_per_cell});
  }
  return records;
}

}  // namespace

TEST_CASE("normal_quantile agrees with a bisection oracle") {
  for (double p : {0.001, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999})
    CHECK(std::fabs(normal_quantile(p) - ts::oracle_normal_quantile(p)) <= 1e-9);
  CHECK_THROWS_AS(normal_quantile(0.0), Error);
  CHECK_THROWS_AS(normal_quantile(1.0), Error);
}

TEST_CASE("student t p-value agrees with numeric integration") {
  CHECK(std::fabs(student_t_two_tailed_p(2.3094, 3.0) -
                  ts::oracle_t_two_tailed_p(2.3094, 3)) <= 1e-7);
  CHECK(std::fabs(student_t_two_tailed_p(1.0, 10.0) -
                  ts::oracle_t_two_tailed_p(1.0, 10)) <= 1e-7);
  CHECK(student_t_two_tailed_p(0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_psychometric: noiseless large-n recovery") {
  // cells drawn exactly from (1-0) * Phi((x - 3) / 2)
  std::vector<TrialRecord> records;
  for (double snr : {-3.0, 0.0, 3.0, 6.0, 9.0}) {
    const int n = 1000;
    const int k = static_cast<int>(std::lround(n * ts::oracle_normal_cdf((snr - 3.0) / 2.0)));
    records.push_back({"p1", "unprocessed", snr, k, n});
  }
  const PsychometricFit fit = fit_psychometric(records);
  CHECK(std::fabs(fit.mu - 3.0) <= 0.1);
  CHECK(std::fabs(fit.sigma - 2.0) <= 0.1);
  CHECK_FALSE(fit.boundary_warning);
}

TEST_CASE("fit_psychometric: Monte Carlo recovery at the 20-trials-per-cell design") {
  std::vector<double> errors;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto records = make_records(3.0, 2.0, 0.0, 20, 1000 + seed);
    int total_correct = 0, total = 0;
    for (const auto& r : records) {
      total_correct += r.n_correct;
      total += r.n_total;
    }
    if (total_correct == 0 || total_correct == total) continue;  // degenerate draw
    const PsychometricFit fit = fit_psychometric(records);
    errors.push_back(std::fabs(fit.mu - 3.0));
  }
  REQUIRE(errors.size() >= 95);
  CHECK(median(errors) <= 1.0);
}

TEST_CASE("fit_psychometric: degenerate data warns instead of failing") {
  std::vector<TrialRecord> perfect, hopeless;
  for (double snr : {-3.0, 0.0, 3.0, 6.0, 9.0}) {
    perfect.push_back({"p", "unprocessed", snr, 20, 20});
    hopeless.push_back({"p", "unprocessed", snr, 0, 20});
  }
  CHECK(fit_psychometric(perfect).boundary_warning);
  CHECK(fit_psychometric(hopeless).boundary_warning);
}

TEST_CASE("fit_psychometric: invariant to ordering and cell splitting") {
  auto records = make_records(2.0, 3.0, 0.0, 20, 77);
  const PsychometricFit base = fit_psychometric(records);

  auto shuffled = records;
  std::reverse(shuffled.begin(), shuffled.end());
  const PsychometricFit rev = fit_psychometric(shuffled);
  CHECK(rev.mu == base.mu);
  CHECK(rev.sigma == base.sigma);

  // split every cell into two half-cells at the same SNR
  std::vector<TrialRecord> split;
  for (const auto& r : records) {
    TrialRecord a = r, b = r;
    a.n_correct = r.n_correct / 2;
    a.n_total = r.n_total / 2;
    b.n_correct = r.n_correct - a.n_correct;
    b.n_total = r.n_total - a.n_total;
    split.push_back(a);
    split.push_back(b);
  }
  const PsychometricFit merged = fit_psychometric(split);
  CHECK(merged.mu == base.mu);
  CHECK(merged.sigma == base.sigma);
}

TEST_CASE("fit_psychometric: preconditions") {
  std::vector<TrialRecord> one_level = {{"p", "c", 0.0, 5, 10}, {"p", "c", 0.0, 7, 10}};
  CHECK_THROWS_AS(fit_psychometric(one_level), Error);
  std::vector<TrialRecord> tiny = {{"p", "c", 0.0, 1, 4}, {"p", "c", 3.0, 3, 4}};
  CHECK_THROWS_AS(fit_psychometric(tiny), Error);
  std::vector<TrialRecord> bad = {{"p", "c", 0.0, 9, 4}};
  CHECK_THROWS_AS(fit_psychometric(bad), Error);
}

TEST_CASE("srt") {
  SUBCASE("zero lapse puts the SRT at mu exactly") {
    PsychometricFit fit;
    fit.mu = 3.0;
    fit.sigma = 2.0;
    fit.lapse = 0.0;
    CHECK(srt(fit) == 3.0);
  }
  SUBCASE("lapse shifts the 50% point per the closed form") {
    PsychometricFit fit;
    fit.mu = 3.0;
    fit.sigma = 2.0;
    fit.lapse = 0.05;
    const double expected = 3.0 + 2.0 * ts::oracle_normal_quantile(0.5 / 0.95);
    CHECK(std::fabs(srt(fit) - expected) <= 1e-8);
    CHECK(srt(fit) == doctest::Approx(3.132).epsilon(1e-3));
  }
  SUBCASE("ceiling below 50% has no SRT") {
    PsychometricFit fit;
    fit.lapse = 0.6;
    CHECK_THROWS_AS(srt(fit), NoSrtError);
  }
  SUBCASE("strictly increasing in mu") {
    PsychometricFit fit;
    fit.sigma = 2.0;
    fit.lapse = 0.02;
    double prev = -1e300;
    for (double mu = -5.0; mu <= 5.0; mu += 0.5) {
      fit.mu = mu;
      const double s = srt(fit);
      CHECK(s > prev);
      prev = s;
    }
  }
}

TEST_CASE("dynamic_range") {
  CHECK(dynamic_range(9.0) == 40.0);
  CHECK(dynamic_range(15.0) == 70.0);
  CHECK(dynamic_range(1.0) == 0.0);
  CHECK(dynamic_range(0.0) == 0.0);
  CHECK_THROWS_AS(dynamic_range(-1.0), Error);
  CHECK_THROWS_AS(dynamic_range(16.0), Error);
}

TEST_CASE("screen") {
  ScreeningRecord low{"low", {8.0, 9.0, 9.0, 9.0}};    // mean 8.75
  ScreeningRecord edge{"edge", {9.0, 9.0, 9.0, 9.0}};  // mean 9.0
  ScreeningRecord high{"high", {15.0, 14.0, 13.0, 12.0}};
  SUBCASE("strictly-below-threshold participants are excluded") {
    const auto part = screen({low, edge, high}, 9.0);
    REQUIRE(part.excluded.size() == 1);
    CHECK(part.excluded[0].participant_id == "low");
    REQUIRE(part.included.size() == 2);
    CHECK(part.included[0].participant_id == "edge");
  }
  SUBCASE("empty input gives empty partitions") {
    const auto part = screen({}, 9.0);
    CHECK(part.included.empty());
    CHECK(part.excluded.empty());
  }
  SUBCASE("extreme thresholds") {
    CHECK(screen({low, edge, high}, 0.0).excluded.empty());
    CHECK(screen({low, edge, high}, 16.0).included.empty());
  }
  SUBCASE("count range validation") {
    ScreeningRecord bad{"bad", {16.0, 9.0, 9.0, 9.0}};
    CHECK_THROWS_AS(screen({bad}, 9.0), Error);
  }
}

TEST_CASE("pearson") {
  SUBCASE("perfect linearity") {
    const std::vector<double> x = {1, 2, 3, 4, 5, 6};
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = 2.0 * x[i] + 1.0;
    const auto res = pearson(x, y);
    CHECK(res.r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.p <= 1e-12);
  }
  SUBCASE("hand-computed five-point dataset") {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    const std::vector<double> y = {2, 1, 4, 3, 5};
    const auto res = pearson(x, y);
    CHECK(res.r == doctest::Approx(0.8).epsilon(1e-12));
    const double t = 0.8 * std::sqrt(3.0 / (1.0 - 0.64));
    CHECK(std::fabs(res.p - ts::oracle_t_two_tailed_p(t, 3)) <= 1e-6);
  }
  SUBCASE("constant input is undefined") {
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{4, 4, 4}),
                    UndefinedCorrelationError);
  }
  SUBCASE("symmetry and affine invariance with positive slope") {
    const std::vector<double> x = {1.4, -2.0, 3.3, 0.9, 5.1};
    const std::vector<double> y = {0.2, 1.0, -0.7, 2.2, 1.9};
    CHECK(pearson(x, y).r == doctest::Approx(pearson(y, x).r).epsilon(1e-12));
    std::vector<double> x2(x.size());
    for (size_t i = 0; i < x.size(); ++i) x2[i] = 3.0 * x[i] - 11.0;
    CHECK(pearson(x2, y).r == doctest::Approx(pearson(x, y).r).epsilon(1e-12));
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), Error);
  }
}

TEST_CASE("TrialRecord validation") {
  TrialRecord bad{"p", "c", 0.0, 5, 0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {"p", "c", 0.0, 21, 20};
  CHECK_THROWS_AS(bad.validate(), Error);
}
