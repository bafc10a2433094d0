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

#ifndef GESI_PSYCHO_HPP_
#define GESI_PSYCHO_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gesi/common.hpp"
#include "gesi/stats.hpp"

namespace gesi {

struct TrialRecord {
  std::string participant_id;
  std::string condition;  // unprocessed | 70yr | 80yr | m20db
  double snr_db = 0.0;
  int n_correct = 0;
  int n_total = 20;

  void validate() const {
    if (n_total < 1) throw Error("TrialRecord: n_total must be >= 1");
    if (n_correct < 0 || n_correct > n_total)
      throw Error("TrialRecord: n_correct outside [0, n_total]");
  }
};

// Cumulative-Gaussian psychometric function with lapse rate:
// p(x) = (1 - lapse) * Phi((x - mu) / sigma). Guess rate fixed at 0.
struct PsychometricFit {
  double mu = 0.0;
  double sigma = 1.0;
  double lapse = 0.0;
  double guess = 0.0;
  double log_likelihood = 0.0;
  bool boundary_warning = false;

  double predict(double snr_db) const {
    return (1.0 - lapse) * normal_cdf((snr_db - mu) / sigma);
  }
};

struct ScreeningRecord {
  std::string participant_id;
  std::array<double, 4> n_pip{};  // 500, 1000, 2000, 4000 Hz

  double n_pip_mean() const {
    return (n_pip[0] + n_pip[1] + n_pip[2] + n_pip[3]) / 4.0;
  }
  void validate() const {
    for (double v : n_pip)
      if (v < 0.0 || v > 15.0) throw Error("ScreeningRecord: count outside [0,15]");
  }
};

namespace psycho_detail {

inline constexpr double kMuLo = -20.0, kMuHi = 20.0, kMuStep = 0.5;
inline constexpr double kSigmaLo = 0.25, kSigmaHi = 20.0, kSigmaStep = 0.25;
inline constexpr std::array<double, 4> kLapseGrid = {0.0, 0.02, 0.05, 0.1};

struct Cell {
  double snr = 0.0;
  int k = 0;
  int n = 0;
};

inline double neg_log_likelihood(const std::vector<Cell>& cells, double mu,
                                 double sigma, double lapse) {
  sigma = std::clamp(sigma, 1e-6, kSigmaHi);
  lapse = std::clamp(lapse, 0.0, 0.1);
  double nll = 0.0;
  for (const auto& c : cells) {
    double p = (1.0 - lapse) * normal_cdf((c.snr - mu) / sigma);
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    nll -= c.k * std::log(p) + (c.n - c.k) * std::log1p(-p);
  }
  return nll;
}

// Deterministic Nelder-Mead on (mu, sigma, lapse) with box projection.
inline std::array<double, 3> refine(const std::vector<Cell>& cells,
                                    std::array<double, 3> start) {
  auto project = [](std::array<double, 3> p) {
    p[0] = std::clamp(p[0], kMuLo - 20.0, kMuHi + 20.0);
    p[1] = std::clamp(p[1], 1e-3, kSigmaHi);
    p[2] = std::clamp(p[2], 0.0, 0.1);
    return p;
  };
  auto f = [&](const std::array<double, 3>& p) {
    return neg_log_likelihood(cells, p[0], p[1], p[2]);
  };
  std::array<std::array<double, 3>, 4> simplex;
  simplex[0] = project(start);
  simplex[1] = project({start[0] + 0.5, start[1], start[2]});
  simplex[2] = project({start[0], start[1] + 0.25, start[2]});
  simplex[3] = project({start[0], start[1], start[2] + 0.02});
  std::array<double, 4> val;
  for (int i = 0; i < 4; ++i) val[i] = f(simplex[i]);

  for (int iter = 0; iter < 400; ++iter) {
    std::array<int, 4> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
    const auto& best = simplex[order[0]];
    const auto& worst = simplex[order[3]];
    if (std::fabs(val[order[3]] - val[order[0]]) < 1e-12) break;

    std::array<double, 3> centroid{};
    for (int i = 0; i < 3; ++i)
      for (int d = 0; d < 3; ++d) centroid[d] += simplex[order[i]][d] / 3.0;

    auto mix = [&](double t) {
      std::array<double, 3> p;
      for (int d = 0; d < 3; ++d) p[d] = centroid[d] + t * (centroid[d] - worst[d]);
      return project(p);
    };
    const auto reflected = mix(1.0);
    const double fr = f(reflected);
    if (fr < val[order[0]]) {
      const auto expanded = mix(2.0);
      const double fe = f(expanded);
      simplex[order[3]] = fe < fr ? expanded : reflected;
      val[order[3]] = std::min(fe, fr);
    } else if (fr < val[order[2]]) {
      simplex[order[3]] = reflected;
      val[order[3]] = fr;
    } else {
      const auto contracted = mix(-0.5);
      const double fc = f(contracted);
      if (fc < val[order[3]]) {
        simplex[order[3]] = contracted;
        val[order[3]] = fc;
      } else {
        for (int i = 1; i < 4; ++i) {
          for (int d = 0; d < 3; ++d)
            simplex[order[i]][d] = best[d] + 0.5 * (simplex[order[i]][d] - best[d]);
          val[order[i]] = f(simplex[order[i]]);
        }
      }
    }
  }
  int best_i = 0;
  for (int i = 1; i < 4; ++i)
    if (val[i] < val[best_i]) best_i = i;
  return simplex[best_i];
}

}  // namespace psycho_detail

// Maximum-likelihood binomial fit over (mu, sigma, lapse) with a fixed grid
// followed by simplex refinement. Degenerate data (all wrong or all correct)
// yields clamped parameters with boundary_warning set instead of failing.
inline PsychometricFit fit_psychometric(const std::vector<TrialRecord>& records) {
  using namespace psycho_detail;
  if (records.empty()) throw Error("fit_psychometric: no records");
  std::map<double, Cell> merged;
  int total = 0;
  for (const auto& r : records) {
    r.validate();
    auto& c = merged[r.snr_db];
    c.snr = r.snr_db;
    c.k += r.n_correct;
    c.n += r.n_total;
    total += r.n_total;
  }
  if (merged.size() < 2)
    throw Error("fit_psychometric: need at least 2 distinct SNR levels");
  if (total < 10) throw Error("fit_psychometric: need at least 10 trials");
  std::vector<Cell> cells;
  for (const auto& [snr, c] : merged) cells.push_back(c);

  int sum_k = 0, sum_n = 0;
  for (const auto& c : cells) {
    sum_k += c.k;
    sum_n += c.n;
  }
  const bool degenerate = (sum_k == 0 || sum_k == sum_n);

  double best_nll = 1e300;
  std::array<double, 3> best{0.0, 1.0, 0.0};
  for (double mu = kMuLo; mu <= kMuHi + 1e-9; mu += kMuStep) {
    for (double sigma = kSigmaLo; sigma <= kSigmaHi + 1e-9; sigma += kSigmaStep) {
      for (double lapse : kLapseGrid) {
        const double nll = neg_log_likelihood(cells, mu, sigma, lapse);
        if (nll < best_nll) {
          best_nll = nll;
          best = {mu, sigma, lapse};
        }
      }
    }
  }

  PsychometricFit fit;
  if (degenerate) {
    // All-or-nothing data pins mu against the grid edge; report it clamped.
    fit.mu = best[0];
    fit.sigma = best[1];
    fit.lapse = best[2];
    fit.boundary_warning = true;
    fit.log_likelihood = -best_nll;
    return fit;
  }
  const auto refined = refine(cells, best);
  fit.mu = refined[0];
  fit.sigma = refined[1];
  fit.lapse = refined[2];
  fit.log_likelihood = -neg_log_likelihood(cells, fit.mu, fit.sigma, fit.lapse);
  fit.boundary_warning =
      fit.mu <= kMuLo - 19.0 || fit.mu >= kMuHi + 19.0 || fit.sigma >= kSigmaHi - 1e-6;
  return fit;
}

// SNR where the fitted function crosses 50%: mu + sigma * PhiInv(0.5 / (1 - lapse)).
inline double srt(const PsychometricFit& fit) {
  if (1.0 - fit.lapse <= 0.5)
    throw NoSrtError("srt: psychometric ceiling below 50%");
  return fit.mu + fit.sigma * normal_quantile(0.5 / (1.0 - fit.lapse));
}

// Dynamic range above threshold spanned by the audible pips:
// 5 dB steps across (n_pip - 1) intervals, floor 0.
inline double dynamic_range(double n_pip) {
  if (n_pip < 0.0 || n_pip > 15.0) throw Error("dynamic_range: n_pip outside [0,15]");
  if (n_pip <= 1.0) return 0.0;
  return 5.0 * (n_pip - 1.0);
}

struct ScreeningPartition {
  std::vector<ScreeningRecord> included;
  std::vector<ScreeningRecord> excluded;
};

// Excludes participants whose mean pip count is strictly below threshold.
inline ScreeningPartition screen(const std::vector<ScreeningRecord>& records,
                                 double threshold = 9.0) {
  ScreeningPartition part;
  for (const auto& r : records) {
    r.validate();
    (r.n_pip_mean() < threshold ? part.excluded : part.included).push_back(r);
  }
  return part;
}

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  size_t n = 0;
};

inline PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  if (x.size() < 3) throw Error("pearson: need at least 3 points");
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelationError("pearson: zero variance input");
  PearsonResult res;
  res.n = n;
  res.r = sxy / std::sqrt(sxx * syy);
  const double df = static_cast<double>(n - 2);
  const double denom = 1.0 - res.r * res.r;
  if (denom <= 0.0) {
    res.p = 0.0;
  } else {
    const double t = res.r * std::sqrt(df / denom);
    res.p = student_t_two_tailed_p(t, df);
  }
  return res;
}

}  // namespace gesi

#endif  // GESI_PSYCHO_HPP_
