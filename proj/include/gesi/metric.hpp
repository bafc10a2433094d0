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

#ifndef GESI_METRIC_HPP_
#define GESI_METRIC_HPP_

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "gesi/audio.hpp"
#include "gesi/common.hpp"
#include "gesi/f0.hpp"
#include "gesi/gcfb.hpp"
#include "gesi/modenv.hpp"

namespace gesi {

// Asymmetric similarity between reference and test modulation envelopes:
//   S = sum(m_r * m_t) / ((sum(m_r^2))^rho * (sum(m_t^2))^(1-rho)).
// rho = 0.5 is plain cosine similarity; rho above 0.5 penalizes a test
// signal whose level falls below the reference.
inline double similarity(std::span<const double> m_r, std::span<const double> m_t,
                         double rho) {
  if (m_r.size() != m_t.size()) throw Error("similarity: length mismatch");
  if (rho < 0.0 || rho > 1.0) throw Error("similarity: rho outside [0,1]");
  double dot = 0.0, p_r = 0.0, p_t = 0.0;
  for (size_t i = 0; i < m_r.size(); ++i) {
    dot += m_r[i] * m_t[i];
    p_r += m_r[i] * m_r[i];
    p_t += m_t[i] * m_t[i];
  }
  if (p_r == 0.0) throw DegenerateReferenceError("similarity: all-zero reference");
  if (p_t == 0.0) return 0.0;
  return dot / (std::pow(p_r, rho) * std::pow(p_t, 1.0 - rho));
}

// Maps the reported audible pip count to the asymmetry weight:
// rho = 0.50 + 0.02 * (15 - n_pip). Fractional counts are means across
// the four test frequencies.
inline double rho_from_npip(double n_pip) {
  if (n_pip < 0.0 || n_pip > 15.0) throw Error("rho_from_npip: n_pip outside [0,15]");
  return 0.50 + 0.02 * (15.0 - n_pip);
}

// Size-Shape Image channel weights: min(f_p / F0, h_max) / h_max per
// channel, then normalized to sum to one.
inline std::vector<double> ssi_weights(std::span<const double> peak_freqs,
                                       double f0_geomean_hz, double h_max) {
  if (f0_geomean_hz <= 0.0) throw Error("ssi_weights: F0 must be positive");
  if (h_max <= 0.0) throw Error("ssi_weights: h_max must be positive");
  std::vector<double> w(peak_freqs.size());
  double sum = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = std::min(peak_freqs[i] / f0_geomean_hz, h_max) / h_max;
    sum += w[i];
  }
  if (sum <= 0.0) throw Error("ssi_weights: degenerate weights");
  for (double& v : w) v /= sum;
  return w;
}

// d = sum_ij w_i w_j S_ij with both weight vectors summing to one.
inline double metric(const std::vector<std::vector<double>>& s,
                     std::span<const double> w_channel,
                     std::span<const double> w_modband) {
  if (s.size() != w_channel.size()) throw Error("metric: channel dimension mismatch");
  double d = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i].size() != w_modband.size()) throw Error("metric: band dimension mismatch");
    double row = 0.0;
    for (size_t j = 0; j < s[i].size(); ++j) row += w_modband[j] * s[i][j];
    d += w_channel[i] * row;
  }
  return d;
}

// Word correct rate (%) from the metric: I = 100 / (1 + exp(a*d + b)).
inline double intelligibility(double d, double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw Error("intelligibility: parameters must be finite");
  return 100.0 / (1.0 + std::exp(a * d + b));
}

// Least-squares sigmoid calibration on (d, observed percent) points.
// Coarse grid then damped Gauss-Newton; deterministic.
inline std::pair<double, double> fit_sigmoid(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw Error("fit_sigmoid: need at least 2 points");
  bool distinct = false;
  for (size_t i = 1; i < points.size(); ++i)
    if (points[i].first != points[0].first) distinct = true;
  if (!distinct)
    throw UnidentifiableFitError("fit_sigmoid: all metric values identical");

  auto sse = [&](double a, double b) {
    double e = 0.0;
    for (const auto& [d, y] : points) {
      const double r = intelligibility(d, a, b) - y;
      e += r * r;
    }
    return e;
  };

  double best_a = -1.0, best_b = 0.0, best_e = sse(-1.0, 0.0);
  for (int ia = 0; ia < 200; ++ia) {
    const double a = -100.0 + 0.5 * ia;  // [-100, -0.5]
    for (int ib = 0; ib <= 200; ++ib) {
      const double b = -50.0 + 0.5 * ib;
      const double e = sse(a, b);
      if (e < best_e) {
        best_e = e;
        best_a = a;
        best_b = b;
      }
    }
  }

  double a = best_a, b = best_b;
  double lambda = 1e-3;
  for (int iter = 0; iter < 500; ++iter) {
    double g_a = 0.0, g_b = 0.0, h_aa = 0.0, h_ab = 0.0, h_bb = 0.0;
    for (const auto& [d, y] : points) {
      const double i_val = intelligibility(d, a, b);
      const double r = i_val - y;
      const double di_dz = -i_val * (1.0 - i_val / 100.0);  // dI/d(a*d+b)
      const double ja = di_dz * d;
      const double jb = di_dz;
      g_a += 2.0 * r * ja;
      g_b += 2.0 * r * jb;
      h_aa += 2.0 * ja * ja;
      h_ab += 2.0 * ja * jb;
      h_bb += 2.0 * jb * jb;
    }
    const double grad_norm = std::sqrt(g_a * g_a + g_b * g_b);
    if (grad_norm < 1e-8) break;
    const double haa = h_aa * (1.0 + lambda), hbb = h_bb * (1.0 + lambda);
    const double det = haa * hbb - h_ab * h_ab;
    if (std::fabs(det) < 1e-30) break;
    const double da = -(hbb * g_a - h_ab * g_b) / det;
    const double db = -(haa * g_b - h_ab * g_a) / det;
    if (sse(a + da, b + db) < sse(a, b)) {
      a += da;
      b += db;
      lambda = std::max(lambda * 0.5, 1e-12);
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  return {a, b};
}

struct GesiParams {
  double rho = 0.55;
  double h_max = 5.0;
  std::vector<double> modband_weights;  // empty = uniform
  double sigmoid_a = -15.0;
  double sigmoid_b = 9.0;

  void validate() const {
    if (rho < 0.0 || rho > 1.0) throw Error("GesiParams: rho outside [0,1]");
    if (h_max <= 0.0) throw Error("GesiParams: h_max must be positive");
    double sum = 0.0;
    for (double w : modband_weights) {
      if (w < 0.0) throw Error("GesiParams: negative modband weight");
      sum += w;
    }
    if (!modband_weights.empty() && std::fabs(sum - 1.0) > 1e-9)
      throw Error("GesiParams: modband weights must sum to 1");
  }
};

struct GesiResult {
  std::vector<std::vector<double>> similarity_matrix;  // [channel][modband]
  std::vector<double> channel_weights;
  std::vector<double> modband_weights;
  double f0_geomean_hz = 0.0;
  double metric_d = 0.0;
  double intelligibility_pct = 0.0;
};

struct GesiOptions {
  FilterbankSpec fb;
  bool compressive_frontend = true;  // false bypasses the IO compression
  std::optional<HearingProfile> test_profile;  // listener setting for the test path
  std::optional<double> f0_geomean_hz;         // override the reference F0 estimate
  std::vector<double> modband_centers = default_modband_centers();
  int env_rate = 2000;
  double gain_smoothing_ms = 16.0;
  double gain_floor_db = -80.0;
  double duration_tolerance_s = 0.1;
  const Filterbank* bank = nullptr;  // optional shared filterbank (must match fb)
};

namespace detail {

// One channel through filter, optional IO compression, envelope and MFB;
// returns band magnitudes [band][frame].
inline std::vector<std::vector<double>> channel_modulation(
    const Filterbank& bank, int ch, const std::vector<double>& samples,
    double spl_ref, const HearingProfile* io_profile, const GesiOptions& opt) {
  auto z = bank.filter_channel(samples, ch);
  if (io_profile != nullptr) {
    const auto levels = bank.level_track_db(z, spl_ref);
    const auto gains =
        bank.io_gain_track_db(levels, ch, *io_profile, IoGainRule::kCompression);
    bank.apply_gain_track(z, gains, opt.gain_smoothing_ms, opt.gain_floor_db);
  }
  std::vector<double> real_sig(z.size());
  for (size_t i = 0; i < z.size(); ++i) real_sig[i] = z[i].real();
  const auto env = extract_envelope(real_sig, bank.spec().fs, opt.env_rate);
  auto bands = modulation_filterbank(env, opt.env_rate, opt.modband_centers);
  for (auto& band : bands)
    for (double& v : band) v = std::fabs(v);
  return bands;
}

inline double similarity_or_zero(const std::vector<double>& m_r,
                                 const std::vector<double>& m_t, double rho) {
  double p_r = 0.0, p_t = 0.0;
  for (double v : m_r) p_r += v * v;
  for (double v : m_t) p_t += v * v;
  // Silence scores as maximally dissimilar rather than erroring out.
  if (p_t == 0.0 || p_r == 0.0) return 0.0;
  return similarity(m_r, m_t, rho);
}

}  // namespace detail

// Modulation tensor of one signal through the GESI front end. io_profile
// selects the IO compression applied to the channel signals; nullptr keeps
// the front end linear.
inline ModulationRepresentation gesi_modulation(const Filterbank& bank,
                                                const AudioBuffer& buf,
                                                const HearingProfile* io_profile,
                                                const GesiOptions& options) {
  bank.check_input(buf);
  ModulationRepresentation rep;
  rep.modband_centers = options.modband_centers;
  rep.env_rate = options.env_rate;
  rep.values.resize(static_cast<size_t>(bank.num_channels()));
  for (int ch = 0; ch < bank.num_channels(); ++ch)
    rep.values[static_cast<size_t>(ch)] =
        detail::channel_modulation(bank, ch, buf.samples, buf.spl_ref, io_profile, options);
  return rep;
}

// Metric evaluation on precomputed modulation tensors; the front end of
// gesi() reduces to this once the tensors exist.
inline GesiResult gesi_score_tensors(const ModulationRepresentation& m_ref,
                                     const ModulationRepresentation& m_test,
                                     std::span<const double> peak_freqs,
                                     double f0_geomean_hz, const GesiParams& params) {
  params.validate();
  if (m_ref.n_channels() != m_test.n_channels() || m_ref.n_bands() != m_test.n_bands())
    throw Error("gesi_score_tensors: tensor shape mismatch");
  const size_t n_ch = m_ref.n_channels();
  const size_t n_bands = m_ref.n_bands();

  GesiResult res;
  res.f0_geomean_hz = f0_geomean_hz;
  res.similarity_matrix.assign(n_ch, std::vector<double>(n_bands, 0.0));
  for (size_t i = 0; i < n_ch; ++i)
    for (size_t j = 0; j < n_bands; ++j)
      res.similarity_matrix[i][j] =
          detail::similarity_or_zero(m_ref.values[i][j], m_test.values[i][j], params.rho);

  res.channel_weights = ssi_weights(peak_freqs, f0_geomean_hz, params.h_max);
  if (params.modband_weights.empty()) {
    res.modband_weights.assign(n_bands, 1.0 / static_cast<double>(n_bands));
  } else {
    if (params.modband_weights.size() != n_bands)
      throw Error("gesi_score_tensors: modband weight count mismatch");
    res.modband_weights = params.modband_weights;
  }
  res.metric_d = metric(res.similarity_matrix, res.channel_weights, res.modband_weights);
  res.intelligibility_pct =
      intelligibility(res.metric_d, params.sigmoid_a, params.sigmoid_b);
  return res;
}

// End-to-end GESI: filterbank analysis of both signals, modulation
// decomposition, per-cell similarity, SSI-weighted aggregation, sigmoid.
inline GesiResult gesi_score(const AudioBuffer& reference, const AudioBuffer& test,
                             const GesiParams& params, const GesiOptions& options = {}) {
  params.validate();
  if (reference.sample_rate != test.sample_rate)
    throw SampleRateMismatchError("gesi: sample rates differ");
  if (reference.empty() || test.empty()) throw Error("gesi: empty input");
  const double dur_diff =
      std::fabs(reference.duration_s() - test.duration_s());
  if (dur_diff > options.duration_tolerance_s)
    throw DurationMismatchError("gesi: duration mismatch beyond tolerance");
  if (rms(reference) == 0.0) throw SilentSignalError("gesi: silent reference");
  if (rms(test) == 0.0) throw SilentSignalError("gesi: silent test signal");

  AudioBuffer ref = reference;
  AudioBuffer tst = test;
  const size_t n = std::min(ref.size(), tst.size());
  ref.samples.resize(n);
  tst.samples.resize(n);

  std::optional<Filterbank> local_bank;
  if (options.bank == nullptr) {
    FilterbankSpec fb = options.fb;
    fb.fs = ref.sample_rate;
    local_bank.emplace(fb);
  }
  const Filterbank& bank = options.bank != nullptr ? *options.bank : *local_bank;

  const double f0 = options.f0_geomean_hz ? *options.f0_geomean_hz
                                          : estimate_f0_geomean(ref);

  const HearingProfile nh = normal_hearing_profile();
  const HearingProfile* ref_io = options.compressive_frontend ? &nh : nullptr;
  const HearingProfile* test_io = nullptr;
  if (options.compressive_frontend)
    test_io = options.test_profile ? &*options.test_profile : &nh;

  const auto m_ref = gesi_modulation(bank, ref, ref_io, options);
  const auto m_test = gesi_modulation(bank, tst, test_io, options);
  return gesi_score_tensors(m_ref, m_test, bank.peak_freqs(), f0, params);
}

}  // namespace gesi

#endif  // GESI_METRIC_HPP_
