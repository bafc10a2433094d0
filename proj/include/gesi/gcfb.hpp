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

#ifndef GESI_GCFB_HPP_
#define GESI_GCFB_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "gesi/audio.hpp"
#include "gesi/common.hpp"
#include "gesi/erb.hpp"
#include "gesi/fft.hpp"
#include "gesi/hearing.hpp"

namespace gesi {

struct FilterbankSpec {
  int n_channels = 100;
  double f_min = 100.0;
  double f_max = 8000.0;
  int fs = 48000;
  int frame_rate = 2000;             // excitation-pattern frames per second
  double level_floor_db_spl = 0.0;   // EP floor
  double level_smoothing_ms = 4.0;   // envelope smoothing for the level track

  void validate() const {
    if (n_channels < 2) throw Error("FilterbankSpec: need at least 2 channels");
    if (!(f_min > 0.0 && f_min < f_max && f_max < fs / 2.0))
      throw Error("FilterbankSpec: need 0 < f_min < f_max < fs/2");
    if (frame_rate <= 0 || fs % frame_rate != 0)
      throw Error("FilterbankSpec: frame_rate must divide fs");
  }

  // Channel peak frequencies, equally spaced on the ERB-rate scale.
  std::vector<double> channel_freqs() const {
    validate();
    const double cam_lo = erb_rate(f_min);
    const double cam_hi = erb_rate(f_max);
    std::vector<double> freqs(n_channels);
    for (int i = 0; i < n_channels; ++i) {
      const double cam = cam_lo + (cam_hi - cam_lo) * i / (n_channels - 1);
      freqs[i] = erb_rate_to_hz(cam);
    }
    freqs.front() = f_min;
    freqs.back() = f_max;
    return freqs;
  }
};

struct ExcitationPattern {
  std::vector<std::vector<double>> levels;  // [channel][frame], dB SPL
  std::vector<double> peak_freqs;
  int frame_rate = 2000;
};

// Which gain the IO curve contributes to a channel signal.
enum class IoGainRule {
  kCompression,   // io(L, profile) - L: the front end's own compressive gain
  kRelativeToNh,  // io(L, profile) - io(L, NH): hearing-loss simulation gain
};

// Fourth-order complex gammatone filterbank on an ERB-rate grid.
// Each channel is a cascade of four identical one-pole complex resonators,
// normalized to complex gain 2 at the peak frequency so the real part of a
// channel output reproduces a centered tone at unity gain and the complex
// magnitude tracks its amplitude.
class Filterbank {
 public:
  explicit Filterbank(const FilterbankSpec& spec) : spec_(spec) {
    spec_.validate();
    freqs_ = spec_.channel_freqs();
    const int n = spec_.n_channels;
    pole_.resize(n);
    gain_.resize(n);
    for (int i = 0; i < n; ++i) {
      const double bw = 1.019 * erb_bandwidth(freqs_[i]);
      const double lambda = std::exp(-kTwoPi * bw / spec_.fs);
      const double beta = kTwoPi * freqs_[i] / spec_.fs;
      pole_[i] = std::polar(lambda, beta);
      gain_[i] = 2.0 * std::pow(1.0 - lambda, 4);
    }
    calibrate_synthesis();
  }

  const FilterbankSpec& spec() const { return spec_; }
  const std::vector<double>& peak_freqs() const { return freqs_; }
  int num_channels() const { return spec_.n_channels; }
  int frame_hop() const { return spec_.fs / spec_.frame_rate; }
  int synthesis_latency() const { return common_delay_; }

  // Complex band signal for one channel (per-call state, thread safe).
  // The cascade is unrolled with explicit real arithmetic; this loop
  // dominates the whole pipeline.
  std::vector<std::complex<double>> filter_channel(const std::vector<double>& x,
                                                   int ch) const {
    const double ar = pole_[ch].real();
    const double ai = pole_[ch].imag();
    const double g = gain_[ch];
    std::vector<std::complex<double>> z(x.size());
    double s1r = 0.0, s1i = 0.0, s2r = 0.0, s2i = 0.0;
    double s3r = 0.0, s3i = 0.0, s4r = 0.0, s4i = 0.0;
    for (size_t nidx = 0; nidx < x.size(); ++nidx) {
      double tr = x[nidx] + ar * s1r - ai * s1i;
      double ti = ar * s1i + ai * s1r;
      s1r = tr;
      s1i = ti;
      tr = s1r + ar * s2r - ai * s2i;
      ti = s1i + ar * s2i + ai * s2r;
      s2r = tr;
      s2i = ti;
      tr = s2r + ar * s3r - ai * s3i;
      ti = s2i + ar * s3i + ai * s3r;
      s3r = tr;
      s3i = ti;
      tr = s3r + ar * s4r - ai * s4i;
      ti = s3i + ar * s4i + ai * s4r;
      s4r = tr;
      s4i = ti;
      z[nidx] = {g * s4r, g * s4i};
    }
    return z;
  }

  // Raw frame-rate level track of a channel signal, dB SPL. The envelope
  // magnitude is smoothed with a first-order filter before sampling at
  // frame ends. Levels are clamped at the EP floor.
  std::vector<double> level_track_db(const std::vector<std::complex<double>>& z,
                                     double spl_ref) const {
    const int hop = frame_hop();
    const size_t n_frames = (z.size() + hop - 1) / hop;
    std::vector<double> levels(n_frames);
    const double coef =
        std::exp(-1.0 / (spec_.level_smoothing_ms * 1e-3 * spec_.fs));
    double env = 0.0;
    size_t frame = 0;
    for (size_t nidx = 0; nidx < z.size(); ++nidx) {
      const double zr = z[nidx].real(), zi = z[nidx].imag();
      env = coef * env + (1.0 - coef) * std::sqrt(zr * zr + zi * zi);
      if ((nidx + 1) % hop == 0 || nidx + 1 == z.size()) {
        const double level = spl_ref + linear_to_db(std::max(env, 1e-30));
        levels[frame++] = std::max(level, spec_.level_floor_db_spl);
      }
    }
    levels.resize(frame);
    return levels;
  }

  // Per-frame IO gain in dB for one channel. The hearing level at the
  // channel frequency is fixed, so interpolate it once.
  std::vector<double> io_gain_track_db(const std::vector<double>& levels_db, int ch,
                                       const HearingProfile& profile,
                                       IoGainRule rule) const {
    profile.validate();
    const double hl = profile.hearing_level_db(freqs_[ch]);
    const double alpha = profile.compression_health;
    std::vector<double> gains(levels_db.size());
    for (size_t k = 0; k < levels_db.size(); ++k) {
      const double io_p = io_impaired(levels_db[k], hl, alpha);
      gains[k] = (rule == IoGainRule::kCompression)
                     ? io_p - levels_db[k]
                     : io_p - io_normal(levels_db[k]);
    }
    return gains;
  }

  // Applies a frame-rate dB gain track to a channel signal: floor, convert
  // to linear, interpolate between frames, smooth with a first-order filter.
  void apply_gain_track(std::vector<std::complex<double>>& z,
                        const std::vector<double>& gains_db, double smoothing_ms,
                        double gain_floor_db) const {
    if (z.empty()) return;
    const int hop = frame_hop();
    std::vector<double> lin(gains_db.size());
    for (size_t k = 0; k < gains_db.size(); ++k)
      lin[k] = db_to_linear(std::max(gains_db[k], gain_floor_db));
    const double coef = smoothing_ms > 0.0
                            ? std::exp(-1.0 / (smoothing_ms * 1e-3 * spec_.fs))
                            : 0.0;
    double smoothed = lin.front();
    for (size_t nidx = 0; nidx < z.size(); ++nidx) {
      const size_t k = nidx / hop;
      const double frac = static_cast<double>(nidx % hop) / hop;
      const double g0 = lin[std::min(k, lin.size() - 1)];
      const double g1 = lin[std::min(k + 1, lin.size() - 1)];
      const double target = g0 + frac * (g1 - g0);
      smoothed = coef * smoothed + (1.0 - coef) * target;
      z[nidx] *= smoothed;
    }
  }

  // --- resynthesis -------------------------------------------------------
  // Channels are delay-compensated to a common envelope peak, phase-rotated
  // so their impulse responses peak in phase, and scaled by gains calibrated
  // at construction to flatten the summed response.

  int synthesis_shift(int ch) const { return common_delay_ - peak_delay_[ch]; }

  void add_synthesized(int ch, const std::vector<std::complex<double>>& z,
                       std::vector<double>& acc) const {
    const std::complex<double> w = syn_rot_[ch] * syn_gain_[ch];
    const size_t shift = static_cast<size_t>(synthesis_shift(ch));
    const size_t n = std::min(z.size(), acc.size() > shift ? acc.size() - shift : 0);
    for (size_t i = 0; i < n; ++i)
      acc[shift + i] += (w * z[i]).real();
  }

  // --- whole-signal analysis ---------------------------------------------

  ExcitationPattern excitation_pattern(const AudioBuffer& buf,
                                       const HearingProfile* profile) const {
    check_input(buf);
    if (profile != nullptr) profile->validate();
    ExcitationPattern ep;
    ep.peak_freqs = freqs_;
    ep.frame_rate = spec_.frame_rate;
    ep.levels.resize(spec_.n_channels);
    for (int ch = 0; ch < spec_.n_channels; ++ch) {
      const auto z = filter_channel(buf.samples, ch);
      auto levels = level_track_db(z, buf.spl_ref);
      if (profile != nullptr) {
        const double hl = profile->hearing_level_db(freqs_[ch]);
        for (double& level : levels)
          level = std::max(io_impaired(level, hl, profile->compression_health),
                           spec_.level_floor_db_spl);
      }
      ep.levels[ch] = std::move(levels);
    }
    return ep;
  }

  void check_input(const AudioBuffer& buf) const {
    if (buf.empty()) throw Error("Filterbank: empty buffer");
    if (buf.sample_rate != spec_.fs)
      throw SampleRateMismatchError("Filterbank: buffer rate differs from spec fs");
  }

 private:
  void calibrate_synthesis() {
    const int n = spec_.n_channels;
    const size_t n_ir = next_pow2(static_cast<size_t>(0.17 * spec_.fs));
    std::vector<double> impulse(n_ir, 0.0);
    impulse[0] = 1.0;
    std::vector<std::vector<std::complex<double>>> irs(n);
    peak_delay_.resize(n);
    syn_rot_.resize(n);
    syn_gain_.assign(n, 1.0);
    common_delay_ = 0;
    for (int ch = 0; ch < n; ++ch) {
      irs[ch] = filter_channel(impulse, ch);
      size_t peak = 0;
      double best = 0.0;
      for (size_t i = 0; i < n_ir; ++i) {
        const double m = std::abs(irs[ch][i]);
        if (m > best) {
          best = m;
          peak = i;
        }
      }
      peak_delay_[ch] = static_cast<int>(peak);
      syn_rot_[ch] = std::conj(irs[ch][peak]) / best;
      common_delay_ = std::max(common_delay_, peak_delay_[ch]);
    }
    // Flatten the summed re-synthesis response at the channel centers.
    for (int iter = 0; iter < 4; ++iter) {
      std::vector<double> acc(n_ir, 0.0);
      for (int ch = 0; ch < n; ++ch) add_synthesized(ch, irs[ch], acc);
      auto spec_resp = fft_real(acc, n_ir);
      for (int ch = 0; ch < n; ++ch) {
        const double bin = freqs_[ch] * n_ir / spec_.fs;
        const size_t b0 = static_cast<size_t>(bin);
        const double frac = bin - b0;
        const double mag = (1.0 - frac) * std::abs(spec_resp[b0]) +
                           frac * std::abs(spec_resp[b0 + 1]);
        if (mag > 1e-12) syn_gain_[ch] /= mag;
      }
    }
  }

  FilterbankSpec spec_;
  std::vector<double> freqs_;
  std::vector<std::complex<double>> pole_;
  std::vector<double> gain_;
  std::vector<int> peak_delay_;
  std::vector<std::complex<double>> syn_rot_;
  std::vector<double> syn_gain_;
  int common_delay_ = 0;
};

// IO function with the filterbank-range check on cf.
inline double io_function_checked(double level_db_spl, double cf_hz,
                                  const HearingProfile& profile,
                                  const FilterbankSpec& spec) {
  if (cf_hz < spec.f_min || cf_hz > spec.f_max)
    throw Error("io_function: cf outside filterbank range");
  return io_function(level_db_spl, cf_hz, profile);
}

struct AnalysisResult {
  std::vector<std::vector<double>> channel_signals;  // real band waveforms
  ExcitationPattern ep;
};

// Convenience whole-bank analysis; materializes all channel signals, so it
// is intended for short inputs. Batch paths stream channel by channel.
inline AnalysisResult analyze(const AudioBuffer& buf, const FilterbankSpec& spec,
                              const HearingProfile* profile = nullptr) {
  Filterbank bank(spec);
  bank.check_input(buf);
  AnalysisResult out;
  out.ep.peak_freqs = bank.peak_freqs();
  out.ep.frame_rate = spec.frame_rate;
  out.channel_signals.resize(spec.n_channels);
  out.ep.levels.resize(spec.n_channels);
  for (int ch = 0; ch < spec.n_channels; ++ch) {
    const auto z = bank.filter_channel(buf.samples, ch);
    auto levels = bank.level_track_db(z, buf.spl_ref);
    if (profile != nullptr) {
      for (double& level : levels)
        level = std::max(io_function(level, bank.peak_freqs()[ch], *profile),
                         spec.level_floor_db_spl);
    }
    out.ep.levels[ch] = std::move(levels);
    std::vector<double> real_sig(z.size());
    for (size_t i = 0; i < z.size(); ++i) real_sig[i] = z[i].real();
    out.channel_signals[ch] = std::move(real_sig);
  }
  return out;
}

}  // namespace gesi

#endif  // GESI_GCFB_HPP_
