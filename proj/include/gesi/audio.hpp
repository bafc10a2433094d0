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

#ifndef GESI_AUDIO_HPP_
#define GESI_AUDIO_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gesi/common.hpp"

namespace gesi {

// Sampled waveform, full scale +-1.0. spl_ref is the SPL assigned to a
// full-scale sinusoid, so a sine of amplitude A sits at
// spl_ref + 20*log10(A) dB SPL.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 48000;
  double spl_ref = 100.0;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

inline double rms(const AudioBuffer& buf) {
  if (buf.empty()) throw Error("rms: empty buffer");
  double s = 0.0;
  for (double v : buf.samples) s += v * v;
  return std::sqrt(s / static_cast<double>(buf.samples.size()));
}

// dB re full scale. Throws on silence so -inf never propagates.
inline double rms_db(const AudioBuffer& buf) {
  const double r = rms(buf);
  if (r == 0.0) throw SilentSignalError("rms_db: all-zero signal");
  return linear_to_db(r);
}

// Leq in dB SPL under the buffer's full-scale-sine calibration.
inline double rms_db_spl(const AudioBuffer& buf) {
  return buf.spl_ref + rms_db(buf) + linear_to_db(std::sqrt(2.0));
}

inline AudioBuffer apply_gain_db(const AudioBuffer& buf, double gain_db) {
  if (!std::isfinite(gain_db)) throw Error("apply_gain_db: gain must be finite");
  AudioBuffer out = buf;
  const double g = db_to_linear(gain_db);
  for (double& v : out.samples) v *= g;
  return out;
}

struct MixResult {
  AudioBuffer mixture;
  AudioBuffer noise_component;  // the scaled noise segment that was added
  size_t noise_offset = 0;
  double noise_scale = 1.0;
};

// Adds a seed-deterministic noise segment scaled so that whole-utterance
// speech rms over segment noise rms equals snr_db. Speech is left unchanged.
inline MixResult mix_at_snr_detailed(const AudioBuffer& speech, const AudioBuffer& noise,
                                     double snr_db, uint64_t seed) {
  if (speech.sample_rate != noise.sample_rate)
    throw SampleRateMismatchError("mix_at_snr: sample rates differ");
  if (noise.size() < speech.size())
    throw DurationMismatchError("mix_at_snr: noise shorter than speech");
  if (speech.empty()) throw Error("mix_at_snr: empty speech");
  const double speech_rms = rms(speech);
  if (speech_rms == 0.0) throw SilentSignalError("mix_at_snr: silent speech");

  const size_t span = noise.size() - speech.size() + 1;
  std::mt19937_64 rng(seed);
  const size_t offset = static_cast<size_t>(rng() % span);

  double seg_power = 0.0;
  for (size_t i = 0; i < speech.size(); ++i) {
    const double v = noise.samples[offset + i];
    seg_power += v * v;
  }
  const double seg_rms = std::sqrt(seg_power / static_cast<double>(speech.size()));
  if (seg_rms == 0.0) throw SilentSignalError("mix_at_snr: silent noise segment");

  const double scale = speech_rms / (seg_rms * db_to_linear(snr_db));
  MixResult res;
  res.noise_offset = offset;
  res.noise_scale = scale;
  res.mixture = speech;
  res.noise_component = speech;
  for (size_t i = 0; i < speech.size(); ++i) {
    const double n = noise.samples[offset + i] * scale;
    res.noise_component.samples[i] = n;
    res.mixture.samples[i] = speech.samples[i] + n;
  }
  return res;
}

inline AudioBuffer mix_at_snr(const AudioBuffer& speech, const AudioBuffer& noise,
                              double snr_db, uint64_t seed) {
  return mix_at_snr_detailed(speech, noise, snr_db, seed).mixture;
}

struct TonePipSpec {
  double frequency_hz = 1000.0;
  int n_pips = 15;
  double step_db = -5.0;
  double start_level_db_spl = 70.0;
  double pip_duration_ms = 50.0;
  double ramp_ms = 5.0;
  double gap_ms = 400.0;

  void validate() const {
    if (n_pips < 1) throw Error("TonePipSpec: n_pips must be >= 1");
    if (step_db >= 0.0) throw Error("TonePipSpec: step_db must be negative");
    if (pip_duration_ms <= 2.0 * ramp_ms)
      throw Error("TonePipSpec: pip duration must exceed both ramps");
  }
};

// Descending raised-cosine gated tone bursts; pip k sits at
// start_level_db_spl + k*step_db.
inline AudioBuffer generate_tone_pips(const TonePipSpec& spec, int fs,
                                      double spl_ref = 100.0) {
  spec.validate();
  if (spec.frequency_hz >= fs / 2.0)
    throw Error("generate_tone_pips: frequency at or above Nyquist");
  const size_t pip_len = static_cast<size_t>(std::lround(spec.pip_duration_ms * 1e-3 * fs));
  const size_t gap_len = static_cast<size_t>(std::lround(spec.gap_ms * 1e-3 * fs));
  const size_t ramp_len = static_cast<size_t>(std::lround(spec.ramp_ms * 1e-3 * fs));

  AudioBuffer out;
  out.sample_rate = fs;
  out.spl_ref = spl_ref;
  out.samples.assign(static_cast<size_t>(spec.n_pips) * pip_len +
                         static_cast<size_t>(spec.n_pips - 1) * gap_len,
                     0.0);
  size_t pos = 0;
  for (int k = 0; k < spec.n_pips; ++k) {
    const double level = spec.start_level_db_spl + k * spec.step_db;
    const double amp = db_to_linear(level - spl_ref);
    for (size_t i = 0; i < pip_len; ++i) {
      double gate = 1.0;
      if (ramp_len > 0 && i < ramp_len) {
        gate = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(i) / ramp_len));
      } else if (ramp_len > 0 && i >= pip_len - ramp_len) {
        gate = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(pip_len - 1 - i) / ramp_len));
      }
      out.samples[pos + i] =
          amp * gate * std::sin(kTwoPi * spec.frequency_hz * static_cast<double>(i) / fs);
    }
    pos += pip_len + (k + 1 < spec.n_pips ? gap_len : 0);
  }
  return out;
}

}  // namespace gesi

#endif  // GESI_AUDIO_HPP_
