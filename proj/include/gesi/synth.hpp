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

#ifndef GESI_SYNTH_HPP_
#define GESI_SYNTH_HPP_

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "gesi/audio.hpp"
#include "gesi/common.hpp"

namespace gesi {

// Seed-deterministic speech-like test material: glottal pulse train through
// time-varying parallel formant resonators, syllabic gating, fricative
// onsets. Not speech, but voiced, modulated and wideband enough to exercise
// the whole pipeline.

namespace synth_detail {

inline double urand(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double urange(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * urand(rng);
}

struct Resonator {
  double a1 = 0.0, a2 = 0.0, scale = 1.0;
  double y1 = 0.0, y2 = 0.0;

  void tune(double freq_hz, double bw_hz, int fs) {
    const double r = std::exp(-kPi * bw_hz / fs);
    const double theta = kTwoPi * freq_hz / fs;
    a1 = 2.0 * r * std::cos(theta);
    a2 = -r * r;
    // normalize gain at resonance
    const std::complex<double> z = std::polar(1.0, theta);
    const std::complex<double> den = 1.0 - a1 / z - a2 / (z * z);
    scale = std::abs(den);
  }

  double process(double x) {
    const double y = scale * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

struct Vowel {
  double f1, f2, f3;
};

inline const std::array<Vowel, 5>& vowel_table() {
  static const std::array<Vowel, 5> v = {{{730.0, 1090.0, 2440.0},
                                          {270.0, 2290.0, 3010.0},
                                          {300.0, 870.0, 2240.0},
                                          {530.0, 1840.0, 2480.0},
                                          {570.0, 840.0, 2410.0}}};
  return v;
}

}  // namespace synth_detail

inline AudioBuffer synth_utterance(uint64_t seed, int fs = 48000) {
  using namespace synth_detail;
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);

  const double f0_base = urange(rng, 105.0, 195.0);
  const int n_syllables = 4 + static_cast<int>(rng() % 3);

  struct Syllable {
    bool fricative_onset;
    double fric_center, fric_len_s;
    Vowel v_start, v_end;
    double nucleus_len_s, gap_s;
  };
  std::vector<Syllable> sylls(n_syllables);
  for (auto& s : sylls) {
    s.fricative_onset = urand(rng) < 0.6;
    s.fric_center = urange(rng, 3000.0, 6500.0);
    s.fric_len_s = urange(rng, 0.04, 0.07);
    s.v_start = vowel_table()[rng() % 5];
    s.v_end = vowel_table()[rng() % 5];
    s.nucleus_len_s = urange(rng, 0.14, 0.22);
    s.gap_s = urange(rng, 0.02, 0.05);
  }

  double total_s = 0.06;
  for (const auto& s : sylls)
    total_s += (s.fricative_onset ? s.fric_len_s : 0.0) + s.nucleus_len_s + s.gap_s;
  const size_t n = static_cast<size_t>(total_s * fs);

  AudioBuffer out;
  out.sample_rate = fs;
  out.samples.assign(n, 0.0);

  const double f4 = urange(rng, 3200.0, 3600.0);
  std::array<Resonator, 4> formants;
  Resonator fric_res;
  std::array<double, 4> formant_amp = {1.0, 0.5, 0.25, 0.12};
  std::array<double, 4> bw = {90.0, 110.0, 170.0, 250.0};

  double phase = 0.0;
  double lp1 = 0.0, lp2 = 0.0;  // glottal rolloff
  size_t pos = static_cast<size_t>(0.03 * fs);
  const size_t block = static_cast<size_t>(0.0025 * fs);

  for (const auto& s : sylls) {
    if (s.fricative_onset) {
      fric_res.tune(s.fric_center, 900.0, fs);
      const size_t len = static_cast<size_t>(s.fric_len_s * fs);
      for (size_t i = 0; i < len && pos + i < n; ++i) {
        const double gate = std::sin(kPi * static_cast<double>(i) / len);
        const double noise = urange(rng, -1.0, 1.0);
        out.samples[pos + i] += 0.02 * gate * gate * fric_res.process(noise);
      }
      pos += len;
    }
    const size_t len = static_cast<size_t>(s.nucleus_len_s * fs);
    const size_t ramp = static_cast<size_t>(0.025 * fs);
    for (size_t i = 0; i < len && pos + i < n; ++i) {
      if (i % block == 0) {
        const double t = static_cast<double>(i) / len;
        formants[0].tune(s.v_start.f1 + t * (s.v_end.f1 - s.v_start.f1), bw[0], fs);
        formants[1].tune(s.v_start.f2 + t * (s.v_end.f2 - s.v_start.f2), bw[1], fs);
        formants[2].tune(s.v_start.f3 + t * (s.v_end.f3 - s.v_start.f3), bw[2], fs);
        formants[3].tune(f4, bw[3], fs);
      }
      const double t_global = static_cast<double>(pos + i) / n;
      const double f0 = f0_base * (1.0 - 0.12 * t_global) *
                        (1.0 + 0.015 * std::sin(kTwoPi * 3.1 * (pos + i) / fs));
      phase += f0 / fs;
      double source = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        source = 1.0;
      }
      source += 0.008 * urange(rng, -1.0, 1.0);  // aspiration
      lp1 = 0.96 * lp1 + source;
      lp2 = 0.96 * lp2 + lp1;
      const double glottal = lp2 * 0.005;

      double gate = 1.0;
      if (i < ramp) gate = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(i) / ramp));
      else if (i + ramp > len)
        gate = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(len - i) / ramp));

      double sample = 0.0;
      for (int k = 0; k < 4; ++k) sample += formant_amp[k] * formants[k].process(glottal);
      out.samples[pos + i] += gate * sample;
    }
    pos += len + static_cast<size_t>(s.gap_s * fs);
  }

  // keep the material inside the 100 Hz..8 kHz analysis band: the glottal
  // one-poles pile up energy near DC otherwise
  for (int pass = 0; pass < 2; ++pass) {
    double x1 = 0.0, y1 = 0.0;
    for (double& v : out.samples) {
      const double y = v - x1 + 0.9866 * y1;
      x1 = v;
      y1 = y;
      v = y;
    }
  }

  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::fabs(v));
  if (peak > 0.0) {
    const double g = 0.3 / peak;
    for (double& v : out.samples) v *= g;
  }
  return out;
}

// Multi-talker babble: independently seeded utterance streams summed and
// rms-normalized. Long enough noise for any utterance in a corpus.
inline AudioBuffer synth_babble(uint64_t seed, double duration_s, int fs = 48000,
                                int n_voices = 8) {
  AudioBuffer out;
  out.sample_rate = fs;
  const size_t n = static_cast<size_t>(duration_s * fs);
  out.samples.assign(n, 0.0);
  for (int v = 0; v < n_voices; ++v) {
    size_t pos = 0;
    uint64_t utter_seed = seed ^ (0x517cc1b727220a95ULL * (v + 1));
    while (pos < n) {
      const AudioBuffer u = synth_utterance(utter_seed++, fs);
      for (size_t i = 0; i < u.size() && pos + i < n; ++i)
        out.samples[pos + i] += u.samples[i];
      pos += u.size();
    }
  }
  double power = 0.0;
  for (double v : out.samples) power += v * v;
  const double r = std::sqrt(power / static_cast<double>(n));
  if (r > 0.0) {
    const double g = 0.05 / r;
    for (double& v : out.samples) v *= g;
  }
  return out;
}

}  // namespace gesi

#endif  // GESI_SYNTH_HPP_
