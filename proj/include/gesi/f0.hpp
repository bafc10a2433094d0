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

#ifndef GESI_F0_HPP_
#define GESI_F0_HPP_

#include <cmath>
#include <complex>
#include <vector>

#include "gesi/audio.hpp"
#include "gesi/common.hpp"
#include "gesi/fft.hpp"

namespace gesi {

struct F0Options {
  double f_min = 60.0;
  double f_max = 400.0;
  double window_ms = 40.0;
  double hop_ms = 10.0;
  double voicing_threshold = 0.5;  // normalized autocorrelation peak clarity
};

// Frame-wise F0 by normalized autocorrelation (FFT-based, energies from
// prefix sums). To dodge octave errors the shortest peak within 10% of the
// best wins. Returns voiced-frame F0s.
inline std::vector<double> f0_track(const AudioBuffer& buf, const F0Options& opt = {}) {
  if (buf.empty()) throw Error("f0_track: empty buffer");
  const int fs = buf.sample_rate;
  const size_t win = static_cast<size_t>(opt.window_ms * 1e-3 * fs);
  const size_t hop = static_cast<size_t>(opt.hop_ms * 1e-3 * fs);
  const size_t lag_min = static_cast<size_t>(fs / opt.f_max);
  const size_t lag_max = static_cast<size_t>(fs / opt.f_min);
  if (buf.size() < win + lag_max) return {};

  double global_peak = 0.0;
  for (double v : buf.samples) global_peak = std::max(global_peak, std::fabs(v));
  const double silence_gate = 0.01 * global_peak;

  const size_t nfft = next_pow2(win + lag_max + 1);
  std::vector<std::complex<double>> fa(nfft), fb(nfft);
  std::vector<double> prefix(win + lag_max + 1);
  std::vector<double> nacf(lag_max + 1, 0.0);

  std::vector<double> f0s;
  for (size_t start = 0; start + win + lag_max <= buf.size(); start += hop) {
    const double* x = buf.samples.data() + start;
    prefix[0] = 0.0;
    for (size_t i = 0; i < win + lag_max; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];
    const double e0 = prefix[win];
    if (e0 <= 0.0 || std::sqrt(e0 / win) < silence_gate) continue;

    std::fill(fa.begin(), fa.end(), std::complex<double>{0.0, 0.0});
    std::fill(fb.begin(), fb.end(), std::complex<double>{0.0, 0.0});
    for (size_t i = 0; i < win; ++i) fa[i] = {x[i], 0.0};
    for (size_t i = 0; i < win + lag_max; ++i) fb[i] = {x[i], 0.0};
    fft_inplace(fa);
    fft_inplace(fb);
    for (size_t i = 0; i < nfft; ++i) fa[i] = std::conj(fa[i]) * fb[i];
    fft_inplace(fa, /*inverse=*/true);

    double best = 0.0;
    for (size_t lag = lag_min; lag <= lag_max; ++lag) {
      const double e1 = prefix[lag + win] - prefix[lag];
      nacf[lag] = e1 > 0.0 ? fa[lag].real() / std::sqrt(e0 * e1) : 0.0;
      best = std::max(best, nacf[lag]);
    }
    if (best < opt.voicing_threshold) continue;

    size_t pick = 0;
    for (size_t lag = lag_min; lag <= lag_max; ++lag) {
      const bool is_peak = (lag > lag_min && lag < lag_max)
                               ? (nacf[lag] >= nacf[lag - 1] && nacf[lag] >= nacf[lag + 1])
                               : true;
      if (is_peak && nacf[lag] >= 0.9 * best) {
        pick = lag;
        break;
      }
    }
    if (pick == 0) continue;
    // parabolic refinement around the integer lag
    double lag_refined = static_cast<double>(pick);
    if (pick > lag_min && pick < lag_max) {
      const double y0 = nacf[pick - 1], y1 = nacf[pick], y2 = nacf[pick + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      if (std::fabs(denom) > 1e-12) lag_refined += 0.5 * (y0 - y2) / denom;
    }
    f0s.push_back(fs / lag_refined);
  }
  return f0s;
}

// Geometric mean F0 over voiced frames.
inline double estimate_f0_geomean(const AudioBuffer& buf, const F0Options& opt = {}) {
  const auto f0s = f0_track(buf, opt);
  if (f0s.empty()) throw UnvoicedInputError("estimate_f0_geomean: no voiced frames");
  double log_sum = 0.0;
  for (double f : f0s) log_sum += std::log(f);
  return std::exp(log_sum / static_cast<double>(f0s.size()));
}

}  // namespace gesi

#endif  // GESI_F0_HPP_
