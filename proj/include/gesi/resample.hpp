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

#ifndef GESI_RESAMPLE_HPP_
#define GESI_RESAMPLE_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <tuple>
#include <vector>

#include "gesi/common.hpp"

namespace gesi {

namespace detail {

inline double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

// Kaiser-windowed sinc prototype for a rational L/M resampler.
// beta = 10 puts the stopband near -100 dB. The transition band runs from
// f_pass to f_stop (up-rate Hz).
inline std::vector<double> resample_kernel(int up, int fs_up, double f_pass_hz,
                                           double f_stop_hz, int* half_out) {
  const double a_db = 100.0;
  const double beta = 10.0;
  const double d_omega = kTwoPi * (f_stop_hz - f_pass_hz) / fs_up;
  int half = static_cast<int>(std::ceil((a_db - 7.95) / (2.285 * d_omega) / 2.0));
  if (half < 8) half = 8;
  const double fc = 0.5 * (f_pass_hz + f_stop_hz) / fs_up;  // cycles per up-rate sample
  std::vector<double> h(2 * half + 1);
  const double i0b = bessel_i0(beta);
  for (int k = -half; k <= half; ++k) {
    const double t = static_cast<double>(k);
    const double sinc = (k == 0) ? 2.0 * fc : std::sin(kTwoPi * fc * t) / (kPi * t);
    const double r = t / half;
    const double win = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    h[k + half] = up * sinc * win;
  }
  *half_out = half;
  return h;
}

struct CachedKernel {
  std::vector<double> h;
  int half = 0;
};

// Rate pairs repeat millions of times across a corpus run; the prototype is
// immutable once built, so share it.
inline const CachedKernel& cached_kernel(int up, int fs_up, double f_pass_hz,
                                         double f_stop_hz) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double, double>, std::unique_ptr<CachedKernel>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{up, fs_up, f_pass_hz, f_stop_hz}];
  if (!slot) {
    slot = std::make_unique<CachedKernel>();
    slot->h = resample_kernel(up, fs_up, f_pass_hz, f_stop_hz, &slot->half);
  }
  return *slot;
}

}  // namespace detail

// Polyphase rational-rate conversion with a >=90 dB stopband. When
// passband_hz > 0 only content below it is protected, which buys a much
// shorter kernel; the default guards the full output band.
inline std::vector<double> resample(const std::vector<double>& x, int fs_in, int fs_out,
                                    double passband_hz = 0.0) {
  if (fs_in <= 0 || fs_out <= 0) throw Error("resample: rates must be positive");
  if (fs_in == fs_out) return x;
  if (x.empty()) return {};
  const int g = std::gcd(fs_in, fs_out);
  const int up = fs_out / g;
  const int down = fs_in / g;
  const int fs_up = fs_in * up;
  const double nyq = 0.5 * std::min(fs_in, fs_out);
  double f_pass = 0.75 * nyq;
  double f_stop = nyq;
  if (passband_hz > 0.0 && passband_hz < 0.4 * std::min(fs_in, fs_out)) {
    const double margin = std::max(50.0, 0.1 * passband_hz);
    f_pass = passband_hz + margin;
    f_stop = std::min(fs_in, fs_out) - f_pass;
    if (f_stop <= f_pass) {
      f_pass = 0.75 * nyq;
      f_stop = nyq;
    }
  }
  const auto& kernel = detail::cached_kernel(up, fs_up, f_pass, f_stop);
  const std::vector<double>& h = kernel.h;
  const int half = kernel.half;

  const int64_t n_in = static_cast<int64_t>(x.size());
  const int64_t n_out = (n_in * up + down - 1) / down;
  std::vector<double> y(static_cast<size_t>(n_out), 0.0);
  for (int64_t n = 0; n < n_out; ++n) {
    const int64_t center = n * down;  // position on the up-rate grid
    const int64_t lo = center - half;
    int64_t m_lo = lo <= 0 ? 0 : (lo + up - 1) / up;
    int64_t m_hi = (center + half) / up;
    if (m_hi >= n_in) m_hi = n_in - 1;
    double acc = 0.0;
    for (int64_t m = m_lo; m <= m_hi; ++m) {
      const int64_t j = center - m * up;
      acc += x[static_cast<size_t>(m)] * h[static_cast<size_t>(j + half)];
    }
    y[static_cast<size_t>(n)] = acc;
  }
  return y;
}

}  // namespace gesi

#endif  // GESI_RESAMPLE_HPP_
