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

#ifndef GESI_BIQUAD_HPP_
#define GESI_BIQUAD_HPP_

#include <cmath>
#include <complex>
#include <vector>

#include "gesi/common.hpp"

namespace gesi {

// Direct form II transposed second-order section.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
  double z1 = 0.0, z2 = 0.0;

  void reset() { z1 = z2 = 0.0; }

  double process(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }

  void process(const std::vector<double>& in, std::vector<double>& out) {
    out.resize(in.size());
    for (size_t i = 0; i < in.size(); ++i) out[i] = process(in[i]);
  }

  std::vector<double> filtered(const std::vector<double>& in) const {
    Biquad f = *this;
    f.reset();
    std::vector<double> out;
    f.process(in, out);
    return out;
  }

  std::complex<double> response(double freq_hz, double fs_hz) const {
    const std::complex<double> z = std::polar(1.0, -kTwoPi * freq_hz / fs_hz);
    return (b0 + (b1 + b2 * z) * z) / (1.0 + (a1 + a2 * z) * z);
  }
};

// Second-order Butterworth low-pass, bilinear transform, unity DC gain.
inline Biquad butterworth_lowpass(double cutoff_hz, double fs_hz) {
  if (cutoff_hz <= 0.0 || cutoff_hz >= fs_hz / 2.0)
    throw Error("butterworth_lowpass: cutoff out of range");
  const double k = std::tan(kPi * cutoff_hz / fs_hz);
  const double norm = 1.0 / (1.0 + std::sqrt(2.0) * k + k * k);
  Biquad f;
  f.b0 = k * k * norm;
  f.b1 = 2.0 * f.b0;
  f.b2 = f.b0;
  f.a1 = 2.0 * (k * k - 1.0) * norm;
  f.a2 = (1.0 - std::sqrt(2.0) * k + k * k) * norm;
  return f;
}

// Constant 0 dB peak-gain band-pass (RBJ cookbook).
inline Biquad bandpass_peak(double center_hz, double fs_hz, double q) {
  if (center_hz <= 0.0 || center_hz >= fs_hz / 2.0)
    throw Error("bandpass_peak: center out of range");
  const double w0 = kTwoPi * center_hz / fs_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad f;
  f.b0 = alpha / a0;
  f.b1 = 0.0;
  f.b2 = -alpha / a0;
  f.a1 = -2.0 * std::cos(w0) / a0;
  f.a2 = (1.0 - alpha) / a0;
  return f;
}

}  // namespace gesi

#endif  // GESI_BIQUAD_HPP_
