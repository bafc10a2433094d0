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

#ifndef GESI_MODENV_HPP_
#define GESI_MODENV_HPP_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "gesi/biquad.hpp"
#include "gesi/common.hpp"
#include "gesi/resample.hpp"

namespace gesi {

inline const std::vector<double>& default_modband_centers() {
  static const std::vector<double> centers = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
  return centers;
}

// Channel envelopes band-split by the modulation filterbank:
// values[channel][band][frame], non-negative magnitudes.
struct ModulationRepresentation {
  std::vector<std::vector<std::vector<double>>> values;
  std::vector<double> modband_centers;
  int env_rate = 2000;

  size_t n_channels() const { return values.size(); }
  size_t n_bands() const { return values.empty() ? 0 : values[0].size(); }
  size_t n_frames() const {
    return n_bands() == 0 ? 0 : values[0][0].size();
  }
};

// Half-wave rectification, second-order low-pass at 150 Hz, polyphase
// decimation to env_rate. Output clamped non-negative.
inline std::vector<double> extract_envelope(const std::vector<double>& channel_signal,
                                            int fs, int env_rate = 2000,
                                            double lpf_hz = 150.0) {
  if (channel_signal.empty()) throw Error("extract_envelope: empty input");
  if (env_rate <= 0 || env_rate > fs) throw Error("extract_envelope: bad env_rate");
  std::vector<double> rectified(channel_signal.size());
  for (size_t i = 0; i < channel_signal.size(); ++i)
    rectified[i] = channel_signal[i] > 0.0 ? channel_signal[i] : 0.0;
  Biquad lpf = butterworth_lowpass(lpf_hz, fs);
  std::vector<double> smoothed;
  lpf.process(rectified, smoothed);
  std::vector<double> env = resample(smoothed, fs, env_rate, lpf_hz);
  for (double& v : env)
    if (v < 0.0) v = 0.0;
  return env;
}

// IIR modulation filterbank. The first center is realized as a second-order
// low-pass at that cutoff; the remaining bands are two cascaded second-order
// band-pass sections with Q = 1, which keeps adjacent octave bands more than
// 6 dB apart at their centers. Outputs are signed band signals.
inline std::vector<std::vector<double>> modulation_filterbank(
    const std::vector<double>& envelope, int env_rate,
    const std::vector<double>& centers = default_modband_centers()) {
  if (centers.empty()) throw Error("modulation_filterbank: no band centers");
  for (size_t j = 0; j < centers.size(); ++j) {
    if (centers[j] >= env_rate / 2.0)
      throw Error("modulation_filterbank: center at or above Nyquist");
    if (j > 0 && centers[j] <= centers[j - 1])
      throw Error("modulation_filterbank: centers must be strictly increasing");
  }
  std::vector<std::vector<double>> bands(centers.size());
  {
    Biquad lpf = butterworth_lowpass(centers[0], env_rate);
    lpf.process(envelope, bands[0]);
  }
  for (size_t j = 1; j < centers.size(); ++j) {
    Biquad bp1 = bandpass_peak(centers[j], env_rate, 1.0);
    Biquad bp2 = bandpass_peak(centers[j], env_rate, 1.0);
    std::vector<double> tmp;
    bp1.process(envelope, tmp);
    bp2.process(tmp, bands[j]);
  }
  return bands;
}

// Envelope extraction followed by the modulation filterbank for every
// auditory channel; stores band magnitudes.
inline ModulationRepresentation modulation_decompose(
    const std::vector<std::vector<double>>& channel_signals, int fs,
    int env_rate = 2000,
    const std::vector<double>& centers = default_modband_centers()) {
  ModulationRepresentation rep;
  rep.modband_centers = centers;
  rep.env_rate = env_rate;
  rep.values.resize(channel_signals.size());
  for (size_t ch = 0; ch < channel_signals.size(); ++ch) {
    const auto env = extract_envelope(channel_signals[ch], fs, env_rate);
    auto bands = modulation_filterbank(env, env_rate, centers);
    rep.values[ch].resize(bands.size());
    for (size_t j = 0; j < bands.size(); ++j) {
      rep.values[ch][j].resize(bands[j].size());
      for (size_t t = 0; t < bands[j].size(); ++t)
        rep.values[ch][j][t] = std::fabs(bands[j][t]);
    }
  }
  return rep;
}

// Flat binary dump: magic, dimensions, rates, centers, then doubles in
// [channel][band][frame] order.
inline void dump_modulation(const std::string& path, const ModulationRepresentation& rep) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("dump_modulation: cannot open " + path);
  const char magic[8] = {'G', 'E', 'S', 'I', 'M', 'O', 'D', 'T'};
  out.write(magic, 8);
  const uint32_t dims[3] = {static_cast<uint32_t>(rep.n_channels()),
                            static_cast<uint32_t>(rep.n_bands()),
                            static_cast<uint32_t>(rep.n_frames())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const double rate = rep.env_rate;
  out.write(reinterpret_cast<const char*>(&rate), sizeof(rate));
  for (double c : rep.modband_centers)
    out.write(reinterpret_cast<const char*>(&c), sizeof(c));
  for (const auto& ch : rep.values)
    for (const auto& band : ch)
      out.write(reinterpret_cast<const char*>(band.data()),
                static_cast<std::streamsize>(band.size() * sizeof(double)));
}

inline ModulationRepresentation load_modulation(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_modulation: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "GESIMODT", 8) != 0)
    throw FormatError("load_modulation: bad magic");
  uint32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  double rate = 0.0;
  in.read(reinterpret_cast<char*>(&rate), sizeof(rate));
  ModulationRepresentation rep;
  rep.env_rate = static_cast<int>(rate);
  rep.modband_centers.resize(dims[1]);
  for (auto& c : rep.modband_centers)
    in.read(reinterpret_cast<char*>(&c), sizeof(c));
  rep.values.assign(dims[0], std::vector<std::vector<double>>(
                                 dims[1], std::vector<double>(dims[2])));
  for (auto& ch : rep.values)
    for (auto& band : ch)
      in.read(reinterpret_cast<char*>(band.data()),
              static_cast<std::streamsize>(band.size() * sizeof(double)));
  if (!in) throw FormatError("load_modulation: truncated file");
  return rep;
}

}  // namespace gesi

#endif  // GESI_MODENV_HPP_
