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

#ifndef GESI_HEARING_HPP_
#define GESI_HEARING_HPP_

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gesi/common.hpp"

namespace gesi {

// Audiogram (frequency -> dB HL) plus compression health alpha.
// alpha = 1: residual compression fully intact; alpha = 0: fully linearized
// input-output function (complete recruitment).
struct HearingProfile {
  std::vector<std::pair<double, double>> audiogram;  // (Hz, dB HL), increasing Hz
  double compression_health = 1.0;

  void validate() const {
    if (compression_health < 0.0 || compression_health > 1.0)
      throw Error("HearingProfile: compression_health outside [0,1]");
    for (size_t i = 0; i < audiogram.size(); ++i) {
      if (audiogram[i].second < 0.0)
        throw Error("HearingProfile: hearing level must be >= 0 dB HL");
      if (i > 0 && audiogram[i].first <= audiogram[i - 1].first)
        throw Error("HearingProfile: audiogram frequencies must be strictly increasing");
    }
  }

  bool is_normal() const {
    for (const auto& [f, hl] : audiogram)
      if (hl != 0.0) return false;
    return true;
  }

  // Hearing level at an arbitrary frequency: linear in log-frequency
  // between audiogram points, clamped at the endpoints.
  double hearing_level_db(double freq_hz) const {
    if (audiogram.empty()) return 0.0;
    if (freq_hz <= audiogram.front().first) return audiogram.front().second;
    if (freq_hz >= audiogram.back().first) return audiogram.back().second;
    for (size_t i = 1; i < audiogram.size(); ++i) {
      if (freq_hz <= audiogram[i].first) {
        const auto& [f0, h0] = audiogram[i - 1];
        const auto& [f1, h1] = audiogram[i];
        const double t = (std::log(freq_hz) - std::log(f0)) / (std::log(f1) - std::log(f0));
        return h0 + t * (h1 - h0);
      }
    }
    return audiogram.back().second;
  }
};

inline HearingProfile normal_hearing_profile() {
  HearingProfile p;
  p.audiogram = {{125.0, 0.0}, {8000.0, 0.0}};
  p.compression_health = 1.0;
  return p;
}

// Average hearing levels of 70- and 80-year-old listeners at audiometric
// octaves, compression health 0.5 (moderate dysfunction).
inline HearingProfile preset_profile(const std::string& name) {
  HearingProfile p;
  p.compression_health = 0.5;
  if (name == "70yr") {
    p.audiogram = {{125.0, 8.0},   {250.0, 8.0},   {500.0, 9.0},  {1000.0, 10.0},
                   {2000.0, 19.0}, {4000.0, 43.0}, {8000.0, 59.0}};
  } else if (name == "80yr") {
    p.audiogram = {{125.0, 24.0},  {250.0, 24.0},  {500.0, 27.0}, {1000.0, 28.0},
                   {2000.0, 33.0}, {4000.0, 48.0}, {8000.0, 69.0}};
  } else {
    throw Error("preset_profile: unknown preset '" + name + "' (use 70yr or 80yr)");
  }
  return p;
}

// Compressive input-output function constants (dB SPL).
inline constexpr double kIoKneeDbSpl = 30.0;
inline constexpr double kIoCeilingDbSpl = 100.0;
inline constexpr double kIoCompressionExponent = 0.5;

// Normal-hearing IO curve: linear below the knee and above the ceiling,
// compression exponent 0.5 in between.
inline double io_normal(double level_db_spl) {
  const double k = kIoKneeDbSpl;
  const double c = kIoCeilingDbSpl;
  if (level_db_spl <= k) return level_db_spl;
  if (level_db_spl >= c)
    return k + kIoCompressionExponent * (c - k) + (level_db_spl - c);
  return k + kIoCompressionExponent * (level_db_spl - k);
}

// Hearing-impaired IO curve. The loss splits into a compressive part
// HL_act = (2/3) HL and a linear part HL_pas = (1/3) HL. The passive part
// attenuates at all levels; the active part is fully present near threshold
// and recovers toward the ceiling, with a recovery rate set by the
// compression health: attenuation
//   att(L) = HL_pas + min(HL_act, max(0, (1 - alpha)/2 * (C - L))).
// alpha = 1 keeps the residual IO slope at the healthy 0.5; alpha = 0
// linearizes it completely. At L >= C the attenuation is HL_pas.
inline double io_impaired(double level_db_spl, double hearing_level_db,
                          double compression_health) {
  const double hl_act = 2.0 / 3.0 * hearing_level_db;
  const double hl_pas = hearing_level_db / 3.0;
  const double rate = 0.5 * (1.0 - compression_health);
  const double recovery = std::max(0.0, rate * (kIoCeilingDbSpl - level_db_spl));
  const double att = hl_pas + std::min(hl_act, recovery);
  return io_normal(level_db_spl) - att;
}

inline double io_function(double level_db_spl, double freq_hz, const HearingProfile& profile) {
  if (freq_hz <= 0.0) throw Error("io_function: frequency must be positive");
  profile.validate();
  return io_impaired(level_db_spl, profile.hearing_level_db(freq_hz),
                     profile.compression_health);
}

// --- structured-text serialization --------------------------------------

inline std::string profile_to_text(const HearingProfile& p) {
  std::ostringstream os;
  os << "alpha " << p.compression_health << "\n";
  for (const auto& [f, hl] : p.audiogram) os << f << " " << hl << "\n";
  return os.str();
}

inline HearingProfile profile_from_text(const std::string& text) {
  HearingProfile p;
  p.compression_health = 1.0;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "alpha") {
      ls >> p.compression_health;
    } else {
      double f = std::stod(first), hl = 0.0;
      ls >> hl;
      p.audiogram.emplace_back(f, hl);
    }
  }
  p.validate();
  return p;
}

}  // namespace gesi

#endif  // GESI_HEARING_HPP_
