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

#ifndef GESI_ERB_HPP_
#define GESI_ERB_HPP_

#include <cmath>

#include "gesi/common.hpp"

namespace gesi {

// Glasberg & Moore ERB scale. erb_rate is in Cams.

inline double erb_bandwidth(double freq_hz) {
  if (freq_hz <= 0.0) throw Error("erb_bandwidth: frequency must be positive");
  return 24.7 * (4.37 * freq_hz / 1000.0 + 1.0);
}

inline double erb_rate(double freq_hz) {
  if (freq_hz <= 0.0) throw Error("erb_rate: frequency must be positive");
  return 21.4 * std::log10(4.37 * freq_hz / 1000.0 + 1.0);
}

inline double erb_rate_to_hz(double cams) {
  return (std::pow(10.0, cams / 21.4) - 1.0) * 1000.0 / 4.37;
}

}  // namespace gesi

#endif  // GESI_ERB_HPP_
