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

#ifndef GESI_HLSIM_HPP_
#define GESI_HLSIM_HPP_

#include <cmath>
#include <optional>
#include <vector>

#include "gesi/audio.hpp"
#include "gesi/common.hpp"
#include "gesi/gcfb.hpp"
#include "gesi/hearing.hpp"

namespace gesi {

struct HlSimConfig {
  HearingProfile profile;
  double gain_smoothing_ms = 16.0;
  double gain_floor_db = -80.0;
  FilterbankSpec fb;

  void validate() const {
    if (gain_smoothing_ms <= 0.0) throw Error("HlSimConfig: smoothing must be positive");
    if (gain_floor_db >= 0.0) throw Error("HlSimConfig: gain floor must be negative");
    profile.validate();
    fb.validate();
  }
};

// Simulated hearing-loss synthesis: analyze with the normal-hearing
// filterbank, drive per-channel time-varying gains from the difference
// between the impaired and normal IO curves, and resynthesize with
// group-delay compensation. Output duration equals input duration.
inline AudioBuffer simulate_hl(const AudioBuffer& buf, const HlSimConfig& cfg,
                               const Filterbank* shared_bank = nullptr) {
  cfg.validate();
  if (buf.empty()) throw Error("simulate_hl: empty input");
  if (rms(buf) == 0.0) throw SilentSignalError("simulate_hl: silent input");

  std::optional<Filterbank> local;
  if (shared_bank == nullptr) local.emplace(cfg.fb);
  const Filterbank& bank = shared_bank != nullptr ? *shared_bank : *local;
  bank.check_input(buf);

  const size_t n = buf.size();
  std::vector<double> acc(n + static_cast<size_t>(bank.synthesis_latency()), 0.0);
  for (int ch = 0; ch < bank.num_channels(); ++ch) {
    auto z = bank.filter_channel(buf.samples, ch);
    const auto levels = bank.level_track_db(z, buf.spl_ref);
    const auto gains =
        bank.io_gain_track_db(levels, ch, cfg.profile, IoGainRule::kRelativeToNh);
    bank.apply_gain_track(z, gains, cfg.gain_smoothing_ms, cfg.gain_floor_db);
    bank.add_synthesized(ch, z, acc);
  }

  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  out.spl_ref = buf.spl_ref;
  out.samples.assign(acc.begin() + bank.synthesis_latency(), acc.end());
  out.samples.resize(n, 0.0);
  return out;
}

}  // namespace gesi

#endif  // GESI_HLSIM_HPP_
