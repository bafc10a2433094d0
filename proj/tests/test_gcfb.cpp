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

#include <cmath>

#include "doctest.h"
#include "gesi/erb.hpp"
#include "gesi/gcfb.hpp"
#include "gesi/hearing.hpp"
#include "test_support.hpp"

using namespace gesi;
namespace ts = test_support;

TEST_CASE("erb_bandwidth golden values") {
  // oracle: 24.7 * (4.37 * f / 1000 + 1)
  CHECK(erb_bandwidth(1000.0) == doctest::Approx(132.639).epsilon(1e-9));
  CHECK(erb_bandwidth(4000.0) == doctest::Approx(24.7 * (4.37 * 4.0 + 1.0)).epsilon(1e-12));
  CHECK(erb_bandwidth(4000.0) == doctest::Approx(456.456).epsilon(1e-6));
  CHECK(erb_bandwidth(1e-9) == doctest::Approx(24.7).epsilon(1e-6));
  CHECK_THROWS_AS(erb_bandwidth(0.0), Error);
  CHECK_THROWS_AS(erb_bandwidth(-100.0), Error);
}

TEST_CASE("erb_rate round trip") {
  for (double f : {100.0, 440.0, 1000.0, 4000.0, 8000.0})
    CHECK(erb_rate_to_hz(erb_rate(f)) == doctest::Approx(f).epsilon(1e-10));
}

TEST_CASE("channel peak frequencies are equally spaced on the ERB-rate scale") {
  FilterbankSpec spec;
  const auto freqs = spec.channel_freqs();
  REQUIRE(static_cast<int>(freqs.size()) == spec.n_channels);
  CHECK(freqs.front() == doctest::Approx(100.0));
  CHECK(freqs.back() == doctest::Approx(8000.0));
  const double step = erb_rate(freqs[1]) - erb_rate(freqs[0]);
  for (size_t i = 1; i < freqs.size(); ++i) {
    CHECK(freqs[i] > freqs[i - 1]);
    CHECK(std::fabs((erb_rate(freqs[i]) - erb_rate(freqs[i - 1])) - step) <= 1e-6);
  }
}

TEST_CASE("FilterbankSpec validation") {
  FilterbankSpec bad;
  bad.n_channels = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = FilterbankSpec{};
  bad.f_max = 30000.0;  // above Nyquist
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = FilterbankSpec{};
  bad.frame_rate = 1777;  // does not divide 48000
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("io_function pinned values") {
  const HearingProfile nh = normal_hearing_profile();
  SUBCASE("knee is a fixed point for normal hearing") {
    CHECK(io_function(30.0, 1000.0, nh) == doctest::Approx(30.0).epsilon(1e-12));
  }
  SUBCASE("compression exponent 0.5 above the knee") {
    CHECK(io_function(50.0, 1000.0, nh) == doctest::Approx(40.0).epsilon(1e-12));
  }
  SUBCASE("70yr at 4 kHz: recruitment endpoints") {
    const HearingProfile p70 = preset_profile("70yr");
    // attenuation at the ceiling equals the passive third of the loss
    const double att_at_ceiling = io_normal(100.0) - io_function(100.0, 4000.0, p70);
    CHECK(att_at_ceiling == doctest::Approx(43.0 / 3.0).epsilon(1e-9));
    // at 80 dB SPL the reduction sits strictly between HL_pas and HL
    const double att80 = io_normal(80.0) - io_function(80.0, 4000.0, p70);
    CHECK(att80 > 43.0 / 3.0);
    CHECK(att80 < 43.0);
    // attenuation grows monotonically toward the full loss as level drops
    double prev = att_at_ceiling;
    for (double level = 95.0; level >= 0.0; level -= 5.0) {
      const double att = io_normal(level) - io_function(level, 4000.0, p70);
      CHECK(att >= prev - 1e-12);
      CHECK(att <= 43.0 + 1e-12);
      prev = att;
    }
  }
  SUBCASE("cf domain errors") {
    CHECK_THROWS_AS(io_function(50.0, 0.0, nh), Error);
    FilterbankSpec spec;
    CHECK_THROWS_AS(io_function_checked(50.0, 9000.0, nh, spec), Error);
    CHECK_NOTHROW(io_function_checked(50.0, 1000.0, nh, spec));
  }
}

TEST_CASE("io_function properties") {
  SUBCASE("monotone non-decreasing in level for every alpha and HL") {
    for (double hl : {0.0, 20.0, 43.0, 70.0}) {
      for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        HearingProfile p;
        p.audiogram = {{125.0, hl}, {8000.0, hl}};
        p.compression_health = alpha;
        double prev = io_function(0.0, 1000.0, p);
        for (double level = 1.0; level <= 110.0; level += 1.0) {
          const double out = io_function(level, 1000.0, p);
          CHECK(out >= prev - 1e-12);
          prev = out;
        }
      }
    }
  }
  SUBCASE("10 dB in, 5 dB out between knee and ceiling at NH") {
    const HearingProfile nh = normal_hearing_profile();
    for (double level = 30.0; level <= 90.0; level += 5.0) {
      const double gain = io_function(level + 10.0, 1000.0, nh) -
                          io_function(level, 1000.0, nh);
      CHECK(std::fabs(gain - 5.0) <= 1e-9);
    }
  }
  SUBCASE("lower alpha never lowers the slope in the recruitment region") {
    HearingProfile p;
    p.audiogram = {{125.0, 43.0}, {8000.0, 43.0}};
    // below ~43 dB SPL the alpha = 0 curve has already saturated at the
    // full loss, so the recruitment region under test starts above that
    for (double level = 45.0; level <= 95.0; level += 5.0) {
      double prev_slope = -1.0;
      for (double alpha : {1.0, 0.75, 0.5, 0.25, 0.0}) {
        p.compression_health = alpha;
        const double slope = io_function(level + 1.0, 1000.0, p) -
                             io_function(level, 1000.0, p);
        CHECK(slope >= prev_slope - 1e-12);
        prev_slope = slope;
      }
    }
  }
  SUBCASE("zero audiogram is transparent for every alpha") {
    HearingProfile p;
    p.audiogram = {{125.0, 0.0}, {8000.0, 0.0}};
    for (double alpha : {0.0, 0.5, 1.0}) {
      p.compression_health = alpha;
      for (double level = 0.0; level <= 110.0; level += 10.0)
        CHECK(io_function(level, 1000.0, p) ==
              doctest::Approx(io_normal(level)).epsilon(1e-12));
    }
  }
}

TEST_CASE("audiogram interpolation is linear in log frequency and clamped") {
  const HearingProfile p70 = preset_profile("70yr");
  // geometric midpoint of 2000 (19 dB) and 4000 (43 dB)
  CHECK(p70.hearing_level_db(std::sqrt(2000.0 * 4000.0)) ==
        doctest::Approx(0.5 * (19.0 + 43.0)).epsilon(1e-9));
  CHECK(p70.hearing_level_db(50.0) == doctest::Approx(8.0));
  CHECK(p70.hearing_level_db(16000.0) == doctest::Approx(59.0));
}

TEST_CASE("HearingProfile validation") {
  HearingProfile p;
  p.audiogram = {{1000.0, 10.0}, {500.0, 10.0}};
  CHECK_THROWS_AS(p.validate(), Error);
  p.audiogram = {{500.0, -3.0}};
  CHECK_THROWS_AS(p.validate(), Error);
  p.audiogram = {{500.0, 3.0}};
  p.compression_health = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("profile text serialization round trip") {
  const HearingProfile p = preset_profile("80yr");
  const HearingProfile q = profile_from_text(profile_to_text(p));
  CHECK(q.compression_health == doctest::Approx(0.5));
  REQUIRE(q.audiogram.size() == p.audiogram.size());
  for (size_t i = 0; i < p.audiogram.size(); ++i) {
    CHECK(q.audiogram[i].first == doctest::Approx(p.audiogram[i].first));
    CHECK(q.audiogram[i].second == doctest::Approx(p.audiogram[i].second));
  }
}

TEST_CASE("analyze: tone lands in the matching channel") {
  const Filterbank& bank = ts::shared_bank();
  const AudioBuffer tone = ts::sine(1000.0, 0.1, 0.5);
  const ExcitationPattern ep = bank.excitation_pattern(tone, nullptr);
  int best = 0;
  double best_level = -1e300;
  for (int ch = 0; ch < bank.num_channels(); ++ch) {
    double m = 0.0;
    for (double v : ep.levels[ch]) m += v;
    if (m > best_level) {
      best_level = m;
      best = ch;
    }
  }
  CHECK(std::fabs(erb_rate(bank.peak_freqs()[best]) - erb_rate(1000.0)) <= 1.0);
}

TEST_CASE("analyze: band level within 1 dB of tone SPL at the matching channel") {
  const Filterbank& bank = ts::shared_bank();
  AudioBuffer tone = ts::sine(bank.peak_freqs()[50], 0.1, 0.5);  // 80 dB SPL
  const auto z = bank.filter_channel(tone.samples, 50);
  const auto levels = bank.level_track_db(z, tone.spl_ref);
  CHECK(std::fabs(levels[levels.size() / 2] - 80.0) <= 1.0);
}

TEST_CASE("analyze: silence floors, superposition peaks, error paths") {
  FilterbankSpec spec;
  spec.n_channels = 32;  // keep the free-function path light
  SUBCASE("silence reports the floor everywhere") {
    AudioBuffer quiet;
    quiet.sample_rate = 48000;
    quiet.samples.assign(4800, 0.0);
    const auto res = analyze(quiet, spec, nullptr);
    for (const auto& row : res.ep.levels)
      for (double v : row) CHECK(v == doctest::Approx(spec.level_floor_db_spl));
  }
  SUBCASE("two tones give two local maxima at the right channels") {
    AudioBuffer two = ts::sine(500.0, 0.05, 0.5);
    const AudioBuffer hi = ts::sine(4000.0, 0.05, 0.5);
    for (size_t i = 0; i < two.size(); ++i) two.samples[i] += hi.samples[i];
    const auto res = analyze(two, spec, nullptr);
    std::vector<double> mean_level(res.ep.levels.size(), 0.0);
    for (size_t ch = 0; ch < res.ep.levels.size(); ++ch) {
      for (double v : res.ep.levels[ch]) mean_level[ch] += v;
      mean_level[ch] /= res.ep.levels[ch].size();
    }
    int peaks = 0;
    for (size_t ch = 1; ch + 1 < mean_level.size(); ++ch) {
      if (mean_level[ch] > mean_level[ch - 1] && mean_level[ch] >= mean_level[ch + 1] &&
          mean_level[ch] > spec.level_floor_db_spl + 20.0) {
        ++peaks;
        const double cf = res.ep.peak_freqs[ch];
        const bool near_500 = std::fabs(erb_rate(cf) - erb_rate(500.0)) <= 1.0;
        const bool near_4k = std::fabs(erb_rate(cf) - erb_rate(4000.0)) <= 1.0;
        CHECK((near_500 || near_4k));
      }
    }
    CHECK(peaks == 2);
  }
  SUBCASE("sample-rate mismatch and empty input") {
    AudioBuffer wrong = ts::sine(440.0, 0.1, 0.1, 44100);
    CHECK_THROWS_AS(analyze(wrong, spec, nullptr), SampleRateMismatchError);
    AudioBuffer empty;
    empty.sample_rate = 48000;
    CHECK_THROWS_AS(analyze(empty, spec, nullptr), Error);
  }
}

TEST_CASE("excitation pattern applies the IO curve when a profile is given") {
  FilterbankSpec spec;
  spec.n_channels = 16;
  const HearingProfile nh = normal_hearing_profile();
  const AudioBuffer tone = ts::sine(1000.0, 0.1, 0.3);  // 80 dB SPL
  const auto raw = analyze(tone, spec, nullptr);
  const auto mapped = analyze(tone, spec, &nh);
  for (size_t ch = 0; ch < raw.ep.levels.size(); ++ch) {
    const double cf = raw.ep.peak_freqs[ch];
    for (size_t t = 0; t < raw.ep.levels[ch].size(); ++t) {
      const double expect = std::max(io_function(raw.ep.levels[ch][t], cf, nh),
                                     spec.level_floor_db_spl);
      CHECK(mapped.ep.levels[ch][t] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}
