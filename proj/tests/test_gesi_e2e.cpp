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
#include "gesi/hlsim.hpp"
#include "gesi/metric.hpp"
#include "gesi/synth.hpp"
#include "test_support.hpp"

using namespace gesi;
namespace ts = test_support;

namespace {

GesiOptions shared_options() {
  GesiOptions opt;
  opt.bank = &ts::shared_bank();
  return opt;
}

}  // namespace

TEST_CASE("gesi end to end: self similarity") {
  const GesiOptions opt = shared_options();
  const GesiParams params;
  const GesiResult res = gesi_score(ts::speech(0), ts::speech(0), params, opt);
  CHECK(std::fabs(res.metric_d - 1.0) <= 1e-6);
  CHECK(res.intelligibility_pct ==
        doctest::Approx(intelligibility(res.metric_d, params.sigmoid_a, params.sigmoid_b)));
  CHECK(res.intelligibility_pct > 0.0);
  CHECK(res.intelligibility_pct < 100.0);
  // result invariants: d recomputable from the parts
  CHECK(res.metric_d ==
        doctest::Approx(metric(res.similarity_matrix, res.channel_weights,
                               res.modband_weights)).epsilon(1e-12));
}

TEST_CASE("gesi: -20 dB test with the front end bypassed is scale invariant at rho 0.5") {
  GesiOptions opt = shared_options();
  opt.compressive_frontend = false;
  GesiParams params;
  params.rho = 0.5;
  const AudioBuffer& ref = ts::speech(1);
  const AudioBuffer quiet = apply_gain_db(ref, -20.0);
  const double d_self = gesi_score(ref, ref, params, opt).metric_d;
  const double d_quiet = gesi_score(ref, quiet, params, opt).metric_d;
  CHECK(std::fabs(d_quiet - d_self) <= 1e-3);
}

TEST_CASE("gesi: rho above 0.5 penalizes the -20 dB condition") {
  const GesiOptions opt = shared_options();
  const AudioBuffer& ref = ts::speech(1);
  const AudioBuffer quiet = apply_gain_db(ref, -20.0);
  GesiParams p05;
  p05.rho = 0.5;
  GesiParams p06;
  p06.rho = 0.6;
  const double d05 = gesi_score(ref, quiet, p05, opt).metric_d;
  const double d06 = gesi_score(ref, quiet, p06, opt).metric_d;
  CHECK(d06 < d05);
}

TEST_CASE("gesi: metric drops monotonically with SNR") {
  const GesiOptions opt = shared_options();
  const GesiParams params;
  const AudioBuffer& ref = ts::speech(2);
  AudioBuffer noise = synth_babble(77, ref.duration_s() + 1.0);
  noise.spl_ref = ref.spl_ref;
  double prev = -1.0;
  for (double snr : {-3.0, 3.0, 9.0}) {
    const AudioBuffer mix = mix_at_snr(ref, noise, snr, 5);
    const double d = gesi_score(ref, mix, params, opt).metric_d;
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("gesi: deterministic") {
  const GesiOptions opt = shared_options();
  const GesiParams params;
  const AudioBuffer quiet = apply_gain_db(ts::speech(0), -12.0);
  const GesiResult a = gesi_score(ts::speech(0), quiet, params, opt);
  const GesiResult b = gesi_score(ts::speech(0), quiet, params, opt);
  CHECK(a.metric_d == b.metric_d);
}

TEST_CASE("gesi: duration handling") {
  const GesiOptions opt = shared_options();
  const GesiParams params;
  const AudioBuffer& ref = ts::speech(0);
  SUBCASE("mismatch within 100 ms is trimmed") {
    AudioBuffer longer = ref;
    longer.samples.resize(ref.size() + 48000 / 25, 0.0);  // +40 ms
    CHECK_NOTHROW(gesi_score(ref, longer, params, opt));
  }
  SUBCASE("mismatch beyond 100 ms is an error") {
    AudioBuffer longer = ref;
    longer.samples.resize(ref.size() + 48000 / 5, 0.0);  // +200 ms
    CHECK_THROWS_AS(gesi_score(ref, longer, params, opt), DurationMismatchError);
  }
}

TEST_CASE("gesi: error paths") {
  const GesiOptions opt = shared_options();
  const GesiParams params;
  const AudioBuffer& ref = ts::speech(0);
  AudioBuffer wrong_rate = ref;
  wrong_rate.sample_rate = 44100;
  CHECK_THROWS_AS(gesi_score(ref, wrong_rate, params, opt), SampleRateMismatchError);
  AudioBuffer silent = ref;
  std::fill(silent.samples.begin(), silent.samples.end(), 0.0);
  CHECK_THROWS_AS(gesi_score(ref, silent, params, opt), SilentSignalError);
  CHECK_THROWS_AS(gesi_score(silent, ref, params, opt), SilentSignalError);
}

TEST_CASE("gesi: listener-specific test profile is supported") {
  GesiOptions opt = shared_options();
  const GesiParams params;
  const AudioBuffer& ref = ts::speech(1);
  HlSimConfig hl;
  hl.profile = preset_profile("70yr");
  const AudioBuffer degraded = simulate_hl(ref, hl, &ts::shared_bank());
  const double d_nh = gesi_score(ref, degraded, params, opt).metric_d;
  opt.test_profile = preset_profile("70yr");
  const double d_listener = gesi_score(ref, degraded, params, opt).metric_d;
  CHECK(d_nh != d_listener);
  CHECK(d_listener > 0.0);
}

TEST_CASE("gesi: f0 override skips the reference estimate") {
  GesiOptions opt = shared_options();
  opt.f0_geomean_hz = 150.0;
  const GesiParams params;
  const GesiResult res = gesi_score(ts::speech(0), ts::speech(0), params, opt);
  CHECK(res.f0_geomean_hz == doctest::Approx(150.0));
}
