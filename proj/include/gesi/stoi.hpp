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

#ifndef GESI_STOI_HPP_
#define GESI_STOI_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gesi/audio.hpp"
#include "gesi/common.hpp"
#include "gesi/fft.hpp"
#include "gesi/resample.hpp"

namespace gesi {

enum class BaselineMethod { kStoi, kEstoi };

struct BaselineScore {
  BaselineMethod method = BaselineMethod::kStoi;
  double value = 0.0;
};

namespace stoi_detail {

inline constexpr int kModelFs = 10000;
inline constexpr int kFrameLen = 256;
inline constexpr int kHop = 128;
inline constexpr int kNfft = 512;
inline constexpr int kNumBands = 15;
inline constexpr double kBandStartHz = 150.0;
inline constexpr int kSegLen = 30;        // 384 ms at the model rate
inline constexpr double kVadRangeDb = 40.0;
inline constexpr double kSdrClipDb = -15.0;

inline std::vector<double> hann_periodic(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(kTwoPi * i / n));
  return w;
}

// Drops frames where the reference is more than kVadRangeDb below its own
// maximum; both signals are rebuilt by overlap-add of the kept frames.
inline void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const auto w = hann_periodic(kFrameLen);
  const size_t n_frames =
      x.size() >= kFrameLen ? (x.size() - kFrameLen) / kHop + 1 : 0;
  std::vector<double> energy_db(n_frames);
  double max_db = -1e300;
  for (size_t f = 0; f < n_frames; ++f) {
    double e = 0.0;
    for (int i = 0; i < kFrameLen; ++i) {
      const double v = x[f * kHop + i] * w[i];
      e += v * v;
    }
    energy_db[f] = 10.0 * std::log10(std::max(e / kFrameLen, 1e-300));
    max_db = std::max(max_db, energy_db[f]);
  }
  std::vector<double> xs, ys;
  xs.assign(x.size(), 0.0);
  ys.assign(y.size(), 0.0);
  size_t count = 0;
  for (size_t f = 0; f < n_frames; ++f) {
    if (energy_db[f] - max_db + kVadRangeDb <= 0.0) continue;
    const size_t out = count * kHop;
    for (int i = 0; i < kFrameLen; ++i) {
      xs[out + i] += x[f * kHop + i] * w[i];
      ys[out + i] += y[f * kHop + i] * w[i];
    }
    ++count;
  }
  const size_t kept = count > 0 ? (count - 1) * kHop + kFrameLen : 0;
  xs.resize(kept);
  ys.resize(kept);
  x = std::move(xs);
  y = std::move(ys);
}

// One-third-octave band envelopes: [band][frame].
inline std::vector<std::vector<double>> third_octave_bands(const std::vector<double>& x) {
  const auto w = hann_periodic(kFrameLen);
  const size_t n_frames =
      x.size() >= kFrameLen ? (x.size() - kFrameLen) / kHop + 1 : 0;
  std::vector<std::vector<double>> bands(kNumBands, std::vector<double>(n_frames, 0.0));

  std::vector<std::pair<int, int>> bin_range(kNumBands);
  for (int j = 0; j < kNumBands; ++j) {
    const double cf = kBandStartHz * std::pow(2.0, j / 3.0);
    const double lo = cf / std::pow(2.0, 1.0 / 6.0);
    const double hi = cf * std::pow(2.0, 1.0 / 6.0);
    const int k_lo = static_cast<int>(std::ceil(lo * kNfft / kModelFs));
    const int k_hi = std::min(static_cast<int>(std::ceil(hi * kNfft / kModelFs)),
                              kNfft / 2 + 1);
    bin_range[j] = {k_lo, k_hi};
  }

  std::vector<std::complex<double>> buf(kNfft);
  for (size_t f = 0; f < n_frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
    for (int i = 0; i < kFrameLen; ++i) buf[i] = {x[f * kHop + i] * w[i], 0.0};
    fft_inplace(buf);
    for (int j = 0; j < kNumBands; ++j) {
      double e = 0.0;
      for (int k = bin_range[j].first; k < bin_range[j].second; ++k)
        e += std::norm(buf[k]);
      bands[j][f] = std::sqrt(e);
    }
  }
  return bands;
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double dot = 0.0, ea = 0.0, eb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    dot += da * db;
    ea += da * da;
    eb += db * db;
  }
  if (ea <= 0.0 || eb <= 0.0) return 0.0;
  return dot / std::sqrt(ea * eb);
}

// Shared front: resample to 10 kHz, trim, silence checks, VAD, band split.
inline void decompose(const AudioBuffer& ref, const AudioBuffer& test,
                      std::vector<std::vector<double>>& bx,
                      std::vector<std::vector<double>>& by,
                      double duration_tolerance_s = 0.1) {
  if (ref.sample_rate != test.sample_rate)
    throw SampleRateMismatchError("stoi: sample rates differ");
  if (ref.empty() || test.empty()) throw Error("stoi: empty input");
  if (std::fabs(ref.duration_s() - test.duration_s()) > duration_tolerance_s)
    throw DurationMismatchError("stoi: duration mismatch beyond tolerance");
  if (rms(ref) == 0.0 || rms(test) == 0.0)
    throw SilentSignalError("stoi: silent input");

  std::vector<double> x = resample(ref.samples, ref.sample_rate, kModelFs);
  std::vector<double> y = resample(test.samples, test.sample_rate, kModelFs);
  const size_t n = std::min(x.size(), y.size());
  x.resize(n);
  y.resize(n);
  remove_silent_frames(x, y);
  bx = third_octave_bands(x);
  by = third_octave_bands(y);
  const size_t m = bx.empty() ? 0 : bx[0].size();
  if (m < kSegLen)
    throw Error("stoi: active signal shorter than one 384 ms segment");
}

}  // namespace stoi_detail

// Short-time objective intelligibility: clipped, normalized correlation of
// one-third-octave band envelopes over 384 ms segments.
inline BaselineScore stoi(const AudioBuffer& ref, const AudioBuffer& test) {
  using namespace stoi_detail;
  std::vector<std::vector<double>> bx, by;
  decompose(ref, test, bx, by);
  const size_t m_total = bx[0].size();
  const double clip = std::pow(10.0, -kSdrClipDb / 20.0);  // 10^(15/20)

  double sum = 0.0;
  size_t cells = 0;
  std::vector<double> xs(kSegLen), ys(kSegLen);
  for (size_t m = kSegLen; m <= m_total; ++m) {
    for (int j = 0; j < kNumBands; ++j) {
      double ex = 0.0, ey = 0.0;
      for (int i = 0; i < kSegLen; ++i) {
        xs[i] = bx[j][m - kSegLen + i];
        ys[i] = by[j][m - kSegLen + i];
        ex += xs[i] * xs[i];
        ey += ys[i] * ys[i];
      }
      if (ey > 0.0) {
        const double alpha = std::sqrt(ex / ey);
        for (int i = 0; i < kSegLen; ++i)
          ys[i] = std::min(alpha * ys[i], (1.0 + clip) * xs[i]);
      }
      sum += correlation(xs, ys);
      ++cells;
    }
  }
  return {BaselineMethod::kStoi, sum / static_cast<double>(cells)};
}

// Extended STOI: rows (bands) then columns (frames) of each segment are
// mean/variance normalized and compared; robust to modulated maskers.
inline BaselineScore estoi(const AudioBuffer& ref, const AudioBuffer& test) {
  using namespace stoi_detail;
  std::vector<std::vector<double>> bx, by;
  decompose(ref, test, bx, by);
  const size_t m_total = bx[0].size();

  auto normalize_rows = [](std::vector<std::vector<double>>& seg) {
    for (auto& row : seg) {
      double m = 0.0;
      for (double v : row) m += v;
      m /= row.size();
      double norm = 0.0;
      for (double& v : row) {
        v -= m;
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (double& v : row) v /= norm;
      else
        for (double& v : row) v = 0.0;
    }
  };
  auto normalize_cols = [](std::vector<std::vector<double>>& seg) {
    const size_t rows = seg.size(), cols = seg[0].size();
    for (size_t n = 0; n < cols; ++n) {
      double m = 0.0;
      for (size_t j = 0; j < rows; ++j) m += seg[j][n];
      m /= rows;
      double norm = 0.0;
      for (size_t j = 0; j < rows; ++j) {
        seg[j][n] -= m;
        norm += seg[j][n] * seg[j][n];
      }
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (size_t j = 0; j < rows; ++j) seg[j][n] /= norm;
      else
        for (size_t j = 0; j < rows; ++j) seg[j][n] = 0.0;
    }
  };

  double sum = 0.0;
  size_t count = 0;
  for (size_t m = kSegLen; m <= m_total; ++m) {
    std::vector<std::vector<double>> xs(kNumBands, std::vector<double>(kSegLen));
    std::vector<std::vector<double>> ys(kNumBands, std::vector<double>(kSegLen));
    for (int j = 0; j < kNumBands; ++j)
      for (int i = 0; i < kSegLen; ++i) {
        xs[j][i] = bx[j][m - kSegLen + i];
        ys[j][i] = by[j][m - kSegLen + i];
      }
    normalize_rows(xs);
    normalize_rows(ys);
    normalize_cols(xs);
    normalize_cols(ys);
    double d = 0.0;
    for (int j = 0; j < kNumBands; ++j)
      for (int i = 0; i < kSegLen; ++i) d += xs[j][i] * ys[j][i];
    sum += d / kSegLen;
    ++count;
  }
  return {BaselineMethod::kEstoi, sum / static_cast<double>(count)};
}

inline std::string baseline_method_name(BaselineMethod m) {
  return m == BaselineMethod::kStoi ? "stoi" : "estoi";
}

}  // namespace gesi

#endif  // GESI_STOI_HPP_
