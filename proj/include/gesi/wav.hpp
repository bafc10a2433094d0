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

#ifndef GESI_WAV_HPP_
#define GESI_WAV_HPP_

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "gesi/audio.hpp"
#include "gesi/common.hpp"
#include "gesi/resample.hpp"

namespace gesi {

namespace detail {

inline uint32_t read_u32le(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline uint16_t read_u16le(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline void write_u32le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

inline void write_u16le(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

}  // namespace detail

// Reads 16- or 24-bit PCM WAV; stereo is averaged to mono. Anything else
// (8-bit, float, mu-law, compressed) is rejected. If target_fs > 0 the
// result is resampled on read.
inline AudioBuffer read_wav(const std::string& path, int target_fs = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_wav: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("read_wav: not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  size_t data_pos = 0, data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = detail::read_u32le(bytes.data() + pos + 4);
    const size_t body = pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0 && body + 16 <= bytes.size()) {
      format = detail::read_u16le(bytes.data() + body);
      channels = detail::read_u16le(bytes.data() + body + 2);
      sample_rate = detail::read_u32le(bytes.data() + body + 4);
      bits = detail::read_u16le(bytes.data() + body + 14);
      if (format == 0xfffe && len >= 40) {
        // WAVE_FORMAT_EXTENSIBLE: first two bytes of the SubFormat GUID
        format = detail::read_u16le(bytes.data() + body + 24);
      }
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_pos = body;
      data_len = std::min<size_t>(len, bytes.size() - body);
    }
    pos = body + len + (len & 1);  // chunks are word aligned
  }
  if (sample_rate == 0 || data_pos == 0)
    throw FormatError("read_wav: missing fmt or data chunk: " + path);
  if (format != 1)
    throw FormatError("read_wav: unsupported format (only PCM): " + path);
  if (bits != 16 && bits != 24)
    throw FormatError("read_wav: unsupported bit depth (only 16/24-bit PCM): " + path);
  if (channels == 0) throw FormatError("read_wav: zero channels: " + path);

  const size_t bytes_per_sample = bits / 8;
  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t n_frames = data_len / frame_bytes;

  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(sample_rate);
  buf.samples.resize(n_frames);
  const uint8_t* d = bytes.data() + data_pos;
  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (uint16_t c = 0; c < channels; ++c) {
      const uint8_t* s = d + i * frame_bytes + c * bytes_per_sample;
      if (bits == 16) {
        const auto v = static_cast<int16_t>(s[0] | (s[1] << 8));
        acc += v / 32768.0;
      } else {
        const uint32_t raw = static_cast<uint32_t>(s[0]) |
                             (static_cast<uint32_t>(s[1]) << 8) |
                             (static_cast<uint32_t>(s[2]) << 16);
        const int32_t v = static_cast<int32_t>(raw << 8) >> 8;  // sign extend
        acc += v / 8388608.0;
      }
    }
    buf.samples[i] = acc / channels;
  }
  if (target_fs > 0 && target_fs != buf.sample_rate) {
    buf.samples = resample(buf.samples, buf.sample_rate, target_fs);
    buf.sample_rate = target_fs;
  }
  return buf;
}

// PCM write, dither off, round to nearest. bits must be 16 or 24.
inline void write_wav(const std::string& path, const AudioBuffer& buf, int bits = 16) {
  if (bits != 16 && bits != 24) throw FormatError("write_wav: bits must be 16 or 24");
  const uint16_t channels = 1;
  const uint16_t block_align = static_cast<uint16_t>(channels * bits / 8);
  const uint32_t data_len = static_cast<uint32_t>(buf.samples.size() * block_align);

  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::write_u32le(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::write_u32le(out, 16);
  detail::write_u16le(out, 1);  // PCM
  detail::write_u16le(out, channels);
  detail::write_u32le(out, static_cast<uint32_t>(buf.sample_rate));
  detail::write_u32le(out, static_cast<uint32_t>(buf.sample_rate) * block_align);
  detail::write_u16le(out, block_align);
  detail::write_u16le(out, static_cast<uint16_t>(bits));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::write_u32le(out, data_len);

  const double full = (bits == 16) ? 32768.0 : 8388608.0;
  const int32_t vmax = (bits == 16) ? 32767 : 8388607;
  const int32_t vmin = (bits == 16) ? -32768 : -8388608;
  for (double x : buf.samples) {
    int32_t v = static_cast<int32_t>(std::lround(x * full));
    v = std::clamp(v, vmin, vmax);
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    if (bits == 24) out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("write_wav: cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("write_wav: short write: " + path);
}

}  // namespace gesi

#endif  // GESI_WAV_HPP_
