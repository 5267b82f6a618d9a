// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/harness/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <vector>

#include "tsep/error.hpp"

namespace tsep::harness {
namespace {

std::uint32_t u32(const std::vector<unsigned char>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t u16(const std::vector<unsigned char>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path + ": ";
  if (b.size() < 12 || std::string(b.begin(), b.begin() + 4) != "RIFF") throw FormatError(where + "RIFF tag missing");
  if (std::string(b.begin() + 8, b.begin() + 12) != "WAVE") throw FormatError(where + "WAVE form type missing");

  bool have_fmt = false;
  Waveform w;
  for (std::size_t pos = 12; pos + 8 <= b.size();) {
    const std::string id(b.begin() + static_cast<std::ptrdiff_t>(pos), b.begin() + static_cast<std::ptrdiff_t>(pos + 4));
    const std::size_t size = u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > b.size()) throw FormatError(where + "chunk '" + id + "' size exceeds file");
    if (id == "fmt ") {
      if (size < 16) throw FormatError(where + "fmt chunk too short");
      const std::uint16_t format = u16(b, body);
      const std::uint16_t channels = u16(b, body + 2);
      const std::uint16_t bits = u16(b, body + 14);
      if (format != 1) throw FormatError(where + "audio_format " + std::to_string(format) + " is not PCM (1)");
      if (channels != 1) throw FormatError(where + "num_channels " + std::to_string(channels) + " is not mono (1)");
      if (bits != 16) throw FormatError(where + "bits_per_sample " + std::to_string(bits) + " is not 16");
      w.sample_rate = u32(b, body + 4);
      if (w.sample_rate == 0) throw FormatError(where + "sample_rate is 0");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(where + "data chunk before fmt chunk");
      if (size % 2 != 0) throw FormatError(where + "data size " + std::to_string(size) + " is not a multiple of 2");
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        w.samples[i] = static_cast<std::int16_t>(u16(b, body + 2 * i)) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(where + (have_fmt ? "data chunk missing" : "fmt chunk missing"));
}

void write_wav(const std::string& path, const Waveform& wave) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  std::vector<unsigned char> b;
  b.reserve(44 + data_bytes);
  for (char c : std::string("RIFF")) b.push_back(static_cast<unsigned char>(c));
  put32(b, 36 + data_bytes);
  for (char c : std::string("WAVEfmt ")) b.push_back(static_cast<unsigned char>(c));
  put32(b, 16);
  put16(b, 1);
  put16(b, 1);
  put32(b, wave.sample_rate);
  put32(b, wave.sample_rate * 2);
  put16(b, 2);
  put16(b, 16);
  for (char c : std::string("data")) b.push_back(static_cast<unsigned char>(c));
  put32(b, data_bytes);
  for (double s : wave.samples) {
    const double q = std::clamp(std::nearbyint(s * 32768.0), -32768.0, 32767.0);
    put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw Error(path + ": write failed");
}

}  // namespace tsep::harness
