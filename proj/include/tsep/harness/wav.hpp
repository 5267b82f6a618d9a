// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "tsep/codec.hpp"

namespace tsep::harness {

// RIFF/WAVE, PCM, 16-bit, mono. Samples map to [-1, 1) as int16 / 32768.
// Anything else throws FormatError naming the offending field.
Waveform read_wav(const std::string& path);

// Rounds to the nearest int16 and clips; write(read(f)) reproduces f's data.
void write_wav(const std::string& path, const Waveform& wave);

}  // namespace tsep::harness
