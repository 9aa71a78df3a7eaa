#pragma once

#include <filesystem>

#include "rtfbeam/common.hpp"

namespace rtfbeam::wav {

enum class SampleFormat { pcm16, float32 };

struct WavData {
  unsigned sample_rate_hz = 0;
  Signal channels;  // de-interleaved, samples scaled to [-1, 1) for PCM16
};

WavData read(const std::filesystem::path& path);

// Rejects files whose rate differs from expected_rate_hz (no resampling).
WavData read(const std::filesystem::path& path, unsigned expected_rate_hz);

// Writes through a temporary file and renames it into place. PCM16 output is
// clipped to [-1, 1).
void write(const std::filesystem::path& path, const Signal& channels, unsigned sample_rate_hz,
           SampleFormat format = SampleFormat::float32);

}  // namespace rtfbeam::wav
