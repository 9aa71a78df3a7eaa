#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rtfbeam/common.hpp"
#include "rtfbeam/rtf.hpp"
#include "rtfbeam/stft.hpp"

namespace rtfbeam::tensor_io {

// Binary tensor file, little endian, 48-byte header:
//
//   offset  type     field
//   0       char[4]  magic "RTFB"
//   4       u32      version (1)
//   8       u32      dim0  (M for RTFs/weights, F for narrowband beampatterns)
//   12      u32      dim1  (F, or angle count)
//   16      u32      dim2  (L)
//   20      u32      ref_channel
//   24      u32      sample_rate_hz
//   28      u32      window_len
//   32      u32      hop
//   36      u32      window (0 = hann, 1 = sqrt_hann)
//   40      u32      side (0 = left, 1 = right, 0xFFFFFFFF = none)
//   44      u32      flags (bit 0: validity mask present)
//   48      payload  dim0*dim1*dim2 complex64 (float32 re, float32 im), row-major
//           mask     dim1*dim2 bytes (0/1), only if flags bit 0 is set
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 48;

struct TensorFile {
  Tensor3 data;
  std::vector<std::uint8_t> mask;  // empty when absent
  std::uint32_t ref_channel = 0;
  stft::StftConfig config;
  std::optional<Side> side;
};

void write(const std::filesystem::path& path, const TensorFile& file);
TensorFile read(const std::filesystem::path& path);

void save_rtf(const std::filesystem::path& path, const rtf::RtfTrajectory& rtf, const stft::StftConfig& config);
rtf::RtfTrajectory load_rtf(const std::filesystem::path& path, stft::StftConfig* config = nullptr);

}  // namespace rtfbeam::tensor_io
