#include "rtfbeam/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "rtfbeam/io_util.hpp"

namespace rtfbeam::wav {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load_le(const std::string& bytes, std::size_t offset) {
  if (offset + sizeof(T) > bytes.size()) throw ConfigError("wav: truncated file");
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

WavData read(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("wav: no such file '" + path.string() + "'");
  const std::string bytes = io::read_file(path);
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
    throw ConfigError("wav: '" + path.string() + "' is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_offset = 0, data_size = 0;
  bool have_fmt = false, have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const auto size = load_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      format = load_le<std::uint16_t>(bytes, body);
      channels = load_le<std::uint16_t>(bytes, body + 2);
      rate = load_le<std::uint32_t>(bytes, body + 4);
      bits = load_le<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible && size >= 40) format = load_le<std::uint16_t>(bytes, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      data_offset = body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || !have_data) throw ConfigError("wav: missing fmt or data chunk");
  if (channels == 0) throw ConfigError("wav: zero channels");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) throw ConfigError("wav: only 16-bit PCM and 32-bit float are supported");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_size / (bytes_per_sample * channels);
  WavData out;
  out.sample_rate_hz = rate;
  out.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t off = data_offset + (n * channels + c) * bytes_per_sample;
      out.channels[c][n] = pcm16 ? load_le<std::int16_t>(bytes, off) / 32768.0
                                 : static_cast<double>(load_le<float>(bytes, off));
    }
  }
  return out;
}

WavData read(const std::filesystem::path& path, unsigned expected_rate_hz) {
  auto data = read(path);
  if (data.sample_rate_hz != expected_rate_hz)
    throw ConfigError("wav: '" + path.string() + "' has sample rate " + std::to_string(data.sample_rate_hz) +
                      ", expected " + std::to_string(expected_rate_hz));
  return data;
}

void write(const std::filesystem::path& path, const Signal& channels, unsigned sample_rate_hz,
           SampleFormat format) {
  if (channels.empty()) throw ConfigError("wav: no channels to write");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels)
    if (ch.size() != frames) throw ConfigError("wav: channel length mismatch");

  const auto num_channels = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = format == SampleFormat::pcm16 ? 16 : 32;
  const std::uint32_t block_align = num_channels * bits / 8;
  const auto data_size = static_cast<std::uint32_t>(frames * block_align);

  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  store_le<std::uint32_t>(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  store_le<std::uint32_t>(out, 16);
  store_le<std::uint16_t>(out, format == SampleFormat::pcm16 ? kFormatPcm : kFormatFloat);
  store_le<std::uint16_t>(out, num_channels);
  store_le<std::uint32_t>(out, sample_rate_hz);
  store_le<std::uint32_t>(out, sample_rate_hz * block_align);
  store_le<std::uint16_t>(out, static_cast<std::uint16_t>(block_align));
  store_le<std::uint16_t>(out, bits);
  out.append("data");
  store_le<std::uint32_t>(out, data_size);
  for (std::size_t n = 0; n < frames; ++n) {
    for (const auto& ch : channels) {
      if (format == SampleFormat::pcm16) {
        const double clipped = std::clamp(ch[n], -1.0, 32767.0 / 32768.0);
        store_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(clipped * 32768.0)));
      } else {
        store_le<float>(out, static_cast<float>(ch[n]));
      }
    }
  }
  io::write_atomic(path, out);
}

}  // namespace rtfbeam::wav
