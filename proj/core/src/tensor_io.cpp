#include "rtfbeam/tensor_io.hpp"

#include <cstring>
#include <string>

#include "rtfbeam/io_util.hpp"

namespace rtfbeam::tensor_io {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'F', 'B'};
constexpr std::uint32_t kNoSide = 0xFFFFFFFFu;

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_f32(std::string& out, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t get_u32(const std::string& bytes, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

float get_f32(const std::string& bytes, std::size_t offset) {
  float v;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

}  // namespace

void write(const std::filesystem::path& path, const TensorFile& file) {
  const auto& t = file.data;
  const bool has_mask = !file.mask.empty();
  if (has_mask && file.mask.size() != t.dim1() * t.dim2()) throw ConfigError("tensor_io: mask size mismatch");

  std::string out;
  out.reserve(kHeaderBytes + t.size() * 8 + file.mask.size());
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(t.dim0()));
  put_u32(out, static_cast<std::uint32_t>(t.dim1()));
  put_u32(out, static_cast<std::uint32_t>(t.dim2()));
  put_u32(out, file.ref_channel);
  put_u32(out, file.config.sample_rate_hz);
  put_u32(out, static_cast<std::uint32_t>(file.config.window_len));
  put_u32(out, static_cast<std::uint32_t>(file.config.hop));
  put_u32(out, file.config.window == stft::WindowType::hann ? 0u : 1u);
  put_u32(out, file.side ? (*file.side == Side::left ? 0u : 1u) : kNoSide);
  put_u32(out, has_mask ? 1u : 0u);
  for (const auto& v : t.data()) {
    put_f32(out, static_cast<float>(v.real()));
    put_f32(out, static_cast<float>(v.imag()));
  }
  out.append(reinterpret_cast<const char*>(file.mask.data()), file.mask.size());
  io::write_atomic(path, out);
}

TensorFile read(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("tensor_io: no such file '" + path.string() + "'");
  const std::string bytes = io::read_file(path);
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ConfigError("tensor_io: '" + path.string() + "' is not a tensor file");
  if (get_u32(bytes, 4) != kVersion) throw ConfigError("tensor_io: unsupported version");

  const std::size_t d0 = get_u32(bytes, 8), d1 = get_u32(bytes, 12), d2 = get_u32(bytes, 16);
  TensorFile file;
  file.ref_channel = get_u32(bytes, 20);
  file.config.sample_rate_hz = get_u32(bytes, 24);
  file.config.window_len = get_u32(bytes, 28);
  file.config.hop = get_u32(bytes, 32);
  file.config.window = get_u32(bytes, 36) == 0 ? stft::WindowType::hann : stft::WindowType::sqrt_hann;
  const auto side = get_u32(bytes, 40);
  if (side != kNoSide) file.side = side == 0 ? Side::left : Side::right;
  const bool has_mask = (get_u32(bytes, 44) & 1u) != 0;

  const std::size_t payload = d0 * d1 * d2 * 8;
  const std::size_t mask_bytes = has_mask ? d1 * d2 : 0;
  if (bytes.size() != kHeaderBytes + payload + mask_bytes) throw ConfigError("tensor_io: file size does not match header");

  file.data = Tensor3(d0, d1, d2);
  std::size_t off = kHeaderBytes;
  for (auto& v : file.data.data()) {
    v = Complex(get_f32(bytes, off), get_f32(bytes, off + 4));
    off += 8;
  }
  if (has_mask) file.mask.assign(bytes.begin() + static_cast<std::ptrdiff_t>(off), bytes.end());
  return file;
}

void save_rtf(const std::filesystem::path& path, const rtf::RtfTrajectory& rtf, const stft::StftConfig& config) {
  TensorFile file;
  file.data = rtf.values;
  file.mask = rtf.valid;
  file.ref_channel = static_cast<std::uint32_t>(rtf.ref_channel);
  file.config = config;
  file.side = rtf.side;
  write(path, file);
}

rtf::RtfTrajectory load_rtf(const std::filesystem::path& path, stft::StftConfig* config) {
  auto file = read(path);
  if (!file.side) throw ConfigError("tensor_io: '" + path.string() + "' is not an RTF trajectory");
  rtf::RtfTrajectory out;
  out.values = std::move(file.data);
  out.valid = file.mask.empty() ? std::vector<std::uint8_t>(out.bins() * out.frames(), 1) : std::move(file.mask);
  out.ref_channel = file.ref_channel;
  out.side = *file.side;
  if (out.ref_channel >= out.channels()) throw ConfigError("tensor_io: reference channel out of range");
  if (config) *config = file.config;
  return out;
}

}  // namespace rtfbeam::tensor_io
