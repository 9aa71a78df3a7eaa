#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "rtfbeam/io_util.hpp"
#include "rtfbeam/tensor_io.hpp"
#include "rtfbeam/wav.hpp"

using namespace rtfbeam;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rtfbeam_io_" + std::to_string(oracle::rng()()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::uint32_t u32_at(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

TEST_CASE("float32 WAV round trip is exact for float-representable samples") {
  TempDir dir;
  const Signal x{{0.0, 0.5, -0.25, 0.125}, {1.0, -1.0, 0.75, 0.0}};
  wav::write(dir.path / "a.wav", x, 16000);
  const auto y = wav::read(dir.path / "a.wav");
  CHECK(y.sample_rate_hz == 16000);
  CHECK(y.channels == x);
  CHECK(fs::file_size(dir.path / "a.wav") == 44 + 2 * 4 * 4);
  CHECK_FALSE(fs::exists(dir.path / "a.wav.tmp"));
}

TEST_CASE("PCM16 round trip quantizes and clips") {
  TempDir dir;
  const Signal x{{0.0, 0.3, -0.3, 1.5, -2.0}};
  wav::write(dir.path / "p.wav", x, 8000, wav::SampleFormat::pcm16);
  const auto y = wav::read(dir.path / "p.wav", 8000);
  REQUIRE(y.channels.size() == 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(y.channels[0][i] - x[0][i]) <= 1.0 / 32768.0);
  CHECK(y.channels[0][3] == doctest::Approx(32767.0 / 32768.0));
  CHECK(y.channels[0][4] == -1.0);
}

TEST_CASE("WAV errors") {
  TempDir dir;
  CHECK_THROWS_AS(wav::read(dir.path / "missing.wav"), ConfigError);
  io::write_atomic(dir.path / "junk.wav", "definitely not a wav file at all........");
  CHECK_THROWS_AS(wav::read(dir.path / "junk.wav"), ConfigError);
  wav::write(dir.path / "r.wav", Signal{{0.1, 0.2}}, 16000);
  CHECK_THROWS_AS(wav::read(dir.path / "r.wav", 44100), ConfigError);
  CHECK_THROWS_AS(wav::write(dir.path / "x.wav", Signal{{0.1}, {0.1, 0.2}}, 16000), ConfigError);
  CHECK_THROWS_AS(wav::write(dir.path / "x.wav", Signal{}, 16000), ConfigError);
}

TEST_CASE("WAVE_FORMAT_EXTENSIBLE float files are read") {
  TempDir dir;
  std::string b = "RIFF";
  put<std::uint32_t>(b, 0);
  b += "WAVEfmt ";
  put<std::uint32_t>(b, 40);
  put<std::uint16_t>(b, 0xFFFE);
  put<std::uint16_t>(b, 2);       // channels
  put<std::uint32_t>(b, 16000);   // rate
  put<std::uint32_t>(b, 16000 * 8);
  put<std::uint16_t>(b, 8);
  put<std::uint16_t>(b, 32);
  put<std::uint16_t>(b, 22);
  put<std::uint16_t>(b, 32);
  put<std::uint32_t>(b, 0);
  put<std::uint16_t>(b, 3);  // IEEE float sub-format
  b += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xAA\x00\x38\x9B\x71", 14);
  b += "data";
  put<std::uint32_t>(b, 16);
  for (float v : {0.5f, -0.5f, 0.25f, 1.0f}) put<float>(b, v);
  const std::uint32_t riff = static_cast<std::uint32_t>(b.size() - 8);
  std::memcpy(b.data() + 4, &riff, 4);
  io::write_atomic(dir.path / "ext.wav", b);
  const auto y = wav::read(dir.path / "ext.wav");
  REQUIRE(y.channels.size() == 2);
  CHECK(y.channels[0] == std::vector<double>{0.5, 0.25});
  CHECK(y.channels[1] == std::vector<double>{-0.5, 1.0});
}

TEST_CASE("tensor file header layout and round trip") {
  TempDir dir;
  tensor_io::TensorFile f;
  f.data = Tensor3(2, 3, 4);
  std::mt19937_64 g(1);
  for (auto& v : f.data.data()) v = {oracle::randn(g), oracle::randn(g)};
  f.mask.assign(12, 1);
  f.mask[5] = 0;
  f.ref_channel = 1;
  f.config.window = stft::WindowType::hann;
  f.side = Side::right;
  const auto path = dir.path / "t.bdt";
  tensor_io::write(path, f);

  const auto bytes = io::read_file(path);
  CHECK(bytes.size() == tensor_io::kHeaderBytes + 24 * 8 + 12);
  CHECK(bytes.substr(0, 4) == "RTFB");
  CHECK(u32_at(bytes, 4) == 1);
  CHECK(u32_at(bytes, 8) == 2);
  CHECK(u32_at(bytes, 12) == 3);
  CHECK(u32_at(bytes, 16) == 4);
  CHECK(u32_at(bytes, 20) == 1);
  CHECK(u32_at(bytes, 24) == 16000);
  CHECK(u32_at(bytes, 28) == 512);
  CHECK(u32_at(bytes, 32) == 256);
  CHECK(u32_at(bytes, 36) == 0);
  CHECK(u32_at(bytes, 40) == 1);
  CHECK(u32_at(bytes, 44) == 1);
  float first[2];
  std::memcpy(first, bytes.data() + 48, 8);
  CHECK(first[0] == static_cast<float>(f.data(0, 0, 0).real()));
  CHECK(first[1] == static_cast<float>(f.data(0, 0, 0).imag()));

  const auto back = tensor_io::read(path);
  CHECK(back.data.same_shape(f.data));
  for (std::size_t i = 0; i < f.data.size(); ++i)
    CHECK(std::abs(back.data.data()[i] - f.data.data()[i]) < 1e-6 * (1.0 + std::abs(f.data.data()[i])));
  CHECK(back.mask == f.mask);
  CHECK(back.ref_channel == 1);
  CHECK(back.side == Side::right);
  CHECK(back.config == f.config);

  io::write_atomic(dir.path / "short.bdt", bytes.substr(0, 60));
  CHECK_THROWS_AS(tensor_io::read(dir.path / "short.bdt"), ConfigError);
  io::write_atomic(dir.path / "magic.bdt", "XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(tensor_io::read(dir.path / "magic.bdt"), ConfigError);
  CHECK_THROWS_AS(tensor_io::read(dir.path / "none.bdt"), ConfigError);
}

TEST_CASE("RTF trajectories survive save and load") {
  TempDir dir;
  rtf::RtfTrajectory t(3, 5, 2, 2, Side::right);
  std::mt19937_64 g(2);
  for (auto& v : t.values.data()) v = {oracle::randn(g), oracle::randn(g)};
  t.set_valid(4, 1, false);
  stft::StftConfig c;
  c.window_len = 8;
  c.hop = 4;
  tensor_io::save_rtf(dir.path / "r.bdt", t, c);
  stft::StftConfig loaded_config;
  const auto back = tensor_io::load_rtf(dir.path / "r.bdt", &loaded_config);
  CHECK(loaded_config == c);
  CHECK(back.ref_channel == 2);
  CHECK(back.side == Side::right);
  CHECK_FALSE(back.is_valid(4, 1));
  CHECK(back.is_valid(4, 0));
  CHECK(std::abs(back.values(1, 3, 1) - t.values(1, 3, 1)) < 1e-6);

  tensor_io::TensorFile plain;
  plain.data = Tensor3(1, 1, 1);
  tensor_io::write(dir.path / "plain.bdt", plain);
  CHECK_THROWS_AS(tensor_io::load_rtf(dir.path / "plain.bdt"), ConfigError);
}

TEST_CASE("atomic write replaces content and leaves no temporary") {
  TempDir dir;
  io::write_atomic(dir.path / "f.txt", "one");
  io::write_atomic(dir.path / "f.txt", "two");
  CHECK(io::read_file(dir.path / "f.txt") == "two");
  CHECK_FALSE(fs::exists(dir.path / "f.txt.tmp"));
}
