#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/scratch.hpp"
#include "support/signal_oracle.hpp"
#include "swasr/audio.hpp"
#include "swasr/error.hpp"

#include <cstring>
#include <random>

using namespace swasr;

namespace {

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}
void put_tag(std::vector<std::uint8_t>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

/// Hand-built RIFF file; `data` is the raw payload.
std::vector<std::uint8_t> riff(std::uint16_t format, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                               const std::vector<std::uint8_t>& data, bool extra_chunk = false) {
  std::vector<std::uint8_t> b;
  put_tag(b, "RIFF");
  put32(b, 0);  // patched below
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put32(b, 16);
  put16(b, format);
  put16(b, channels);
  put32(b, rate);
  put32(b, rate * channels * bits / 8);
  put16(b, channels * bits / 8);
  put16(b, bits);
  if (extra_chunk) {
    put_tag(b, "LIST");
    put32(b, 3);
    b.insert(b.end(), {'a', 'b', 'c', 0});  // odd size plus pad byte
  }
  put_tag(b, "data");
  put32(b, std::uint32_t(data.size()));
  b.insert(b.end(), data.begin(), data.end());
  const std::uint32_t riff_size = std::uint32_t(b.size() - 8);
  std::memcpy(&b[4], &riff_size, 4);
  return b;
}

std::vector<std::uint8_t> pcm16(const std::vector<std::int16_t>& v) {
  std::vector<std::uint8_t> b;
  for (auto s : v) put16(b, std::uint16_t(s));
  return b;
}

AudioClip clip_of(Eigen::ArrayXd samples, int rate = 16000) {
  AudioClip c;
  c.samples = std::move(samples);
  c.sample_rate = rate;
  return c;
}

}  // namespace

TEST_CASE("decode: pcm16 scaling and silence") {
  const auto silent = decode_wav(riff(1, 1, 16000, 16, pcm16(std::vector<std::int16_t>(16000, 0))));
  CHECK(silent.size() == 16000);
  CHECK(silent.sample_rate == 16000);
  CHECK((silent.samples == 0.0).all());

  const auto c = decode_wav(riff(1, 1, 8000, 16, pcm16({32767, -32768, 16384})));
  REQUIRE(c.size() == 3);
  CHECK(c.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-15));
  CHECK(c.samples[1] == -1.0);
  CHECK(c.samples[2] == 0.5);
}

TEST_CASE("decode: stereo is averaged") {
  const auto c = decode_wav(riff(1, 2, 16000, 16, pcm16({16384, -16384, 8192, 8192})));
  REQUIRE(c.size() == 2);
  CHECK(c.samples[0] == 0.0);
  CHECK(c.samples[1] == 0.25);
}

TEST_CASE("decode: float32 and unknown chunks") {
  std::vector<std::uint8_t> data;
  for (float f : {0.25f, -0.5f, 2.0f}) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put32(data, bits);
  }
  const auto c = decode_wav(riff(3, 1, 22050, 32, data, true));
  REQUIRE(c.size() == 3);
  CHECK(c.sample_rate == 22050);
  CHECK(c.samples[0] == 0.25);
  CHECK(c.samples[1] == -0.5);
  CHECK(c.samples[2] == 1.0);  // clamped into range
}

TEST_CASE("decode: malformed and unsupported input") {
  const auto good = riff(1, 1, 16000, 16, pcm16({1, 2, 3, 4}));
  CHECK_THROWS_AS(decode_wav(std::span(good.data(), 10)), MalformedWav);
  CHECK_THROWS_AS(decode_wav(std::span(good.data(), good.size() - 3)), MalformedWav);

  auto not_riff = good;
  not_riff[0] = 'X';
  CHECK_THROWS_AS(decode_wav(not_riff), MalformedWav);

  CHECK_THROWS_AS(decode_wav(riff(1, 1, 16000, 16, {1, 2, 3})), MalformedWav);  // ends mid-frame
  CHECK_THROWS_AS(decode_wav(riff(2, 1, 16000, 4, {1, 2})), UnsupportedEncoding);   // ADPCM
  CHECK_THROWS_AS(decode_wav(riff(1, 1, 16000, 24, {1, 2, 3})), UnsupportedEncoding);
}

TEST_CASE("wav round trip within one quantization step") {
  testing_support::ScratchDir dir("wav");
  Eigen::ArrayXd ramp = Eigen::ArrayXd::LinSpaced(100, -1.0, 1.0);
  const AudioClip in = clip_of(ramp, 8000);
  save_wav(in, dir / "ramp.wav");
  const AudioClip out = load_wav(dir / "ramp.wav");
  CHECK(out.sample_rate == 8000);
  REQUIRE(out.size() == 100);
  CHECK((out.samples - in.samples).abs().maxCoeff() <= 1.0 / 32768.0);

  save_wav(clip_of(Eigen::ArrayXd(0)), dir / "empty.wav");
  CHECK(load_wav(dir / "empty.wav").size() == 0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::ArrayXd x(257);
    for (auto& v : x) v = u(rng);
    const auto back = decode_wav(encode_wav(clip_of(x)));
    CHECK((back.samples - x).abs().maxCoeff() <= 1.0 / 32768.0);
  }
  CHECK_THROWS_AS(load_wav(dir / "missing.wav"), IoError);
}

TEST_CASE("normalize_rms examples") {
  const AudioClip quiet = clip_of(oracle::tone(440, 0.01 * std::sqrt(2.0), 16000, 1.0));
  const auto r = normalize_rms(quiet, -20.0);
  CHECK(r.status == NormalizeStatus::ok);
  CHECK(r.gain == doctest::Approx(10.0).epsilon(1e-3));
  CHECK(rms(r.clip.samples) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK_FALSE(r.clipped);

  const auto same = normalize_rms(r.clip, -20.0);
  CHECK(same.gain == doctest::Approx(1.0).epsilon(1e-9));

  const auto zero = normalize_rms(clip_of(Eigen::ArrayXd::Zero(100)), -20.0);
  CHECK(zero.status == NormalizeStatus::silent_input);
  CHECK((zero.clip.samples == 0.0).all());

  // A loud target forces clipping, which must be reported.
  Eigen::ArrayXd spiky = Eigen::ArrayXd::Constant(1000, 0.01);
  spiky[10] = 0.9;
  const auto hot = normalize_rms(clip_of(spiky), -3.0);
  CHECK(hot.clipped);
  CHECK(hot.clip.samples.abs().maxCoeff() <= 1.0);
}

TEST_CASE("property: normalize lands within 0.5 dB for random non-silent input") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> log_amp(-4.0, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double amp = std::pow(10.0, log_amp(rng));
    Eigen::ArrayXd x = oracle::white_noise(4000, amp / 3.0, 100 + trial).max(-amp).min(amp);
    const auto r = normalize_rms(clip_of(x), -20.0);
    REQUIRE(r.status == NormalizeStatus::ok);
    CHECK(std::abs(amplitude_to_db(rms(r.clip.samples)) + 20.0) <= 0.5);
  }
}

TEST_CASE("denoise: clean tone keeps its band power, length is preserved") {
  const AudioClip in = clip_of(oracle::tone(440, 0.5, 16000, 0.5));
  const AudioClip out = denoise_spectral_gate(in, PreprocessConfig{});
  REQUIRE(out.size() == in.size());
  const double before = oracle::band_power(in.samples, 16000, 400, 480);
  const double after = oracle::band_power(out.samples, 16000, 400, 480);
  CHECK(std::abs(oracle::db(after / before)) <= 1.0);
}

TEST_CASE("denoise: stationary white noise loses at least 10 dB") {
  const double amp = db_to_amplitude(-40.0);
  const AudioClip in = clip_of(oracle::white_noise(16000, amp, 3));
  const AudioClip out = denoise_spectral_gate(in, PreprocessConfig{});
  REQUIRE(out.size() == in.size());
  CHECK(amplitude_to_db(rms(out.samples) / rms(in.samples)) <= -10.0);
}

TEST_CASE("denoise: noisy tone keeps the tone and drops the noise") {
  const AudioClip in = clip_of(oracle::tone(1000, 0.3, 16000, 0.5) + oracle::white_noise(8000, 0.003, 9));
  const AudioClip out = denoise_spectral_gate(in, PreprocessConfig{});
  const double tone_before = oracle::band_power(in.samples, 16000, 950, 1050);
  const double tone_after = oracle::band_power(out.samples, 16000, 950, 1050);
  CHECK(std::abs(oracle::db(tone_after / tone_before)) <= 1.0);
  const double noise_before = oracle::band_power(in.samples, 16000, 3000, 7000);
  const double noise_after = oracle::band_power(out.samples, 16000, 3000, 7000);
  CHECK(oracle::db(noise_after / noise_before) <= -10.0);
}

TEST_CASE("denoise: guards") {
  CHECK_THROWS_AS(denoise_spectral_gate(clip_of(Eigen::ArrayXd::Zero(160)), PreprocessConfig{}), TooShort);
  PreprocessConfig bad;
  bad.gate_threshold_db = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = PreprocessConfig{};
  bad.target_rms_dbfs = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  const auto zero = denoise_spectral_gate(clip_of(Eigen::ArrayXd::Zero(1600)), PreprocessConfig{});
  CHECK((zero.samples == 0.0).all());
}

TEST_CASE("preprocess composition") {
  const AudioClip in = clip_of(oracle::tone(440, 0.05, 16000, 0.5) + oracle::white_noise(8000, 0.001, 1));

  PreprocessConfig off;
  off.denoise_enabled = false;
  off.normalize_enabled = false;
  const auto same = preprocess(in, off);
  CHECK((same.clip.samples == in.samples).all());

  const auto once = preprocess(in, PreprocessConfig{});
  CHECK(std::abs(amplitude_to_db(rms(once.clip.samples)) + 20.0) <= 0.5);
  const double tone_in = oracle::band_power(in.samples, 16000, 400, 480) / oracle::power(in.samples);
  const double tone_out = oracle::band_power(once.clip.samples, 16000, 400, 480) / oracle::power(once.clip.samples);
  CHECK(tone_out >= tone_in * 0.99);
  CHECK(once.denoise_ms >= 0.0);
  CHECK(once.normalize_ms >= 0.0);

  const auto twice = preprocess(once.clip, PreprocessConfig{});
  CHECK(std::abs(amplitude_to_db(rms(twice.clip.samples) / rms(once.clip.samples))) <= 0.1);
}

TEST_CASE("property: every operation keeps samples in [-1, 1]") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(400, 3000);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::ArrayXd x(len(rng));
    const double scale = std::abs(u(rng));
    for (auto& v : x) v = u(rng) * scale;
    const AudioClip c = clip_of(x);
    PreprocessConfig loud;
    loud.target_rms_dbfs = -1.0;
    for (const AudioClip& out : {denoise_spectral_gate(c, PreprocessConfig{}), normalize_rms(c, -1.0).clip,
                                 preprocess(c, loud).clip, decode_wav(encode_wav(c))}) {
      CHECK(out.samples.abs().maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("expression helpers work on arbitrary scalar types") {
  Eigen::ArrayXf f(4);
  f << 1.5f, -2.0f, 0.5f, 0.0f;
  CHECK(mean_power(f) == doctest::Approx((2.25 + 4.0 + 0.25) / 4.0));
  CHECK(hard_clip(f));
  CHECK(f.abs().maxCoeff() == 1.0f);
  Eigen::ArrayXd d = Eigen::ArrayXd::Constant(3, 0.5);
  CHECK_FALSE(hard_clip(d));
  CHECK(rms(d * 2.0) == doctest::Approx(1.0));
}
