#include "swasr/channel.hpp"

#include "spectral.hpp"
#include "swasr/error.hpp"
#include "swasr/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numbers>
#include <random>

namespace swasr {
namespace {

constexpr int kZeroCrossings = 16;
constexpr double kCutoffGuard = 0.95;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Blackman window over u in [-1, 1].
double blackman(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double a = std::numbers::pi * (u + 1.0);
  return 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller on 53-bit uniforms keeps the stream identical across standard libraries.
  auto uniform = [&rng] { return (double(rng() >> 11) + 0.5) * 0x1.0p-53; };
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

const std::map<std::string, DegradeProfile, std::less<>>& presets() {
  static const std::map<std::string, DegradeProfile, std::less<>> table = [] {
    std::map<std::string, DegradeProfile, std::less<>> t;
    auto preset = [](std::string name, int rate, double low, double high, Codec codec, double snr) {
      DegradeProfile p;
      p.name = std::move(name);
      p.target_rate = rate;
      p.band_low = low;
      p.band_high = high;
      p.codec = codec;
      p.snr_db = snr;
      return p;
    };
    t["telephony"] = preset("telephony", 8000, 300.0, 3400.0, Codec::mulaw, 20.0);
    t["whatsapp-like"] = preset("whatsapp-like", 16000, 100.0, 7000.0, Codec::none, 25.0);
    t["wechat-like"] = preset("wechat-like", 11025, 200.0, 4500.0, Codec::none, 15.0);
    t["messenger-like"] = preset("messenger-like", 16000, 150.0, 6000.0, Codec::mulaw, 22.0);
    return t;
  }();
  return table;
}

Codec parse_codec(const std::string& s) {
  if (s == "none") return Codec::none;
  if (s == "mulaw") return Codec::mulaw;
  throw ConfigError("unknown codec '" + s + "'");
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "white") return NoiseKind::white;
  if (s == "babble-file" || s == "babble_file") return NoiseKind::babble_file;
  throw ConfigError("unknown noise_kind '" + s + "'");
}

}  // namespace

std::string to_string(Codec codec) { return codec == Codec::mulaw ? "mulaw" : "none"; }
std::string to_string(NoiseKind kind) { return kind == NoiseKind::white ? "white" : "babble-file"; }

void DegradeProfile::validate() const {
  if (target_rate <= 0) throw InvalidArgument("target_rate must be positive");
  if (!(band_low >= 0.0 && band_low < band_high && band_high < target_rate / 2.0))
    throw InvalidBand("profile '" + name + "' needs 0 <= band_low < band_high < target_rate/2");
  if (std::isnan(snr_db) || snr_db == -kNoiseDisabled) throw InvalidArgument("snr_db must be finite or disabled");
  if (noise_kind == NoiseKind::babble_file && babble_path.empty() && snr_db != kNoiseDisabled)
    throw InvalidArgument("babble-file noise requires babble_path");
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0 || clip.sample_rate <= 0) throw InvalidArgument("sample rates must be positive");
  if (target_rate == clip.sample_rate) return clip;

  const double ratio = double(target_rate) / clip.sample_rate;
  const double scale = std::min(1.0, ratio) * kCutoffGuard;
  const double half_width = kZeroCrossings / scale;
  const auto n_in = clip.samples.size();
  const auto n_out = static_cast<Eigen::Index>(std::llround(double(n_in) * ratio));

  AudioClip out{Samples::Zero(n_out), target_rate, clip.id};
  for (Eigen::Index m = 0; m < n_out; ++m) {
    const double t = double(m) / ratio;
    const auto first = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(t - half_width)));
    const auto last = std::min<Eigen::Index>(n_in - 1, static_cast<Eigen::Index>(std::floor(t + half_width)));
    double acc = 0.0;
    for (Eigen::Index n = first; n <= last; ++n) {
      const double d = t - double(n);
      acc += clip.samples[n] * scale * sinc(scale * d) * blackman(d / half_width);
    }
    out.samples[m] = acc;
  }
  hard_clip(out.samples);
  return out;
}

namespace {

/// Brick-wall band-pass without the final clip, for intermediate signals
/// (unit-variance noise) that are rescaled afterwards.
Samples bandpass_unclipped(const AudioClip& clip, double low, double high) {
  const double nyquist = clip.sample_rate / 2.0;
  if (!(low >= 0.0 && low < high && high < nyquist))
    throw InvalidBand("band must satisfy 0 <= low < high < " + std::to_string(nyquist));
  const auto n = clip.samples.size();
  if (n == 0) return clip.samples;

  const Eigen::Index nfft = detail::next_pow2(2 * n);
  std::vector<double> buffer(static_cast<std::size_t>(nfft), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) buffer[std::size_t(i)] = clip.samples[i];

  Eigen::FFT<double> fft;
  auto spectrum = detail::rfft_full(fft, buffer);
  const double bin_hz = double(clip.sample_rate) / double(nfft);
  for (Eigen::Index k = 0; k < nfft; ++k) {
    const double f = double(std::min(k, nfft - k)) * bin_hz;
    if (f < low || f > high) spectrum[std::size_t(k)] = 0.0;
  }
  const auto filtered = detail::irfft(fft, spectrum);

  Samples out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = filtered[std::size_t(i)];
  return out;
}

}  // namespace

AudioClip bandlimit(const AudioClip& clip, double low, double high) {
  AudioClip out{bandpass_unclipped(clip, low, high), clip.sample_rate, clip.id};
  hard_clip(out.samples);
  return out;
}

std::uint8_t mulaw_encode(double sample) {
  constexpr int kBias = 0x84;
  constexpr int kClip = 8159;
  static constexpr int kSegmentEnd[8] = {0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF, 0x1FFF};

  const double scaled = std::clamp(std::nearbyint(sample * 32768.0), -32768.0, 32767.0);
  int pcm = static_cast<int>(scaled) >> 2;  // 14-bit
  int mask = 0xFF;
  if (pcm < 0) {
    pcm = -pcm;
    mask = 0x7F;
  }
  pcm = std::min(pcm, kClip) + (kBias >> 2);

  int segment = 0;
  while (segment < 8 && pcm > kSegmentEnd[segment]) ++segment;
  if (segment >= 8) return static_cast<std::uint8_t>(0x7F ^ mask);
  const int code = (segment << 4) | ((pcm >> (segment + 1)) & 0xF);
  return static_cast<std::uint8_t>(code ^ mask);
}

double mulaw_decode(std::uint8_t code) {
  constexpr int kBias = 0x84;
  const int u = ~code & 0xFF;
  int t = ((u & 0x0F) << 3) + kBias;
  t <<= (u & 0x70) >> 4;
  const int pcm = (u & 0x80) ? (kBias - t) : (t - kBias);
  return pcm / 32768.0;
}

AudioClip codec_mulaw(const AudioClip& clip) {
  AudioClip out = clip;
  out.samples = clip.samples.unaryExpr([](double x) { return mulaw_decode(mulaw_encode(x)); });
  return out;
}

AudioClip add_noise(const AudioClip& clip, double snr_db, const NoiseSource& source, std::uint64_t seed) {
  if (snr_db == kNoiseDisabled) return clip;
  if (!std::isfinite(snr_db)) throw InvalidArgument("snr_db must be finite or kNoiseDisabled");
  const double signal_power = mean_power(clip.samples);
  if (!(signal_power > 1e-16)) throw SilentInput("cannot set an SNR on a silent clip");

  const auto n = clip.samples.size();
  std::mt19937_64 rng(seed);
  AudioClip noise{Samples::Zero(n), clip.sample_rate, clip.id};
  if (source.kind == NoiseKind::white) {
    for (Eigen::Index i = 0; i < n; ++i) noise.samples[i] = standard_normal(rng);
  } else {
    if (source.babble == nullptr || source.babble->samples.size() == 0)
      throw InvalidArgument("babble noise source is empty");
    const AudioClip babble = resample(*source.babble, clip.sample_rate);
    const auto len = babble.samples.size();
    const auto offset = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(len));
    for (Eigen::Index i = 0; i < n; ++i) noise.samples[i] = babble.samples[(offset + i) % len];
  }
  if (source.band) noise.samples = bandpass_unclipped(noise, source.band->low, source.band->high);

  const double noise_power = mean_power(noise.samples);
  if (!(noise_power > 0.0)) throw InvalidArgument("noise source has no energy in the requested band");
  const double target_power = signal_power / std::pow(10.0, snr_db / 10.0);

  AudioClip out = clip;
  out.samples += noise.samples * std::sqrt(target_power / noise_power);
  hard_clip(out.samples);
  return out;
}

AudioClip degrade(const AudioClip& clip, const DegradeProfile& profile) {
  profile.validate();
  AudioClip out = resample(clip, profile.target_rate);
  out = bandlimit(out, profile.band_low, profile.band_high);
  if (profile.codec == Codec::mulaw) out = codec_mulaw(out);
  if (profile.snr_db == kNoiseDisabled) return out;

  std::optional<AudioClip> babble;
  NoiseSource source{profile.noise_kind, nullptr, Band{profile.band_low, profile.band_high}};
  if (profile.noise_kind == NoiseKind::babble_file) {
    babble = load_wav(profile.babble_path);
    source.babble = &*babble;
  }
  return add_noise(out, profile.snr_db, source, mix_seed(profile.seed, clip.id));
}

std::vector<std::string> preset_names() {
  return {"telephony", "whatsapp-like", "wechat-like", "messenger-like"};
}

DegradeProfile preset(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown degrade profile '" + std::string(name) + "'");
  return it->second;
}

std::map<std::string, DegradeProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid profile JSON in " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("profile file must hold a JSON object keyed by profile name");

  std::map<std::string, DegradeProfile> profiles;
  for (const auto& [name, body] : doc.items()) {
    try {
      DegradeProfile p = body.contains("base") ? preset(body.at("base").get<std::string>()) : DegradeProfile{};
      p.name = name;
      if (body.contains("target_rate")) p.target_rate = body.at("target_rate").get<int>();
      if (body.contains("band_low")) p.band_low = body.at("band_low").get<double>();
      if (body.contains("band_high")) p.band_high = body.at("band_high").get<double>();
      if (body.contains("codec")) p.codec = parse_codec(body.at("codec").get<std::string>());
      if (body.contains("snr_db"))
        p.snr_db = body.at("snr_db").is_null() ? kNoiseDisabled : body.at("snr_db").get<double>();
      if (body.contains("noise_kind")) p.noise_kind = parse_noise_kind(body.at("noise_kind").get<std::string>());
      if (body.contains("babble_path")) {
        std::filesystem::path bp = body.at("babble_path").get<std::string>();
        p.babble_path = bp.is_absolute() ? bp : path.parent_path() / bp;
      }
      if (body.contains("seed")) p.seed = body.at("seed").get<std::uint64_t>();
      p.validate();
      profiles.emplace(name, std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("profile '" + name + "': " + e.what());
    }
  }
  return profiles;
}

}  // namespace swasr
