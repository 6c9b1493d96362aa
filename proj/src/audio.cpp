#include "swasr/audio.hpp"

#include "spectral.hpp"
#include "swasr/error.hpp"
#include "swasr/timing.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

namespace swasr {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw MalformedWav(std::string("truncated WAV: ") + what);
  }

  std::uint16_t u16() {
    need(2, "u16");
    std::uint16_t v = std::uint16_t(bytes_[pos_]) | std::uint16_t(bytes_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }

  std::string tag() {
    need(4, "chunk id");
    std::string t(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return t;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) {
    need(n, "chunk body");
    pos_ += n;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct WavFormat {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

WavFormat parse_fmt(std::span<const std::uint8_t> body) {
  ByteReader r(body);
  WavFormat f;
  f.format = r.u16();
  f.channels = r.u16();
  f.sample_rate = r.u32();
  r.u32();  // byte rate
  f.block_align = r.u16();
  f.bits = r.u16();
  if (f.format == kFormatExtensible) {
    if (r.remaining() < 24) throw MalformedWav("WAVE_FORMAT_EXTENSIBLE header too short");
    r.u16();  // cbSize
    r.u16();  // valid bits
    r.u32();  // channel mask
    f.format = r.u16();  // leading bytes of the sub-format GUID
  }
  return f;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v & 0xFF));
  out.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::int16_t quantize_pcm16(double x) {
  const double scaled = std::nearbyint(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(std::clamp(q, 0.0, 1.0) * double(values.size() - 1));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

}  // namespace

void PreprocessConfig::validate() const {
  if (!(target_rms_dbfs < 0.0)) throw InvalidArgument("target_rms_dbfs must be negative");
  if (!(gate_threshold_db >= 0.0)) throw InvalidArgument("gate_threshold_db must be non-negative");
  if (!(frame_ms > 0.0) || !(hop_ms > 0.0) || hop_ms > frame_ms)
    throw InvalidArgument("frame/hop lengths must be positive with hop <= frame");
  if (!(noise_percentile >= 0.0 && noise_percentile <= 1.0))
    throw InvalidArgument("noise_percentile must lie in [0, 1]");
  if (!(attenuation_db >= 0.0)) throw InvalidArgument("attenuation_db must be non-negative");
}

AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string id) {
  ByteReader r(bytes);
  if (r.remaining() < 12) throw MalformedWav("file shorter than RIFF header");
  if (r.tag() != "RIFF") throw MalformedWav("missing RIFF tag");
  r.u32();
  if (r.tag() != "WAVE") throw MalformedWav("missing WAVE tag");

  std::optional<WavFormat> fmt;
  std::optional<std::span<const std::uint8_t>> data;
  while (r.remaining() >= 8 && !data) {
    const std::string id_tag = r.tag();
    const std::uint32_t size = r.u32();
    if (id_tag == "fmt ") {
      fmt = parse_fmt(r.take(size, "fmt chunk"));
    } else if (id_tag == "data") {
      data = r.take(size, "data chunk");
      break;
    } else {
      r.skip(size);
    }
    if (size % 2 == 1 && r.remaining() > 0) r.skip(1);
  }
  if (!fmt) throw MalformedWav("missing fmt chunk");
  if (!data) throw MalformedWav("missing data chunk");

  const bool pcm16 = fmt->format == kFormatPcm && fmt->bits == 16;
  const bool float32 = fmt->format == kFormatFloat && fmt->bits == 32;
  if (!pcm16 && !float32) {
    throw UnsupportedEncoding("unsupported WAV encoding (format " + std::to_string(fmt->format) + ", " +
                              std::to_string(fmt->bits) + " bits)");
  }
  if (fmt->channels == 0 || fmt->sample_rate == 0) throw MalformedWav("zero channels or sample rate");
  const std::size_t bytes_per_sample = fmt->bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
  if (data->size() % frame_bytes != 0) throw MalformedWav("data chunk ends mid-frame");

  const auto frames = static_cast<Eigen::Index>(data->size() / frame_bytes);
  AudioClip clip;
  clip.id = std::move(id);
  clip.sample_rate = static_cast<int>(fmt->sample_rate);
  clip.samples = Samples::Zero(frames);
  const std::uint8_t* p = data->data();
  for (Eigen::Index i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < fmt->channels; ++c) {
      if (pcm16) {
        const auto v = static_cast<std::int16_t>(std::uint16_t(p[0]) | std::uint16_t(p[1]) << 8);
        acc += double(v) / 32768.0;
      } else {
        std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
                             std::uint32_t(p[3]) << 24;
        float v;
        std::memcpy(&v, &bits, sizeof v);
        acc += std::isfinite(v) ? std::clamp(double(v), -1.0, 1.0) : 0.0;
      }
      p += bytes_per_sample;
    }
    clip.samples[i] = acc / fmt->channels;
  }
  return clip;
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw InvalidArgument("sample_rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (Eigen::Index i = 0; i < clip.samples.size(); ++i) {
    put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(clip.samples[i])));
  }
  return out;
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.stem().string());
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

NormalizeResult normalize_rms(const AudioClip& clip, double target_dbfs) {
  if (!(target_dbfs < 0.0)) throw InvalidArgument("target_dbfs must be negative");
  NormalizeResult result{clip};
  const double level = rms(clip.samples);
  if (!(level > 1e-8)) {
    result.status = NormalizeStatus::silent_input;
    return result;
  }
  result.gain = db_to_amplitude(target_dbfs) / level;
  result.clip.samples *= result.gain;
  result.clipped = hard_clip(result.clip.samples);
  return result;
}

AudioClip denoise_spectral_gate(const AudioClip& clip, const PreprocessConfig& config) {
  config.validate();
  const auto frame = static_cast<Eigen::Index>(std::lround(config.frame_ms * 1e-3 * clip.sample_rate));
  const auto hop = std::max<Eigen::Index>(1, std::lround(config.hop_ms * 1e-3 * clip.sample_rate));
  if (frame < 2 || clip.size() < frame) throw TooShort("clip shorter than one analysis frame");

  const Eigen::Index n = clip.size();
  const Eigen::Index nfft = detail::next_pow2(frame);
  const Eigen::Index bins = nfft / 2 + 1;
  const Eigen::ArrayXd window = detail::hann(frame);

  // Pad by one frame on each side so every input sample is covered by
  // several overlapping frames.
  const Eigen::Index pad = frame;
  const Eigen::Index padded_len = n + 2 * pad;
  Eigen::ArrayXd padded = Eigen::ArrayXd::Zero(padded_len);
  padded.segment(pad, n) = clip.samples;

  std::vector<Eigen::Index> starts;
  for (Eigen::Index s = 0; s + frame <= padded_len; s += hop) starts.push_back(s);

  Eigen::FFT<double> fft;
  std::vector<detail::Spectrum> spectra;
  spectra.reserve(starts.size());
  std::vector<double> buffer(static_cast<std::size_t>(nfft));
  for (Eigen::Index s : starts) {
    std::fill(buffer.begin(), buffer.end(), 0.0);
    for (Eigen::Index i = 0; i < frame; ++i) buffer[std::size_t(i)] = padded[s + i] * window[i];
    spectra.push_back(detail::rfft_full(fft, buffer));
  }

  // Noise floor: a low percentile over the magnitudes of all frames lying
  // fully inside the signal, pooled across bins.
  std::vector<double> magnitudes;
  for (std::size_t f = 0; f < starts.size(); ++f) {
    if (starts[f] < pad || starts[f] + frame > pad + n) continue;
    for (Eigen::Index k = 0; k < bins; ++k) magnitudes.push_back(std::abs(spectra[f][std::size_t(k)]));
  }
  if (magnitudes.empty()) {
    for (const auto& spec : spectra)
      for (Eigen::Index k = 0; k < bins; ++k) magnitudes.push_back(std::abs(spec[std::size_t(k)]));
  }
  const double floor = percentile(std::move(magnitudes), config.noise_percentile);
  const double threshold = floor * db_to_amplitude(config.gate_threshold_db);
  const double attenuation = db_to_amplitude(-config.attenuation_db);

  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(padded_len);
  Eigen::ArrayXd weight = Eigen::ArrayXd::Zero(padded_len);
  for (std::size_t f = 0; f < starts.size(); ++f) {
    auto& spec = spectra[f];
    for (auto& bin : spec) {
      if (std::abs(bin) < threshold) bin *= attenuation;
    }
    const auto frame_out = detail::irfft(fft, spec);
    for (Eigen::Index i = 0; i < frame; ++i) {
      out[starts[f] + i] += frame_out[std::size_t(i)] * window[i];
      weight[starts[f] + i] += window[i] * window[i];
    }
  }

  AudioClip result{Samples::Zero(n), clip.sample_rate, clip.id};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weight[pad + i];
    result.samples[i] = w > 1e-12 ? out[pad + i] / w : 0.0;
  }
  hard_clip(result.samples);
  return result;
}

PreprocessResult preprocess(const AudioClip& clip, const PreprocessConfig& config) {
  config.validate();
  PreprocessResult result{clip};
  if (config.denoise_enabled) {
    Stopwatch sw;
    result.clip = denoise_spectral_gate(result.clip, config);
    result.denoise_ms = sw.elapsed_ms();
  }
  if (config.normalize_enabled) {
    Stopwatch sw;
    auto normalized = normalize_rms(result.clip, config.target_rms_dbfs);
    result.clip = std::move(normalized.clip);
    result.status = normalized.status;
    result.clipped = normalized.clipped;
    result.normalize_ms = sw.elapsed_ms();
  }
  return result;
}

}  // namespace swasr
