#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace swasr {

using Samples = Eigen::ArrayXd;

/// Mono audio buffer. Samples are kept in [-1, 1] by every operation in this library.
struct AudioClip {
  Samples samples;
  int sample_rate = 16000;
  std::string id;

  Eigen::Index size() const { return samples.size(); }
  double duration_s() const { return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0; }
};

struct PreprocessConfig {
  bool denoise_enabled = true;
  /// Bins whose magnitude stays below floor * 10^(gate_threshold_db/20) are attenuated.
  double gate_threshold_db = 18.0;
  double target_rms_dbfs = -20.0;
  bool normalize_enabled = true;

  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double noise_percentile = 0.10;
  double attenuation_db = 30.0;

  void validate() const;
};

template <typename Derived>
typename Derived::Scalar mean_power(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return Scalar(0);
  return x.square().mean();
}

template <typename Derived>
typename Derived::Scalar rms(const Eigen::ArrayBase<Derived>& x) {
  return std::sqrt(mean_power(x));
}

inline double amplitude_to_db(double amplitude) { return 20.0 * std::log10(amplitude); }
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double power_to_db(double power) { return 10.0 * std::log10(power); }

/// Clamps every sample into [-1, 1]; returns true when anything was clipped.
template <typename Derived>
bool hard_clip(Eigen::ArrayBase<Derived>& x) {
  const bool clipped = (x.abs() > 1.0).any();
  if (clipped) x = x.max(-1.0).min(1.0);
  return clipped;
}

// WAV (RIFF) input/output. Reads PCM16 and IEEE float32, any channel count
// (downmixed by averaging). Writes mono PCM16.
AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string id = {});
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);
AudioClip load_wav(const std::filesystem::path& path);
void save_wav(const AudioClip& clip, const std::filesystem::path& path);

enum class NormalizeStatus { ok, silent_input };

struct NormalizeResult {
  AudioClip clip;
  NormalizeStatus status = NormalizeStatus::ok;
  bool clipped = false;
  double gain = 1.0;
};

/// Scales the clip to the target RMS level. Silent input (RMS <= 1e-8) is
/// returned unchanged with status silent_input.
NormalizeResult normalize_rms(const AudioClip& clip, double target_dbfs);

/// Short-time spectral gate. Throws TooShort for clips shorter than one frame.
AudioClip denoise_spectral_gate(const AudioClip& clip, const PreprocessConfig& config);

struct PreprocessResult {
  AudioClip clip;
  NormalizeStatus status = NormalizeStatus::ok;
  bool clipped = false;
  double denoise_ms = 0.0;
  double normalize_ms = 0.0;
};

/// Denoise (if enabled) then normalize (if enabled).
PreprocessResult preprocess(const AudioClip& clip, const PreprocessConfig& config);

}  // namespace swasr
