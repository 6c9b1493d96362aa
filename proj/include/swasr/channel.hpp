#pragma once

#include "swasr/audio.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swasr {

enum class Codec { none, mulaw };
enum class NoiseKind { white, babble_file };

/// Pass as snr_db to disable noise injection.
inline constexpr double kNoiseDisabled = std::numeric_limits<double>::infinity();

/// Channel degradation recipe: resample -> bandlimit -> codec -> noise.
struct DegradeProfile {
  std::string name = "telephony";
  int target_rate = 8000;
  double band_low = 300.0;
  double band_high = 3400.0;
  Codec codec = Codec::mulaw;
  double snr_db = 20.0;
  NoiseKind noise_kind = NoiseKind::white;
  std::filesystem::path babble_path;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Band {
  double low = 0.0;
  double high = 0.0;
};

/// Windowed-sinc resampler; low-pass filters below the new Nyquist when downsampling.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Zero-phase brick-wall band-pass over the whole clip. Throws InvalidBand
/// unless 0 <= low < high < Nyquist.
AudioClip bandlimit(const AudioClip& clip, double low, double high);

/// G.711 mu-law (mu = 255), operating on 16-bit scaled samples.
std::uint8_t mulaw_encode(double sample);
double mulaw_decode(std::uint8_t code);
AudioClip codec_mulaw(const AudioClip& clip);

struct NoiseSource {
  NoiseKind kind = NoiseKind::white;
  /// Required for babble_file; resampled to the clip rate and looped.
  const AudioClip* babble = nullptr;
  /// When set, the noise is band-limited before being scaled to the target SNR.
  std::optional<Band> band;
};

/// Adds noise scaled so that signal power / noise power equals snr_db.
/// snr_db == kNoiseDisabled returns the input unchanged. Throws SilentInput.
AudioClip add_noise(const AudioClip& clip, double snr_db, const NoiseSource& source, std::uint64_t seed);

/// The per-clip noise seed mixes profile.seed with the clip id.
AudioClip degrade(const AudioClip& clip, const DegradeProfile& profile);

// Named presets: telephony, whatsapp-like, wechat-like, messenger-like.
std::vector<std::string> preset_names();
DegradeProfile preset(std::string_view name);

/// Loads {"name": {profile fields...}, ...}; entries may set "base" to a preset name.
std::map<std::string, DegradeProfile> load_profiles(const std::filesystem::path& path);

std::string to_string(Codec codec);
std::string to_string(NoiseKind kind);

}  // namespace swasr
