#pragma once

#include "swasr/audio.hpp"
#include "swasr/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

namespace testing_support {

/// A fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("swasr-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline const std::vector<std::string>& gsc_words() {
  static const std::vector<std::string> words = {"bed",   "bird", "cat",   "dog",  "down",   "eight", "five", "four",
                                                 "go",    "happy", "house", "left", "marvin", "nine",  "no",   "off",
                                                 "on",    "one",  "right", "seven", "sheila", "six",   "stop", "three",
                                                 "tree",  "two",  "up",    "wow",  "yes",    "zero"};
  return words;
}

/// Short synthetic clip whose content depends on `index` (a tone plus a little noise).
inline swasr::AudioClip synth_clip(std::size_t index, int rate = 16000, double seconds = 0.25) {
  const auto n = static_cast<Eigen::Index>(seconds * rate);
  swasr::AudioClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(n);
  const double f = 300.0 + 37.0 * double(index % 50);
  std::uint64_t s = 0x9e3779b97f4a7c15ULL * (index + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    const double noise = (double(s >> 11) / double(1ULL << 53) - 0.5) * 0.02;
    clip.samples[i] = 0.3 * std::sin(2.0 * 3.141592653589793 * f * double(i) / rate) + noise;
  }
  return clip;
}

/// Writes `n` clips labelled round-robin from the 30-word list and a manifest
/// naming them. Returns the manifest path.
inline std::filesystem::path write_corpus(const std::filesystem::path& dir, std::size_t n,
                                          const std::string& platform = "gsc") {
  std::filesystem::create_directories(dir);
  std::vector<swasr::ManifestEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "utt" + std::to_string(1000 + i);
    swasr::save_wav(synth_clip(i), dir / (id + ".wav"));
    entries.push_back({id, id + ".wav", gsc_words()[i % gsc_words().size()], platform});
  }
  const auto manifest = dir / "manifest.jsonl";
  std::ofstream(manifest) << swasr::manifest_to_jsonl(entries);
  return manifest;
}

}  // namespace testing_support
