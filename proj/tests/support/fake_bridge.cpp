// Stand-in recognizer speaking the bridge protocol, for SubprocessEngine tests.
// Usage: fake_bridge <mode>
//   echo       answers "<id>:<samples>@<rate>" read back from the WAV
//   malformed  answers with a non-JSON line
//   mismatch   answers with the wrong id
//   hang       never answers a request
//   silent     never sends the handshake
//   crash      exits as soon as a request arrives
//   remote     answers with an error field
#include "swasr/audio.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";
  if (mode == "silent") {
    std::this_thread::sleep_for(std::chrono::seconds(60));
    return 0;
  }
  std::cout << R"({"ready": true, "engine": "fake-)" << mode << "\"}" << std::endl;

  std::string line;
  while (std::getline(std::cin, line)) {
    const auto request = nlohmann::json::parse(line);
    const std::string id = request.at("id");
    if (mode == "crash") std::_Exit(3);
    if (mode == "hang") {
      std::this_thread::sleep_for(std::chrono::seconds(60));
      continue;
    }
    if (mode == "malformed") {
      std::cout << "this is not json" << std::endl;
      continue;
    }
    nlohmann::json reply;
    reply["id"] = mode == "mismatch" ? id + "-other" : id;
    if (mode == "remote") {
      reply["error"] = "model not loaded";
    } else {
      const swasr::AudioClip clip = swasr::load_wav(request.at("audio_path").get<std::string>());
      reply["text"] = id + ":" + std::to_string(clip.size()) + "@" + std::to_string(clip.sample_rate);
      reply["confidence"] = 0.75;
    }
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}
