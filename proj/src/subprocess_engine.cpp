#include "swasr/engines.hpp"
#include "swasr/error.hpp"
#include "swasr/timing.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace swasr {
namespace {

std::string errno_text() { return std::strerror(errno); }

/// Removes the temporary request file when the request finishes.
class TempWav {
 public:
  TempWav(const AudioClip& clip, std::uint64_t serial) {
    path_ = std::filesystem::temp_directory_path() /
            ("swasr-" + std::to_string(::getpid()) + "-" + std::to_string(serial) + ".wav");
    save_wav(clip, path_);
  }
  ~TempWav() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempWav(const TempWav&) = delete;
  TempWav& operator=(const TempWav&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

class SubprocessEngine::Child {
 public:
  explicit Child(const std::vector<std::string>& command) {
    if (command.empty()) throw InvalidArgument("bridge command is empty");
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
      throw BridgeCrashed("socketpair failed: " + errno_text());

    std::vector<char*> argv;
    for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      throw BridgeCrashed("fork failed: " + errno_text());
    }
    if (pid_ == 0) {
      ::dup2(sv[1], STDIN_FILENO);
      ::dup2(sv[1], STDOUT_FILENO);
      ::execvp(argv[0], argv.data());
      ::_exit(127);
    }
    ::close(sv[1]);
    fd_ = sv[0];
  }

  ~Child() {
    if (fd_ >= 0) ::close(fd_);
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  void write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw BridgeCrashed("bridge closed its input: " + errno_text());
      }
      sent += std::size_t(n);
    }
  }

  std::string read_line(int timeout_ms) {
    Stopwatch sw;
    while (true) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const int remaining = timeout_ms - static_cast<int>(sw.elapsed_ms());
      if (remaining <= 0) throw BridgeTimeout("bridge did not answer within " + std::to_string(timeout_ms) + " ms");
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, remaining);
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw BridgeCrashed("poll failed: " + errno_text());
      }
      if (ready == 0) continue;
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw BridgeCrashed("read from bridge failed: " + errno_text());
      }
      if (n == 0) throw BridgeCrashed("bridge exited");
      buffer_.append(chunk, std::size_t(n));
    }
  }

 private:
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
};

SubprocessEngine::SubprocessEngine(SubprocessOptions options) : options_(std::move(options)) {
  if (options_.command.empty()) throw InvalidArgument("bridge command is empty");
  if (options_.timeout_ms <= 0) throw InvalidArgument("timeout_ms must be positive");
  if (options_.pool_size <= 0) throw InvalidArgument("pool_size must be positive");
  if (options_.startup_timeout_ms <= 0) options_.startup_timeout_ms = options_.timeout_ms;
}

SubprocessEngine::~SubprocessEngine() = default;

std::string SubprocessEngine::id() const {
  std::lock_guard lock(mutex_);
  return engine_name_.empty() ? options_.command.front() : engine_name_;
}

int SubprocessEngine::spawn_count() const {
  std::lock_guard lock(mutex_);
  return spawned_;
}

std::unique_ptr<SubprocessEngine::Child> SubprocessEngine::acquire() {
  {
    std::unique_lock lock(mutex_);
    available_.wait(lock, [this] { return !idle_.empty() || outstanding_ < options_.pool_size; });
    ++outstanding_;
    if (!idle_.empty()) {
      auto child = std::move(idle_.back());
      idle_.pop_back();
      return child;
    }
    ++spawned_;
  }
  try {
    auto child = std::make_unique<Child>(options_.command);
    const BridgeHandshake hs = decode_handshake(child->read_line(options_.startup_timeout_ms));
    std::lock_guard lock(mutex_);
    if (!hs.engine.empty()) engine_name_ = hs.engine;
    return child;
  } catch (...) {
    release(nullptr);
    throw;
  }
}

void SubprocessEngine::release(std::unique_ptr<Child> child) {
  {
    std::lock_guard lock(mutex_);
    --outstanding_;
    if (child) idle_.push_back(std::move(child));
  }
  available_.notify_one();
}

Transcription SubprocessEngine::transcribe(const AudioClip& clip) {
  Stopwatch sw;
  std::uint64_t serial;
  {
    std::lock_guard lock(mutex_);
    serial = request_counter_++;
  }
  TempWav wav(clip, serial);
  BridgeRequest request{clip.id.empty() ? "req-" + std::to_string(serial) : clip.id, wav.path().string(),
                        clip.sample_rate};

  auto child = acquire();
  BridgeResponse response;
  try {
    child->write_line(encode_request(request));
    response = decode_response(child->read_line(options_.timeout_ms));
    if (response.id != request.id)
      throw BridgeProtocolError("bridge answered id '" + response.id + "' to request '" + request.id + "'");
  } catch (const EngineError&) {
    // The child is out of sync or dead; dropping it kills the process and the
    // next request spawns a replacement.
    child.reset();
    release(nullptr);
    throw;
  }
  release(std::move(child));

  if (response.error) throw BridgeRemoteError("bridge error for '" + request.id + "': " + *response.error);
  Transcription t;
  t.text = response.text;
  t.confidence = response.confidence;
  t.engine_id = id();
  t.latency_ms = sw.elapsed_ms();
  return t;
}

std::shared_ptr<EngineAdapter> subprocess_adapter(std::vector<std::string> command, int timeout_ms, int pool_size) {
  SubprocessOptions options;
  options.command = std::move(command);
  options.timeout_ms = timeout_ms;
  options.pool_size = pool_size;
  return std::make_shared<ValidatingEngine>(std::make_shared<SubprocessEngine>(std::move(options)));
}

}  // namespace swasr
