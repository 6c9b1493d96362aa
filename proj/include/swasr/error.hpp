#pragma once

#include <stdexcept>
#include <string>

namespace swasr {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration and input validation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// audio
class MalformedWav : public Error {
 public:
  using Error::Error;
};

class UnsupportedEncoding : public Error {
 public:
  using Error::Error;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class SilentInput : public Error {
 public:
  using Error::Error;
};

// channel simulation
class InvalidBand : public Error {
 public:
  using Error::Error;
};

// engines
class EngineError : public Error {
 public:
  using Error::Error;
};

class UnknownClip : public EngineError {
 public:
  using EngineError::EngineError;
};

class BridgeTimeout : public EngineError {
 public:
  using EngineError::EngineError;
};

class BridgeProtocolError : public EngineError {
 public:
  using EngineError::EngineError;
};

class BridgeCrashed : public EngineError {
 public:
  using EngineError::EngineError;
};

/// The bridge answered the request with an "error" field.
class BridgeRemoteError : public EngineError {
 public:
  using EngineError::EngineError;
};

/// An adapter returned a value outside its contract (e.g. confidence > 1).
class ContractViolation : public EngineError {
 public:
  using EngineError::EngineError;
};

class EngineUnavailable : public Error {
 public:
  using Error::Error;
};

// matching
class ZeroVector : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class TemplateInvalid : public Error {
 public:
  using Error::Error;
};

class LlmError : public Error {
 public:
  LlmError(const std::string& what, bool transient) : Error(what), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

// pipeline / eval / dispatch
class ManifestInvalid : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class EmptyResults : public Error {
 public:
  using Error::Error;
};

class IllegalTransition : public Error {
 public:
  using Error::Error;
};

}  // namespace swasr
