#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reactkit {

// Base of every error raised by the toolkit. kind() is the stable class name
// printed by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define REACTKIT_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("ParseError", "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

REACTKIT_DEFINE_ERROR(SchemaError);
REACTKIT_DEFINE_ERROR(EmptyStream);
REACTKIT_DEFINE_ERROR(MismatchedLandmarks);
REACTKIT_DEFINE_ERROR(GapError);
REACTKIT_DEFINE_ERROR(KernelTooShort);
REACTKIT_DEFINE_ERROR(LengthError);
REACTKIT_DEFINE_ERROR(FlatSignal);
REACTKIT_DEFINE_ERROR(GapInWindow);
REACTKIT_DEFINE_ERROR(WindowOutOfRange);
REACTKIT_DEFINE_ERROR(NegativeOnset);
REACTKIT_DEFINE_ERROR(NonUniformSampling);
REACTKIT_DEFINE_ERROR(BadScales);
REACTKIT_DEFINE_ERROR(DegenerateSample);
REACTKIT_DEFINE_ERROR(PairingError);
REACTKIT_DEFINE_ERROR(MissingCell);
REACTKIT_DEFINE_ERROR(InvalidRecord);
REACTKIT_DEFINE_ERROR(SpecError);
REACTKIT_DEFINE_ERROR(BadParams);
REACTKIT_DEFINE_ERROR(UnknownScript);
REACTKIT_DEFINE_ERROR(ConfigError);

#undef REACTKIT_DEFINE_ERROR

}  // namespace reactkit
