#pragma once

#include <stdexcept>
#include <string>

namespace vigil {

// All library errors derive from Error. The what() string always begins with
// the category prefix (e.g. "parameter error: k must be >= 1"), so callers can
// match on the category without RTTI if they prefer.
class Error : public std::runtime_error {
 public:
  Error(const std::string& category, const std::string& message)
      : std::runtime_error(category + ": " + message) {}
};

// A caller-supplied argument is outside its documented domain.
struct ParameterError : Error {
  explicit ParameterError(const std::string& m) : Error("parameter error", m) {}
};

// Loaded or constructed data violates a structural requirement.
struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error("validation error", m) {}
};

// Sample/label streams that must line up do not.
struct AlignmentError : Error {
  explicit AlignmentError(const std::string& m) : Error("alignment error", m) {}
};

// A file's syntax or schema is wrong.
struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format error", m) {}
};

// The filesystem refused a read or write.
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io error", m) {}
};

// Input is structurally valid but mathematically unusable (rank deficiency,
// constant columns where variation is required, ...).
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& m) : Error("degenerate input", m) {}
};

// A numerical procedure failed beyond its recovery strategy.
struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error("numerical error", m) {}
};

// An evaluation scheme cannot be carried out on the given corpus.
struct SchemeError : Error {
  explicit SchemeError(const std::string& m) : Error("scheme error", m) {}
};

// A run configuration file is syntactically or semantically invalid.
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config error", m) {}
};

}  // namespace vigil
