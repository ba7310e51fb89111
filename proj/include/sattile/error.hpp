#pragma once

#include <stdexcept>
#include <string>

namespace sattile {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (detection files, manifests, class maps, configs).
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// An external command broke the directory-exchange contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace sattile
