#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace purs {

// All library failures surface as Error with a stable kind tag, so callers
// (and the CLI) can report a single machine-parsable line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

  static Error dimension(const std::string& m) { return Error("dimension", m); }
  static Error numeric(const std::string& m) { return Error("numeric", m); }
  static Error contract(const std::string& m) { return Error("contract", m); }
  static Error schema(const std::string& m) { return Error("schema", m); }
  static Error io(const std::string& m) { return Error("io", m); }
  static Error config(const std::string& m) { return Error("config", m); }
  static Error checkpoint(const std::string& m) { return Error("checkpoint", m); }
  static Error metric(const std::string& m) { return Error("metric", m); }
  static Error data(const std::string& m) { return Error("data", m); }
  static Error training(const std::string& m) { return Error("training", m); }
  static Error state(const std::string& m) { return Error("state", m); }

 private:
  std::string kind_;
};

}  // namespace purs
