#pragma once

#include <stdexcept>
#include <string>

namespace hsys {

enum class ErrorKind {
  InvalidDimension,
  InvalidOrder,
  Domain,
  SupercriticalHardy,
  HypothesisViolation,
  MismatchedGrids,
  UndefinedState,
  ProjectionImpossible,
  OffManifold,
  RegimeViolation,
  InvalidGrid,
  Config,
  UnknownKey,
  MissingKey,
  Unreadable,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hsys
