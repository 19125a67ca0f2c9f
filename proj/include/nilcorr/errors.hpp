#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilcorr {

enum class ErrorKind {
  Antisymmetry,
  Jacobi,
  Filtration,
  HeightExceeded,
  NilpotencyClass,
  DimensionMismatch,
  EvaluationDomain,
  UnknownIntegral,
  CharacterManifoldMismatch,
  Overflow,
  CapacityExceeded,
  MissingPrimeData,
  Schema,
  BoundViolation,
  IngestionMismatch,
  NonCoprime,
  TableTooShort,
  InvalidArgument,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library. `data` carries the offending
// indices where the error names them: (i,j,k) for structure-constant
// failures, (p) for missing prime data, (p,j) for bound violations.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::vector<std::int64_t> data = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), data_(std::move(data)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::int64_t>& data() const noexcept { return data_; }

 private:
  ErrorKind kind_;
  std::vector<std::int64_t> data_;
};

}  // namespace nilcorr
