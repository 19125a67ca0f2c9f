#include "nilcorr/errors.hpp"

namespace nilcorr {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Antisymmetry: return "AntisymmetryViolation";
    case ErrorKind::Jacobi: return "JacobiViolation";
    case ErrorKind::Filtration: return "FiltrationViolation";
    case ErrorKind::HeightExceeded: return "HeightExceeded";
    case ErrorKind::NilpotencyClass: return "NilpotencyClassTooLarge";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EvaluationDomain: return "EvaluationDomainError";
    case ErrorKind::UnknownIntegral: return "UnknownIntegral";
    case ErrorKind::CharacterManifoldMismatch: return "CharacterManifoldMismatch";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
    case ErrorKind::MissingPrimeData: return "MissingPrimeData";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::IngestionMismatch: return "IngestionMismatch";
    case ErrorKind::NonCoprime: return "NonCoprime";
    case ErrorKind::TableTooShort: return "TableTooShort";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

}  // namespace nilcorr
