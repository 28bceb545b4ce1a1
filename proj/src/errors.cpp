#include "pdelearn/errors.hpp"

namespace pdelearn {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Ingest: return "IngestError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::Plan: return "PlanError";
    case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::Shape: return "ShapeError";
    case ErrorKind::Index: return "IndexError";
    case ErrorKind::Numeric: return "NumericError";
    case ErrorKind::Divergence: return "DivergenceError";
    case ErrorKind::Weight: return "WeightError";
    case ErrorKind::TrainingData: return "TrainingDataError";
    case ErrorKind::NotTrained: return "NotTrained";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::Internal: return "InternalError";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Ingest:
    case ErrorKind::Parse:
    case ErrorKind::TooShort:
    case ErrorKind::Shape:
    case ErrorKind::Index:
    case ErrorKind::Schema:
    case ErrorKind::NotTrained:
    case ErrorKind::TrainingData:
      return 2;
    case ErrorKind::Numeric:
    case ErrorKind::Divergence:
    case ErrorKind::DegenerateMetric:
    case ErrorKind::Internal:
      return 3;
    case ErrorKind::Plan:
    case ErrorKind::UnsupportedOrder:
    case ErrorKind::Weight:
    case ErrorKind::Config:
      return 4;
  }
  return 1;
}

}  // namespace pdelearn
