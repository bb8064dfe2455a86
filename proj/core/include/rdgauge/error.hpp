#pragma once

#include <stdexcept>
#include <string>

namespace rdgauge {

// Two roots so callers (and the CLI exit code) can tell bad data from a broken
// environment without enumerating every leaf type.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// media-io
class FormatError : public DataError {
 public:
  using DataError::DataError;
};
class ValidationError : public DataError {
 public:
  using DataError::DataError;
};
class UnsupportedFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};
class IncompleteFrameError : public DataError {
 public:
  using DataError::DataError;
};

// encode-orchestrator
class PlanError : public DataError {
 public:
  using DataError::DataError;
};
class EncodeError : public DataError {
 public:
  using DataError::DataError;
};
class MetricError : public DataError {
 public:
  using DataError::DataError;
};
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

// results-store
class StoreError : public DataError {
 public:
  using DataError::DataError;
};
class ImportError : public DataError {
 public:
  using DataError::DataError;
};

// bd-analysis
class CurveError : public DataError {
 public:
  using DataError::DataError;
};
class OverlapError : public DataError {
 public:
  using DataError::DataError;
};
class DomainError : public DataError {
 public:
  using DataError::DataError;
};
class AggregationError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

}  // namespace rdgauge
