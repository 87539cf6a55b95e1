#pragma once

#include <stdexcept>
#include <string>

namespace attackability {

/// Tensor/layer dimension mismatch. The message names the offending layer.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (class index out of range, empty batch, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad record size, truncated stream, ...).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training loss became non-finite. Reports the epoch it happened in.
struct TrainingDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Binary training targets contain a single class only.
struct DegenerateLabelsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Score vectors do not agree on their sample set / order.
struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A perturbation table is missing required (sample, model) entries.
struct IncompleteTableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A metric is undefined for the given input (no positives, constant vector).
struct UndefinedMetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace attackability
