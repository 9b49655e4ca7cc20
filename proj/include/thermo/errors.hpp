#pragma once

#include <stdexcept>
#include <string>

namespace thermo {

/// Invalid input to an operation (bad counts, infeasible areas, planes outside the block).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tumor prism does not fit inside the tissue block.
class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deformation produced an inverted element.
class DeformationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fit has no well-defined solution (e.g. flat profile, w indeterminate).
class DegenerateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset has the wrong number of rows for the requested split.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Required artifacts on disk are missing.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thermo
