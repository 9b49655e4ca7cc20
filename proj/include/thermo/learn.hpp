#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "thermo/geometry.hpp"

namespace thermo {

using FeatureVector = std::vector<double>;

struct Sample {
  std::string model_id;
  int n = 0;
  FeatureVector features;
  double target = 0.0;
};

enum class Split : std::uint8_t { Train, Test };

struct Dataset {
  ShapeFamily family = ShapeFamily::RegularPolygon;
  std::vector<Sample> rows;
  std::vector<Split> split;  // empty until split_dataset

  std::vector<Sample> rows_in(Split which) const;
};

struct SplitOptions {
  std::size_t expected_rows = 98;  // 0 disables the size check
  std::size_t train_count = 68;    // scaled by rows/98 when the check is disabled
};

/// Deterministic seeded shuffle; the first train_count shuffled rows train.
Dataset split_dataset(Dataset data, std::uint64_t seed, const SplitOptions& options = {});

/// Per-feature affine map of the training range onto [-1, 1]. A feature whose
/// training range is below `min_span` (its own units) is treated as constant
/// and maps to 0, so round-off sized variation is not stretched to full scale.
struct Normalizer {
  FeatureVector lo;
  FeatureVector hi;
  double min_span = 1e-9;

  static Normalizer fit(std::span<const FeatureVector> rows, double min_span = 1e-9);
  FeatureVector apply(std::span<const double> x) const;
};

enum class WidthMode {
  Fixed,     // every neuron uses `width`
  Adaptive,  // neuron j uses width * (distance from centre j to its nearest other centre)
};

struct RbfOptions {
  double width = 1.0;
  double ridge = 1e-10;
  WidthMode mode = WidthMode::Fixed;
};

/// Exact-interpolation Gaussian RBF network: one neuron per training sample,
/// linear output layer with bias.
struct RbfModel {
  Normalizer normalizer;
  std::vector<FeatureVector> centers;  // normalized
  std::vector<double> widths;          // per centre
  std::vector<double> weights;
  double bias = 0.0;
  RbfOptions options;

  double predict(std::span<const double> raw_features) const;
};

/// Trains on already-normalized centres; `normalizer` is stored in the model
/// and applied to raw inputs at prediction time.
RbfModel train_rbf(std::vector<FeatureVector> centers, std::span<const double> targets, Normalizer normalizer,
                   const RbfOptions& options = {});

/// Fits the normalizer on the raw training rows, then trains.
RbfModel fit_rbf_network(std::span<const Sample> train, const RbfOptions& options = {});

void write_model(std::ostream& out, const RbfModel& model);
RbfModel read_model(std::istream& in);

struct EvalReport {
  std::size_t count = 0;
  double rmse = 0.0;
  double mse = 0.0;
  double mean_err = 0.0;  // mu
  double variance = 0.0;  // sigma^2
  double std_dev = 0.0;   // sigma
  double rounded_accuracy = 0.0;
  double rank_correlation = 0.0;  // Spearman, predictions vs targets
};

/// Statistics of errors e_i = predicted_i - desired_i (population moments).
EvalReport error_statistics(std::span<const double> errors);

std::vector<double> predict_all(const RbfModel& model, std::span<const Sample> rows);
EvalReport evaluate(const RbfModel& model, std::span<const Sample> rows);

double spearman(std::span<const double> a, std::span<const double> b);

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quartiles by linear interpolation between order statistics; whiskers are
/// the raw extremes.
BoxStats box_stats(std::span<const double> values);
BoxStats coefficient_stats(std::span<const Sample> rows, std::size_t feature);

}  // namespace thermo
