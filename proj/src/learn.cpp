#include "thermo/learn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "thermo/errors.hpp"
#include "thermo/simd/kernels.hpp"

namespace thermo {
namespace {

// Uniform integer in [0, bound) from a fixed engine, independent of the
// standard library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

double kernel(double dist2, double width) { return std::exp(-dist2 / (width * width)); }

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double quantile_sorted(const std::vector<double>& s, double p) {
  const double h = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

void write_vector(std::ostream& out, const char* key, std::span<const double> v) {
  out << key;
  char buf[40];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, " %.17g", x);
    out << buf;
  }
  out << '\n';
}

std::vector<double> read_vector(std::istream& in, const char* key, std::size_t n) {
  std::string word;
  if (!(in >> word) || word != key) throw ParameterError(std::string("model file: expected '") + key + "'");
  std::vector<double> v(n);
  for (double& x : v) {
    if (!(in >> x)) throw ParameterError(std::string("model file: truncated '") + key + "'");
  }
  return v;
}

}  // namespace

std::vector<Sample> Dataset::rows_in(Split which) const {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i < split.size() && split[i] == which) out.push_back(rows[i]);
  }
  return out;
}

Dataset split_dataset(Dataset data, std::uint64_t seed, const SplitOptions& options) {
  const std::size_t rows = data.rows.size();
  std::size_t train = options.train_count;
  if (options.expected_rows != 0) {
    if (rows != options.expected_rows) {
      throw SizeError("dataset has " + std::to_string(rows) + " rows, expected " +
                      std::to_string(options.expected_rows));
    }
  } else {
    train = static_cast<std::size_t>(std::lround(static_cast<double>(rows) * 68.0 / 98.0));
  }
  train = std::min(train, rows);

  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);

  data.split.assign(rows, Split::Test);
  for (std::size_t k = 0; k < train; ++k) data.split[order[k]] = Split::Train;
  return data;
}

Normalizer Normalizer::fit(std::span<const FeatureVector> rows, double min_span) {
  if (rows.empty()) throw ParameterError("normalizer needs at least one row");
  if (!(min_span >= 0.0)) throw ParameterError("min_span must be non-negative");
  Normalizer n;
  n.min_span = min_span;
  n.lo = rows.front();
  n.hi = rows.front();
  for (const auto& r : rows) {
    if (r.size() != n.lo.size()) throw ParameterError("feature rows differ in dimension");
    for (std::size_t f = 0; f < r.size(); ++f) {
      n.lo[f] = std::min(n.lo[f], r[f]);
      n.hi[f] = std::max(n.hi[f], r[f]);
    }
  }
  return n;
}

FeatureVector Normalizer::apply(std::span<const double> x) const {
  if (x.size() != lo.size()) throw ParameterError("feature dimension does not match the normalizer");
  FeatureVector out(x.size());
  for (std::size_t f = 0; f < x.size(); ++f) {
    const double span = hi[f] - lo[f];
    out[f] = span > min_span && span > 0.0 ? 2.0 * (x[f] - lo[f]) / span - 1.0 : 0.0;
  }
  return out;
}

double RbfModel::predict(std::span<const double> raw_features) const {
  const FeatureVector x = normalizer.apply(raw_features);
  double y = bias;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    y += weights[j] * kernel(simd::squared_distance(x, centers[j]), widths[j]);
  }
  return y;
}

RbfModel train_rbf(std::vector<FeatureVector> centers, std::span<const double> targets, Normalizer normalizer,
                   const RbfOptions& options) {
  const std::size_t m = centers.size();
  if (m == 0 || targets.size() != m) throw ParameterError("need one target per training centre");
  if (!(options.width > 0.0)) throw ParameterError("RBF width must be positive");
  if (!(options.ridge >= 0.0)) throw ParameterError("ridge must be non-negative");

  RbfModel model;
  model.options = options;
  model.normalizer = std::move(normalizer);
  model.widths.assign(m, options.width);
  if (options.mode == WidthMode::Adaptive && m > 1) {
    for (std::size_t j = 0; j < m; ++j) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < m; ++k) {
        if (k != j) nearest = std::min(nearest, simd::squared_distance(centers[j], centers[k]));
      }
      if (!(nearest > 0.0)) throw TrainingError("duplicate training centres");
      model.widths[j] = options.width * std::sqrt(nearest);
    }
  }

  // [Phi + ridge I, 1; 1^T, 0] [w; b] = [y; 0]
  const auto mi = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(mi + 1, mi + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mi + 1);
  for (Eigen::Index i = 0; i < mi; ++i) {
    for (Eigen::Index j = 0; j < mi; ++j) {
      a(i, j) = kernel(simd::squared_distance(centers[i], centers[j]), model.widths[j]);
    }
    a(i, i) += options.ridge;
    a(i, mi) = 1.0;
    a(mi, i) = 1.0;
    rhs[i] = targets[i];
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw TrainingError("RBF interpolation matrix is singular");
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) throw TrainingError("RBF weights are not finite");

  model.weights.assign(sol.data(), sol.data() + m);
  model.bias = sol[mi];
  model.centers = std::move(centers);
  return model;
}

RbfModel fit_rbf_network(std::span<const Sample> train, const RbfOptions& options) {
  std::vector<FeatureVector> raw;
  std::vector<double> targets;
  for (const auto& s : train) {
    raw.push_back(s.features);
    targets.push_back(s.target);
  }
  Normalizer norm = Normalizer::fit(raw);
  std::vector<FeatureVector> centers;
  centers.reserve(raw.size());
  for (const auto& r : raw) centers.push_back(norm.apply(r));
  return train_rbf(std::move(centers), targets, std::move(norm), options);
}

void write_model(std::ostream& out, const RbfModel& model) {
  const std::size_t dims = model.normalizer.lo.size();
  out << "thermo-rbf v1\n";
  out << "dims " << dims << "\ncenters " << model.centers.size() << '\n';
  out << "width_mode " << (model.options.mode == WidthMode::Adaptive ? "adaptive" : "fixed") << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "width %.17g\nridge %.17g\nbias %.17g\n", model.options.width, model.options.ridge,
                model.bias);
  out << buf;
  std::snprintf(buf, sizeof buf, "norm_min_span %.17g\n", model.normalizer.min_span);
  out << buf;
  write_vector(out, "norm_lo", model.normalizer.lo);
  write_vector(out, "norm_hi", model.normalizer.hi);
  write_vector(out, "widths", model.widths);
  write_vector(out, "weights", model.weights);
  for (const auto& c : model.centers) write_vector(out, "center", c);
}

RbfModel read_model(std::istream& in) {
  std::string line, word, mode;
  if (!std::getline(in, line) || line != "thermo-rbf v1") throw ParameterError("model file: unsupported header");
  std::size_t dims = 0, count = 0;
  RbfModel m;
  if (!(in >> word >> dims) || word != "dims") throw ParameterError("model file: expected 'dims'");
  if (!(in >> word >> count) || word != "centers") throw ParameterError("model file: expected 'centers'");
  if (!(in >> word >> mode) || word != "width_mode") throw ParameterError("model file: expected 'width_mode'");
  m.options.mode = mode == "adaptive" ? WidthMode::Adaptive : WidthMode::Fixed;
  m.options.width = read_vector(in, "width", 1)[0];
  m.options.ridge = read_vector(in, "ridge", 1)[0];
  m.bias = read_vector(in, "bias", 1)[0];
  m.normalizer.min_span = read_vector(in, "norm_min_span", 1)[0];
  m.normalizer.lo = read_vector(in, "norm_lo", dims);
  m.normalizer.hi = read_vector(in, "norm_hi", dims);
  m.widths = read_vector(in, "widths", count);
  m.weights = read_vector(in, "weights", count);
  for (std::size_t j = 0; j < count; ++j) m.centers.push_back(read_vector(in, "center", dims));
  return m;
}

EvalReport error_statistics(std::span<const double> errors) {
  EvalReport r;
  r.count = errors.size();
  if (errors.empty()) return r;
  const double n = static_cast<double>(errors.size());
  double sum = 0.0, sum2 = 0.0;
  for (double e : errors) {
    sum += e;
    sum2 += e * e;
  }
  r.mean_err = sum / n;
  r.mse = sum2 / n;
  double var = 0.0;
  for (double e : errors) var += (e - r.mean_err) * (e - r.mean_err);
  r.variance = var / n;
  r.rmse = std::sqrt(r.mse);
  r.std_dev = std::sqrt(r.variance);
  return r;
}

std::vector<double> predict_all(const RbfModel& model, std::span<const Sample> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& s : rows) out.push_back(model.predict(s.features));
  return out;
}

EvalReport evaluate(const RbfModel& model, std::span<const Sample> rows) {
  const std::vector<double> pred = predict_all(model, rows);
  std::vector<double> errors(rows.size()), targets(rows.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    errors[i] = pred[i] - rows[i].target;
    targets[i] = rows[i].target;
    if (std::lround(pred[i]) == std::lround(rows[i].target)) ++hits;
  }
  EvalReport r = error_statistics(errors);
  if (!rows.empty()) r.rounded_accuracy = static_cast<double>(hits) / static_cast<double>(rows.size());
  r.rank_correlation = spearman(pred, targets);
  return r;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) return 0.0;
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw ParameterError("box statistics need at least one value");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return {s.front(), quantile_sorted(s, 0.25), quantile_sorted(s, 0.5), quantile_sorted(s, 0.75), s.back()};
}

BoxStats coefficient_stats(std::span<const Sample> rows, std::size_t feature) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& s : rows) {
    if (feature >= s.features.size()) throw ParameterError("feature index out of range");
    v.push_back(s.features[feature]);
  }
  return box_stats(v);
}

}  // namespace thermo
