#include "thermo/signature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "thermo/errors.hpp"

namespace thermo {
namespace {

constexpr int kHarmonics = 4;
constexpr int kLinear = 1 + 2 * kHarmonics;

void validate(const SurfaceProfile& p) {
  if (p.positions.size() != p.temps.size()) throw ParameterError("profile positions/temps length mismatch");
  if (p.positions.size() < 41) throw ParameterError("profile needs at least 41 samples");
  for (std::size_t i = 1; i < p.positions.size(); ++i) {
    if (!(p.positions[i] > p.positions[i - 1])) throw ParameterError("profile positions must strictly increase");
  }
  for (double t : p.temps) {
    if (!std::isfinite(t)) throw ParameterError("profile has non-finite temperatures");
  }
}

Eigen::MatrixXd design(const Eigen::VectorXd& s, double w) {
  Eigen::MatrixXd a(s.size(), kLinear);
  for (Eigen::Index r = 0; r < s.size(); ++r) {
    a(r, 0) = 1.0;
    for (int i = 1; i <= kHarmonics; ++i) {
      a(r, i) = std::cos(i * w * s[r]);
      a(r, kHarmonics + i) = std::sin(i * w * s[r]);
    }
  }
  return a;
}

struct Projection {
  Eigen::VectorXd coef;
  double ssr = 0.0;
};

Projection project(const Eigen::VectorXd& s, const Eigen::VectorXd& t, double w) {
  const Eigen::MatrixXd a = design(s, w);
  Projection p;
  p.coef = a.colPivHouseholderQr().solve(t);
  p.ssr = (a * p.coef - t).squaredNorm();
  return p;
}

double model_ssr(const Eigen::VectorXd& s, const Eigen::VectorXd& t, const Eigen::VectorXd& theta) {
  return (design(s, theta[kLinear]) * theta.head(kLinear) - t).squaredNorm();
}

}  // namespace

std::array<double, 10> FourierSignature::features() const {
  return {a0, a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3], w};
}

double FourierSignature::evaluate(double x) const {
  const double s = x - origin;
  double v = a0;
  for (int i = 1; i <= kHarmonics; ++i) v += a[i - 1] * std::cos(i * w * s) + b[i - 1] * std::sin(i * w * s);
  return v;
}

SurfaceProfile extract_profile(const TetMesh& mesh, const ScalarField& field, std::size_t samples) {
  if (samples < 41) throw ParameterError("profile needs at least 41 samples");
  if (field.values.size() != mesh.node_count()) throw ParameterError("field size does not match the mesh");
  double z_top = 0.0;
  std::size_t count = 0;
  for (const auto& f : mesh.faces) {
    if (f.tag != FaceTag::Top) continue;
    for (auto n : f.nodes) {
      z_top += mesh.nodes[n][2];
      ++count;
    }
  }
  if (count == 0) throw ParameterError("mesh has no top surface");
  z_top /= static_cast<double>(count);

  const PointLocator locator(mesh);
  SurfaceProfile p;
  p.positions.resize(samples);
  p.temps.resize(samples);
  const double x_len = mesh.dims.x_len;
  const double y_mid = mesh.dims.y_len / 2.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = (i + 1 == samples) ? x_len : x_len * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double t = sample_field(mesh, locator, field, {x, y_mid, z_top});
    if (!std::isfinite(t)) {
      std::ostringstream msg;
      msg << "profile point (" << x << ", " << y_mid << ", " << z_top << ") mm lies outside the mesh";
      throw ParameterError(msg.str());
    }
    p.positions[i] = x * 1e-3;
    p.temps[i] = t;
  }
  return p;
}

FourierSignature fit_fourier4(const SurfaceProfile& profile, const FitOptions& options) {
  validate(profile);
  const auto [tmin, tmax] = std::minmax_element(profile.temps.begin(), profile.temps.end());
  const double range = *tmax - *tmin;
  if (!(range > 0.0)) throw DegenerateFitError("profile has zero temperature range; w is indeterminate");

  const Eigen::Index m = static_cast<Eigen::Index>(profile.positions.size());
  const double origin = 0.5 * (profile.positions.front() + profile.positions.back());
  const double span = profile.positions.back() - profile.positions.front();
  Eigen::VectorXd s(m), t(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    s[i] = profile.positions[i] - origin;
    t[i] = profile.temps[i];
  }

  const double w_nominal = 2.0 * std::numbers::pi / span;
  const double lo = options.w_lo_factor * w_nominal;
  const double hi = options.w_hi_factor * w_nominal;
  const int scan = std::max(options.scan_points, 3);

  // Coarse scan for the global basin.
  int best = 0;
  double best_ssr = std::numeric_limits<double>::infinity();
  std::vector<double> grid(scan);
  for (int k = 0; k < scan; ++k) {
    grid[k] = lo + (hi - lo) * k / (scan - 1);
    const double ssr = project(s, t, grid[k]).ssr;
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best = k;
    }
  }

  // Golden section inside the bracket around the best scan point.
  double a = grid[std::max(best - 1, 0)];
  double b = grid[std::min(best + 1, scan - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = project(s, t, c).ssr;
  double fd = project(s, t, d).ssr;
  for (int it = 0; it < 200 && (b - a) > 1e-13 * w_nominal; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = project(s, t, c).ssr;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = project(s, t, d).ssr;
    }
  }
  double w = 0.5 * (a + b);
  Projection proj = project(s, t, w);
  if (best_ssr < proj.ssr) {  // scan endpoint beat the bracket interior
    w = grid[best];
    proj = project(s, t, w);
  }

  // Gauss-Newton polish of (coefficients, w): the objective is flat in w near
  // the optimum, so golden section alone only resolves w to ~sqrt(eps).
  Eigen::VectorXd theta(kLinear + 1);
  theta.head(kLinear) = proj.coef;
  theta[kLinear] = w;
  double ssr = proj.ssr;
  for (int it = 0; it < 30; ++it) {
    const double wc = theta[kLinear];
    Eigen::MatrixXd j(m, kLinear + 1);
    j.leftCols(kLinear) = design(s, wc);
    for (Eigen::Index r = 0; r < m; ++r) {
      double dw = 0.0;
      for (int i = 1; i <= kHarmonics; ++i) {
        dw += -theta[i] * i * s[r] * std::sin(i * wc * s[r]) + theta[kHarmonics + i] * i * s[r] * std::cos(i * wc * s[r]);
      }
      j(r, kLinear) = dw;
    }
    const Eigen::VectorXd resid = j.leftCols(kLinear) * theta.head(kLinear) - t;
    const Eigen::VectorXd step = j.colPivHouseholderQr().solve(-resid);
    Eigen::VectorXd trial = theta + step;
    double trial_ssr = model_ssr(s, t, trial);
    int halvings = 0;
    while (!(trial_ssr <= ssr) && halvings < 30) {
      trial = theta + std::ldexp(1.0, -(++halvings)) * step;
      trial_ssr = model_ssr(s, t, trial);
    }
    if (!(trial_ssr <= ssr)) break;
    const double rel_step = std::abs(trial[kLinear] - theta[kLinear]) / std::abs(theta[kLinear]);
    theta = trial;
    ssr = trial_ssr;
    if (rel_step < 1e-15) break;
  }
  // Re-project at the final w so the linear part is exactly optimal.
  if (theta[kLinear] >= lo && theta[kLinear] <= hi) w = theta[kLinear];
  proj = project(s, t, w);

  FourierSignature sig;
  sig.origin = origin;
  sig.w = w;
  sig.a0 = proj.coef[0];
  for (int i = 0; i < kHarmonics; ++i) {
    sig.a[i] = proj.coef[1 + i];
    sig.b[i] = proj.coef[1 + kHarmonics + i];
  }
  sig.fit_rmse_rel = std::sqrt(proj.ssr / static_cast<double>(m)) / range;
  return sig;
}

SurfaceMax max_surface_temp(const SurfaceProfile& profile) {
  if (profile.temps.empty()) return {};
  std::size_t best = 0;
  for (std::size_t i = 1; i < profile.temps.size(); ++i) {
    if (profile.temps[i] > profile.temps[best]) best = i;
  }
  return {profile.positions[best], profile.temps[best]};
}

}  // namespace thermo
