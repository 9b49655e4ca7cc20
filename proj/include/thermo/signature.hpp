#pragma once

#include <array>
#include <vector>

#include "thermo/fem.hpp"

namespace thermo {

/// Temperatures along the top-surface centerline (y = Y/2).
struct SurfaceProfile {
  std::vector<double> positions;  // m, block x coordinate, strictly increasing
  std::vector<double> temps;      // degC
};

/// T(x) = a0 + sum_{i=1..4} a_i cos(i w s) + b_i sin(i w s), with s = x - origin.
struct FourierSignature {
  double a0 = 0.0;
  std::array<double, 4> a{};
  std::array<double, 4> b{};
  double w = 0.0;             // rad/m
  double origin = 0.0;        // m, centre of the fitted path
  double fit_rmse_rel = 0.0;  // RMSE / (max - min) of the fitted temperatures

  /// a0, a1..a4, b1..b4, w
  std::array<double, 10> features() const;
  double evaluate(double x) const;
};

inline constexpr std::array<const char*, 10> kFeatureNames{"a0", "a1", "a2", "a3", "a4",
                                                           "b1", "b2", "b3", "b4", "w"};

/// Uniform samples over x in [0, X] at y = Y/2 on the mesh's top surface
/// (deformed position when the mesh is deformed).
SurfaceProfile extract_profile(const TetMesh& mesh, const ScalarField& field, std::size_t samples = 121);

struct FitOptions {
  double w_lo_factor = 0.5;  // search interval for w, relative to 2 pi / span
  double w_hi_factor = 1.5;
  int scan_points = 201;     // coarse scan locating the global basin
};

/// Variable projection: the 9 linear coefficients are solved exactly for each
/// candidate w; w is located by a coarse scan plus golden-section search and
/// then polished with Gauss-Newton on all 10 parameters. The fit coordinate is
/// centred on the path midpoint.
FourierSignature fit_fourier4(const SurfaceProfile& profile, const FitOptions& options = {});

struct SurfaceMax {
  double x = 0.0;  // m
  double t = 0.0;  // degC
};

/// Largest sample; ties go to the smaller x.
SurfaceMax max_surface_temp(const SurfaceProfile& profile);

}  // namespace thermo
