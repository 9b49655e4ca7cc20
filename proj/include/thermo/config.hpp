#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "thermo/fem.hpp"
#include "thermo/geometry.hpp"
#include "thermo/learn.hpp"
#include "thermo/mesh.hpp"

namespace thermo {

struct SweepSpec {
  int start = 3;
  int step = 1;
  int end = 100;

  std::vector<int> values() const;
};

/// Ambient temperature handling. When `calibrate` is set, the ambient value is
/// chosen once per run so that the reference model (polygon, `target_n`)
/// reaches `target_max` on the surface path; the field is affine in t_ambient.
struct AmbientCalibration {
  bool calibrate = true;
  int target_n = 3;
  double target_max = 29.7;  // degC
};

struct MeshLevel {
  int nx = 18;
  int ny = 8;
  int nz = 5;
};

struct StudyConfig {
  TissueDims dims;
  ThermalParams thermal;
  ElasticParams elastic;
  bool deform = true;  // compress before the heat solve

  double base_area = 400.0;
  double prism_height = 8.0;
  double inner_radius = 10.0;
  double top_depth = 12.0;

  SweepSpec sweep;
  int local_factor = 2;
  double box_margin = 5.0;   // around the envelope of every swept footprint
  MeshLevel mesh;            // production level
  std::vector<MeshLevel> study_levels{{18, 8, 5}, {19, 11, 5}, {20, 13, 6}};
  int study_n = 10;

  double solver_tol = 1e-12;
  int profile_samples = 121;
  std::vector<int> slice_models{3, 10, 100};
  std::vector<int> profile_figure_models{3, 4, 5, 6, 8, 10, 20, 100};
  AmbientCalibration ambient;

  std::uint64_t seed = 1;
  int generalization_seeds = 5;
  RbfOptions rbf{1.0, 1e-10, WidthMode::Adaptive};
  std::size_t expected_rows = 98;  // 0 disables the dataset size check

  std::string out_dir = "out";
  int workers = 1;
};

StudyConfig load_config(const std::filesystem::path& path);
StudyConfig config_from_json(const std::string& text);
/// Every field, pretty printed; round-trips through config_from_json.
std::string config_to_json(const StudyConfig& cfg);
/// Stable 64-bit digest of the fields that influence results (not out_dir or workers).
std::string config_hash(const StudyConfig& cfg);

TumorShape tumor_shape(const StudyConfig& cfg, ShapeFamily family, int n);
/// Refinement box enclosing every footprint of both families over the sweep,
/// so that all models share one grid layout.
Box3 refinement_box(const StudyConfig& cfg);
RefinementSpec refinement(const StudyConfig& cfg, const MeshLevel& level);
SolverOptions solver_options(const StudyConfig& cfg);

}  // namespace thermo
