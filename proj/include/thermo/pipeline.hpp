#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "thermo/config.hpp"
#include "thermo/fem.hpp"
#include "thermo/io.hpp"
#include "thermo/learn.hpp"
#include "thermo/signature.hpp"

namespace thermo {

namespace fs = std::filesystem;

std::string model_id(ShapeFamily family, int n);  // e.g. "polygon_n010"

/// Everything computed for one tumor model.
struct ModelRun {
  GeometrySpec geometry;
  TetMesh mesh;  // deformed when cfg.deform
  ElasticSolution elastic;
  HeatSolution heat;
  SurfaceProfile profile;
  FourierSignature signature;
  SurfaceMax max;
  double seconds = 0.0;
};

/// geometry -> mesh -> (elastic, deform) -> heat -> profile -> signature
ModelRun run_model(const StudyConfig& cfg, ShapeFamily family, int n, double t_ambient, const MeshLevel& level);

/// Ambient temperature used for a run: the configured value, or the value that
/// puts the reference polygon model at the target surface maximum.
double calibrate_ambient(const StudyConfig& cfg);
double effective_ambient(const StudyConfig& cfg);

/// One dataset CSV row.
struct SignatureRow {
  std::string model_id;
  ShapeFamily family = ShapeFamily::RegularPolygon;
  int n = 0;
  std::array<double, 10> features{};  // a0, a1..a4, b1..b4, w
  double fit_rmse_rel = 0.0;
  double t_max = 0.0;     // degC
  double x_max_mm = 0.0;  // position of t_max along the path
};

/// x_mm,T_celsius,T_fit along the surface path.
std::string profile_csv(const ModelRun& run);

SignatureRow signature_row(ShapeFamily family, int n, const ModelRun& run);
std::string dataset_csv(const std::vector<SignatureRow>& rows);
std::vector<SignatureRow> read_dataset_csv(const fs::path& path);
Dataset to_dataset(const std::vector<SignatureRow>& rows, ShapeFamily family);

struct ModelStatus {
  std::string model_id;
  int n = 0;
  bool ok = false;
  bool solver_failure = false;
  std::string error;
  double seconds = 0.0;
  std::vector<std::string> artifacts;  // relative to the family directory
};

struct SweepReport {
  ShapeFamily family = ShapeFamily::RegularPolygon;
  double t_ambient = 0.0;
  std::size_t solved = 0;
  std::size_t skipped = 0;  // already complete in the manifest
  std::vector<ModelStatus> failures;
  std::vector<SignatureRow> rows;  // completed models in n order
  fs::path dataset_path;
};

/// Sweeps n over cfg.sweep for one family under out_root/<family>/. Completed
/// models recorded in the manifest are not solved again. A failing model is
/// recorded and the sweep continues.
SweepReport run_sweep(const StudyConfig& cfg, ShapeFamily family, const fs::path& out_root);

fs::path family_dir(const fs::path& out_root, ShapeFamily family);

/// Problems found comparing a family directory with its manifest: artifacts
/// listed but missing, files present but unlisted, models not completed.
std::vector<std::string> verify_manifest(const StudyConfig& cfg, ShapeFamily family, const fs::path& out_root);

struct MeshLevelResult {
  MeshLevel level;
  std::size_t nodes = 0;
  std::size_t tets = 0;
  double seconds = 0.0;
  int heat_iterations = 0;
  double t_max = 0.0;
};

struct MeshStudyReport {
  ShapeFamily family = ShapeFamily::RegularPolygon;
  int n = 0;
  std::vector<MeshLevelResult> levels;
  std::vector<double> max_rel_diff;  // consecutive levels, |Ta - Tb| / |Tb| over the probes
  std::vector<double> max_abs_diff;  // degC
  bool passed = false;               // levels 1-2 below 1 %
};

MeshStudyReport mesh_study(const StudyConfig& cfg, ShapeFamily family, int n, double t_ambient);
std::string mesh_study_csv(const std::vector<MeshStudyReport>& reports);

struct SeedResult {
  std::uint64_t seed = 0;
  double train_rmse = 0.0;
  double test_rounded_accuracy = 0.0;
  double test_rank_correlation = 0.0;
};

struct LearningReport {
  EvalReport train;
  EvalReport test;
  RbfModel model;
  std::vector<SeedResult> seeds;
  double mean_test_accuracy = 0.0;
  double mean_rank_correlation = 0.0;
};

/// Split, normalize, train and evaluate with cfg.seed, plus the same protocol
/// over seeds 1..cfg.generalization_seeds. Writes model and reports to out_dir.
LearningReport run_learning(const Dataset& data, const StudyConfig& cfg, const fs::path& out_dir);

std::string eval_csv(const EvalReport& train, const EvalReport& test);
std::string eval_text(const LearningReport& report, ShapeFamily family);

/// Renders every figure and its CSV under out_root/figures from the sweep
/// artifacts. Everything is validated and rendered before anything is
/// written. Returns the written paths.
std::vector<fs::path> make_figures(const StudyConfig& cfg, const fs::path& out_root);

/// Figure renderers take only the companion CSV.
std::string render_tmax_svg(const CsvTable& csv);
std::string render_profiles_svg(const CsvTable& csv);
std::string render_box_svg(const CsvTable& csv);
std::string render_slice_svg(const CsvTable& csv);

}  // namespace thermo
