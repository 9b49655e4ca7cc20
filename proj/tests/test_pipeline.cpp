#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "thermo/errors.hpp"
#include "thermo/io.hpp"
#include "thermo/pipeline.hpp"

using namespace thermo;
namespace fs = std::filesystem;

namespace {

const ShapeFamily kPoly = ShapeFamily::RegularPolygon;
const ShapeFamily kStar = ShapeFamily::StarPolygon;

// Both families swept once and shared by the read-only checks below.
const fs::path& swept() {
  static const fs::path dir = [] {
    const fs::path d = testing::fresh_dir("pipeline_shared");
    const StudyConfig cfg = testing::small_study(d);
    run_sweep(cfg, kPoly, d);
    run_sweep(cfg, kStar, d);
    return d;
  }();
  return dir;
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("sweep writes every model artifact and a dataset in n order") {
  const fs::path d = swept();
  const StudyConfig cfg = testing::small_study(d);
  for (ShapeFamily f : {kPoly, kStar}) {
    CHECK(verify_manifest(cfg, f, d).empty());
    const auto rows = read_dataset_csv(family_dir(d, f) / "dataset.csv");
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].n == static_cast<int>(i) + 3);
      CHECK(rows[i].model_id == model_id(f, rows[i].n));
      CHECK(rows[i].fit_rmse_rel < 0.05);
    }
    const fs::path m = family_dir(d, f) / "models" / model_id(f, 4);
    for (const char* name : {"polygon.csv", "profile.csv", "signature.csv", "field.csv", "slice.csv", "slice.svg"}) {
      CHECK(fs::exists(m / name));
    }
    CHECK_FALSE(fs::exists(family_dir(d, f) / "models" / model_id(f, 3) / "slice.csv"));
  }
  CHECK(model_id(kPoly, 10) == "polygon_n010");
}

TEST_CASE("resuming a finished sweep solves nothing and keeps the dataset") {
  const fs::path d = swept();
  const std::string before = read_file(family_dir(d, kPoly) / "dataset.csv");
  const SweepReport r = run_sweep(testing::small_study(d), kPoly, d);
  CHECK(r.solved == 0);
  CHECK(r.skipped == 4);
  CHECK(r.failures.empty());
  CHECK(read_file(family_dir(d, kPoly) / "dataset.csv") == before);
}

TEST_CASE("a fresh sweep reproduces the dataset byte for byte, with any worker count") {
  const fs::path d = testing::fresh_dir("pipeline_repeat");
  StudyConfig cfg = testing::small_study(d);
  cfg.workers = 3;
  run_sweep(cfg, kStar, d);
  CHECK(read_file(family_dir(d, kStar) / "dataset.csv") == read_file(family_dir(swept(), kStar) / "dataset.csv"));
  CHECK(read_file(family_dir(d, kStar) / "models" / model_id(kStar, 5) / "field.csv") ==
        read_file(family_dir(swept(), kStar) / "models" / model_id(kStar, 5) / "field.csv"));
}

TEST_CASE("resuming under a different configuration is refused") {
  const fs::path d = testing::fresh_dir("pipeline_hash");
  StudyConfig cfg = testing::small_study(d);
  cfg.sweep = {3, 1, 3};
  run_sweep(cfg, kPoly, d);
  cfg.thermal.q_tumor *= 1.5;
  CHECK_THROWS_AS(run_sweep(cfg, kPoly, d), ArtifactError);
  // run-only settings do not change the hash
  StudyConfig same = testing::small_study(d);
  same.sweep = {3, 1, 3};
  same.workers = 4;
  same.out_dir = "elsewhere";
  CHECK(run_sweep(same, kPoly, d).skipped == 1);
}

TEST_CASE("manifest verification reports missing, unlisted and unfinished work") {
  const fs::path d = testing::fresh_dir("pipeline_verify");
  fs::copy(swept() / "polygon", d / "polygon", fs::copy_options::recursive);
  StudyConfig cfg = testing::small_study(d);
  fs::remove(d / "polygon" / "models" / model_id(kPoly, 5) / "profile.csv");
  std::ofstream(d / "polygon" / "models" / "stray.txt") << "x";
  const auto problems = verify_manifest(cfg, kPoly, d);
  CHECK(problems.size() == 2);
  cfg.sweep = {3, 1, 7};
  CHECK(verify_manifest(cfg, kPoly, d).size() == 3);
}

TEST_CASE("figures are all-or-nothing and regenerable from their CSV") {
  const fs::path partial = testing::fresh_dir("pipeline_fig_partial");
  fs::copy(swept() / "polygon", partial / "polygon", fs::copy_options::recursive);
  const StudyConfig pcfg = testing::small_study(partial);
  CHECK_THROWS_AS(make_figures(pcfg, partial), ArtifactError);
  CHECK(files_under(partial / "figures").empty());

  fs::copy(swept() / "star", partial / "star", fs::copy_options::recursive);
  fs::remove_all(partial / "star" / "models" / model_id(kStar, 6));
  try {
    make_figures(pcfg, partial);
    FAIL("expected ArtifactError");
  } catch (const ArtifactError& e) {
    CHECK(std::string(e.what()).find(model_id(kStar, 6)) != std::string::npos);
  }
  CHECK(files_under(partial / "figures").empty());

  const fs::path d = testing::fresh_dir("pipeline_fig");
  fs::copy(swept(), d, fs::copy_options::recursive);
  const StudyConfig cfg = testing::small_study(d);
  const auto written = make_figures(cfg, d);
  CHECK(written.size() == files_under(d / "figures").size());
  const fs::path fig = d / "figures";
  const CsvTable tmax = parse_csv(read_file(fig / "tmax_vs_n.csv"));
  CHECK(tmax.rows.size() == 8);
  CHECK(render_tmax_svg(tmax) == read_file(fig / "tmax_vs_n.svg"));
  for (const char* fam : {"polygon", "star"}) {
    const std::string f(fam);
    const CsvTable box = parse_csv(read_file(fig / ("boxplot_" + f + ".csv")));
    CHECK(box.rows.size() == 10);
    CHECK(render_box_svg(box) == read_file(fig / ("boxplot_" + f + ".svg")));
    for (const auto& row : box.rows) {
      CHECK(std::stod(row[box.column("min")]) >= -1.0);
      CHECK(std::stod(row[box.column("max")]) <= 1.0);
    }
    const CsvTable prof = parse_csv(read_file(fig / ("profiles_" + f + ".csv")));
    CHECK(prof.rows.size() == 2 * 121);
    CHECK(render_profiles_svg(prof) == read_file(fig / ("profiles_" + f + ".svg")));
    const CsvTable slice = parse_csv(read_file(fig / ("slice_" + f + "_n004.csv")));
    CHECK(render_slice_svg(slice) == read_file(fig / ("slice_" + f + "_n004.svg")));
  }
}

TEST_CASE("learning writes a model that reloads to the same predictions") {
  const fs::path d = testing::fresh_dir("pipeline_learn");
  const StudyConfig cfg = testing::small_study(d);
  const auto rows = read_dataset_csv(family_dir(swept(), kPoly) / "dataset.csv");
  const Dataset data = to_dataset(rows, kPoly);
  const LearningReport r = run_learning(data, cfg, d);
  CHECK(r.train.count == 3);
  CHECK(r.test.count == 1);
  CHECK(r.train.rmse < 1e-8);
  CHECK(r.seeds.size() == 5);
  for (const char* name : {"model.txt", "eval.csv", "eval.txt", "predictions.csv", "generalization.csv"}) {
    CHECK(fs::exists(d / name));
  }
  std::ifstream in(d / "model.txt");
  const RbfModel back = read_model(in);
  for (const auto& s : data.rows) CHECK(back.predict(s.features) == r.model.predict(s.features));
  const CsvTable eval = parse_csv(read_file(d / "eval.csv"));
  CHECK(eval.rows.size() == 2);
}

TEST_CASE("identical study levels agree exactly") {
  StudyConfig cfg = testing::small_study(testing::fresh_dir("pipeline_study"));
  cfg.study_levels = {{8, 4, 3}, {8, 4, 3}, {8, 4, 3}};
  const MeshStudyReport r = mesh_study(cfg, kPoly, 5, 24.0);
  REQUIRE(r.max_rel_diff.size() == 2);
  CHECK(r.max_rel_diff[0] == 0.0);
  CHECK(r.max_abs_diff[1] == 0.0);
  CHECK(r.passed);
  CHECK(r.levels[0].tets == r.levels[2].tets);
  const CsvTable csv = parse_csv(mesh_study_csv({r}));
  CHECK(csv.rows.size() == 3);
}

TEST_CASE("calibrated ambient puts the reference model on target") {
  StudyConfig cfg = testing::small_study(testing::fresh_dir("pipeline_cal"));
  const double ta = calibrate_ambient(cfg);
  const ModelRun run = run_model(cfg, kPoly, cfg.ambient.target_n, ta, cfg.mesh);
  CHECK(run.max.t == doctest::Approx(cfg.ambient.target_max).epsilon(1e-9));
  cfg.ambient.calibrate = false;
  CHECK(effective_ambient(cfg) == cfg.thermal.t_ambient);
}

TEST_CASE("configuration JSON round trips and the hash tracks results only") {
  StudyConfig cfg;
  cfg.thermal.q_tumor = 1.25e5;
  cfg.rbf.mode = WidthMode::Fixed;
  cfg.slice_models = {7};
  const std::string text = config_to_json(cfg);
  const StudyConfig back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));

  StudyConfig other = cfg;
  other.workers = 8;
  other.out_dir = "x";
  CHECK(config_hash(other) == config_hash(cfg));
  other.solver_tol = 1e-9;
  CHECK(config_hash(other) != config_hash(cfg));

  CHECK_THROWS_AS(config_from_json("{not json"), ParameterError);
  CHECK_THROWS_AS(config_from_json(R"({"sweep": {"start": 2}})"), ParameterError);
  CHECK_THROWS_AS(config_from_json(R"({"learn": {"width_mode": "wide"}})"), ParameterError);
}

TEST_CASE("dataset CSV round trips exactly") {
  const fs::path p = family_dir(swept(), kStar) / "dataset.csv";
  const auto rows = read_dataset_csv(p);
  CHECK(dataset_csv(rows) == read_file(p));
}

}
