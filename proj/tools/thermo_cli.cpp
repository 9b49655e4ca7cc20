#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "thermo/errors.hpp"
#include "thermo/pipeline.hpp"

using namespace thermo;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSolver = 2, kArtifacts = 3 };

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
  double t_ambient = 0.0;
  bool no_calibrate = false;
  double width = 0.0;
  std::string width_mode;
  double ridge = -1.0;
  double tol = 0.0;

  int n = 10;
  int level = 1;
  std::string file;
};

StudyConfig resolve(const Flags& f, const CLI::App& app) {
  StudyConfig cfg = f.config.empty() ? StudyConfig{} : load_config(f.config);
  if (app.count("--out")) cfg.out_dir = f.out;
  if (app.count("--seed")) cfg.seed = f.seed;
  if (app.count("--workers")) {
    if (f.workers < 1) throw ParameterError("--workers must be >= 1");
    cfg.workers = f.workers;
  }
  if (app.count("--t-ambient")) {
    cfg.thermal.t_ambient = f.t_ambient;
    cfg.ambient.calibrate = false;
  }
  if (f.no_calibrate) cfg.ambient.calibrate = false;
  if (app.count("--width")) cfg.rbf.width = f.width;
  if (app.count("--width-mode")) cfg.rbf.mode = f.width_mode == "fixed" ? WidthMode::Fixed : WidthMode::Adaptive;
  if (app.count("--ridge")) cfg.rbf.ridge = f.ridge;
  if (app.count("--tol")) cfg.solver_tol = f.tol;
  return cfg;
}

MeshLevel level_of(const StudyConfig& cfg, int level) {
  if (level == 0) return cfg.mesh;
  if (level < 1 || level > static_cast<int>(cfg.study_levels.size())) throw ParameterError("--level must be 0..3");
  return cfg.study_levels[static_cast<std::size_t>(level - 1)];
}

void emit(const std::string& file, const std::string& content) {
  if (file.empty() || file == "-") {
    std::cout << content;
  } else {
    write_file_atomic(file, content);
    std::cerr << "wrote " << file << "\n";
  }
}

template <class Fn>
std::string capture(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

int report_sweep(const SweepReport& r) {
  std::printf("%s: %zu solved, %zu already complete, %zu failed (t_ambient %.6f degC) -> %s\n",
              std::string(family_name(r.family)).c_str(), r.solved, r.skipped, r.failures.size(), r.t_ambient,
              r.dataset_path.string().c_str());
  for (const auto& f : r.failures) std::fprintf(stderr, "  %s failed: %s\n", f.model_id.c_str(), f.error.c_str());
  return r.failures.empty() ? kOk : kSolver;
}

std::vector<ShapeFamily> families_of(const std::string& name) {
  if (name == "both") return {ShapeFamily::RegularPolygon, ShapeFamily::StarPolygon};
  return {parse_family(name)};
}

int do_mesh_study(const StudyConfig& cfg, const std::vector<ShapeFamily>& families, int n) {
  const double ta = effective_ambient(cfg);
  std::vector<MeshStudyReport> reports;
  std::string text;
  for (ShapeFamily f : families) {
    reports.push_back(mesh_study(cfg, f, n, ta));
    const auto& r = reports.back();
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: levels %zu/%zu/%zu tets, max rel diff 1-2 %.4f %%, 2-3 %.4f %% -> %s\n",
                  model_id(f, n).c_str(), r.levels[0].tets, r.levels[1].tets, r.levels[2].tets,
                  100.0 * r.max_rel_diff[0], 100.0 * r.max_rel_diff[1], r.passed ? "independent (< 1 %)" : "NOT independent");
    text += buf;
  }
  const fs::path dir = fs::path(cfg.out_dir) / "mesh_study";
  write_file_atomic(dir / "mesh_study.csv", mesh_study_csv(reports));
  write_file_atomic(dir / "mesh_study.txt", text);
  std::cout << text;
  return kOk;
}

int do_learn(const StudyConfig& cfg, const std::vector<ShapeFamily>& families) {
  for (ShapeFamily f : families) {
    const fs::path ds = family_dir(cfg.out_dir, f) / "dataset.csv";
    if (!fs::exists(ds)) throw ArtifactError("missing dataset " + ds.string() + "; run the sweep first");
    const Dataset data = to_dataset(read_dataset_csv(ds), f);
    const LearningReport rep = run_learning(data, cfg, fs::path(cfg.out_dir) / "learn" / std::string(family_name(f)));
    std::cout << eval_text(rep, f) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile thermography study: FEM sweep, Fourier signatures and RBF learning"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "Study configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--seed", f.seed, "Split seed");
  app.add_option("--workers", f.workers, "Models solved in parallel");
  app.add_option("--t-ambient", f.t_ambient, "Fixed ambient temperature (disables calibration)");
  app.add_flag("--no-calibrate", f.no_calibrate, "Use the configured ambient temperature as is");
  app.add_option("--width", f.width, "RBF Gaussian width");
  app.add_option("--width-mode", f.width_mode, "RBF width mode")->check(CLI::IsMember({"fixed", "adaptive"}));
  app.add_option("--ridge", f.ridge, "RBF ridge");
  app.add_option("--tol", f.tol, "Relative CG tolerance");

  std::string geom_family = "polygon", mesh_family = "polygon", solve_family = "polygon", sweep_family;
  std::string study_family = "both", learn_family = "both";
  auto family_opt = [&](CLI::App* sub, std::string& target, bool both) {
    std::vector<std::string> allowed{"polygon", "star"};
    if (both) allowed.emplace_back("both");
    sub->add_option("--family", target, "Tumor family")->check(CLI::IsMember(allowed));
  };

  auto* geom = app.add_subcommand("geometry", "Write the tumor base polygon as CSV");
  family_opt(geom, geom_family, false);
  geom->add_option("--n", f.n, "Sides or wings")->check(CLI::Range(3, 1000));
  geom->add_option("--file", f.file, "Output CSV (default stdout)");

  auto* mesh = app.add_subcommand("mesh", "Build a mesh, export it or report its quality");
  std::string mesh_action = "build";
  mesh->add_option("action", mesh_action, "build | export | quality")->check(CLI::IsMember({"build", "export", "quality"}));
  family_opt(mesh, mesh_family, false);
  mesh->add_option("--n", f.n, "Sides or wings")->check(CLI::Range(3, 1000));
  mesh->add_option("--level", f.level, "0: production level, 1..3: study levels");
  mesh->add_option("--file", f.file, "Output file (default stdout)");

  auto* solve = app.add_subcommand("solve", "Solve one model and write its artifacts");
  family_opt(solve, solve_family, false);
  solve->add_option("--n", f.n, "Sides or wings")->check(CLI::Range(3, 1000));

  auto* sweep = app.add_subcommand("sweep", "Sweep n for one family (resumable)");
  sweep->add_option("--family", sweep_family, "Tumor family")->required()->check(CLI::IsMember({"polygon", "star"}));

  auto* study = app.add_subcommand("mesh-study", "Mesh independence at three refinement levels");
  family_opt(study, study_family, true);
  int study_n = -1;
  study->add_option("--n", study_n, "Model to study (default from config)");

  auto* learn = app.add_subcommand("learn", "Train and evaluate the RBF network on sweep datasets");
  family_opt(learn, learn_family, true);

  app.add_subcommand("figures", "Render figures and their CSV from sweep artifacts");
  app.add_subcommand("all", "Sweep both families, mesh study, learning and figures");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    StudyConfig cfg = resolve(f, app);
    if (geom->parsed()) {
      emit(f.file, capture([&](std::ostream& o) { write_polygon_csv(o, base_polygon(tumor_shape(cfg, parse_family(geom_family), f.n))); }));
      return kOk;
    }
    if (mesh->parsed()) {
      const GeometrySpec g = place_prism(tumor_shape(cfg, parse_family(mesh_family), f.n), cfg.dims);
      const TetMesh m = build_mesh(g, refinement(cfg, level_of(cfg, f.level)));
      if (mesh_action == "export") {
        emit(f.file, capture([&](std::ostream& o) { write_mesh(o, m); }));
      } else if (mesh_action == "quality") {
        emit(f.file, capture([&](std::ostream& o) { write_quality(o, mesh_quality(m)); }));
      } else {
        std::printf("nodes %zu\ntets %zu\nboundary faces %zu\nblock volume %.6f mm^3\n", m.node_count(), m.tet_count(),
                    m.faces.size(), total_volume(m));
        std::printf("tumor volume: exact %.6f, fractional %.6f, centroid-labelled %.6f mm^3\n",
                    shoelace_area(g.base) * (g.z_top - g.z_bottom), fractional_tumor_volume(m),
                    labeled_tumor_volume(m));
      }
      return kOk;
    }
    if (solve->parsed()) {
      const ShapeFamily fam = parse_family(solve_family);
      const double ta = effective_ambient(cfg);
      const ModelRun run = run_model(cfg, fam, f.n, ta, cfg.mesh);
      const fs::path dir = fs::path(cfg.out_dir) / "solve" / model_id(fam, f.n);
      write_file_atomic(dir / "polygon.csv", capture([&](std::ostream& o) { write_polygon_csv(o, run.geometry.base); }));
      write_file_atomic(dir / "profile.csv", profile_csv(run));
      write_file_atomic(dir / "signature.csv", dataset_csv({signature_row(fam, f.n, run)}));
      write_file_atomic(dir / "field.csv", capture([&](std::ostream& o) { write_field_csv(o, run.mesh, run.heat.temperature); }));
      const SliceGrid slice = surface_slice(run.mesh, run.heat.temperature, {Axis::Y, 0.5 * cfg.dims.y_len});
      const std::string slice_csv = capture([&](std::ostream& o) { write_slice_csv(o, slice); });
      write_file_atomic(dir / "slice.csv", slice_csv);
      write_file_atomic(dir / "slice.svg", render_slice_svg(parse_csv(slice_csv)));
      const auto feats = run.signature.features();
      std::printf("%s: %zu tets, t_ambient %.6f degC\n", model_id(fam, f.n).c_str(), run.mesh.tet_count(), ta);
      std::printf("elastic CG %d it, heat CG %d it, %.2f s\n", run.elastic.stats.iterations, run.heat.stats.iterations,
                  run.seconds);
      std::printf("heat balance: generated %.6e W, top %.6e W, bottom %.6e W, imbalance %.2e\n",
                  run.heat.balance.generated, run.heat.balance.top_outflow, run.heat.balance.bottom_outflow,
                  run.heat.balance.relative_imbalance());
      std::printf("T_max %.6f degC at x = %.3f mm, fit rmse/range %.3e\n", run.max.t, run.max.x * 1000.0,
                  run.signature.fit_rmse_rel);
      for (std::size_t k = 0; k < feats.size(); ++k) std::printf("  %-3s %.10g\n", kFeatureNames[k], feats[k]);
      std::printf("artifacts in %s\n", dir.string().c_str());
      return kOk;
    }
    if (sweep->parsed()) return report_sweep(run_sweep(cfg, parse_family(sweep_family), cfg.out_dir));
    if (study->parsed()) return do_mesh_study(cfg, families_of(study_family), study_n > 0 ? study_n : cfg.study_n);
    if (learn->parsed()) return do_learn(cfg, families_of(learn_family));
    if (app.got_subcommand("figures")) {
      for (const auto& p : make_figures(cfg, cfg.out_dir)) std::cout << "wrote " << p.string() << "\n";
      return kOk;
    }
    if (app.got_subcommand("all")) {
      write_file_atomic(fs::path(cfg.out_dir) / "config.json", config_to_json(cfg));
      int code = kOk;
      for (ShapeFamily fam : families_of("both")) code = std::max(code, report_sweep(run_sweep(cfg, fam, cfg.out_dir)));
      if (code != kOk) return code;
      for (ShapeFamily fam : families_of("both")) {
        const auto problems = verify_manifest(cfg, fam, cfg.out_dir);
        for (const auto& p : problems) std::fprintf(stderr, "manifest: %s\n", p.c_str());
        if (!problems.empty()) return kArtifacts;
      }
      do_mesh_study(cfg, families_of("both"), cfg.study_n);
      do_learn(cfg, families_of("both"));
      for (const auto& p : make_figures(cfg, cfg.out_dir)) std::cout << "wrote " << p.string() << "\n";
      return kOk;
    }
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const SingularSystemError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const DeformationError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const DegenerateFitError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const TrainingError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const ArtifactError& e) {
    std::fprintf(stderr, "incomplete artifacts: %s\n", e.what());
    return kArtifacts;
  } catch (const SizeError& e) {
    std::fprintf(stderr, "incomplete artifacts: %s\n", e.what());
    return kArtifacts;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
