#include "thermo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "thermo/errors.hpp"
#include "thermo/svg.hpp"

namespace thermo {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

template <class Fn>
std::string to_string_with(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

bool is_solver_failure(const std::exception& e) {
  return dynamic_cast<const SolverError*>(&e) != nullptr || dynamic_cast<const SingularSystemError*>(&e) != nullptr;
}

// Append-only JSON-lines manifest; the first line identifies the run.
class Manifest {
 public:
  explicit Manifest(fs::path path) : path_(std::move(path)) {}

  struct Loaded {
    bool exists = false;
    std::string config_hash;
    double t_ambient = 0.0;
    std::map<int, ModelStatus> models;  // last record per n
  };

  Loaded load() const {
    Loaded out;
    std::ifstream in(path_);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        continue;  // torn final line from an interrupted run
      }
      if (j.value("kind", "") == "header") {
        out.exists = true;
        out.config_hash = j.value("config_hash", "");
        out.t_ambient = j.value("t_ambient", 0.0);
      } else if (j.value("kind", "") == "model") {
        ModelStatus s;
        s.model_id = j.value("model_id", "");
        s.n = j.value("n", 0);
        s.ok = j.value("status", "") == "ok";
        s.error = j.value("error", "");
        s.seconds = j.value("seconds", 0.0);
        s.artifacts = j.value("artifacts", std::vector<std::string>{});
        out.models[s.n] = s;
      }
    }
    return out;
  }

  void write_header(const std::string& hash, ShapeFamily family, double t_ambient) {
    append(json{{"kind", "header"},
                {"config_hash", hash},
                {"family", std::string(family_name(family))},
                {"t_ambient", t_ambient}});
  }

  void record(const ModelStatus& s) {
    json j{{"kind", "model"},          {"model_id", s.model_id}, {"n", s.n},
           {"status", s.ok ? "ok" : "failed"}, {"seconds", s.seconds}, {"artifacts", s.artifacts}};
    if (!s.ok) j["error"] = s.error;
    append(j);
  }

 private:
  void append(const json& j) {
    const std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw ArtifactError("cannot append to manifest " + path_.string());
  }

  fs::path path_;
  std::mutex mutex_;
};

bool artifacts_present(const fs::path& dir, const ModelStatus& s) {
  if (s.artifacts.empty()) return false;
  return std::all_of(s.artifacts.begin(), s.artifacts.end(),
                     [&](const std::string& a) { return fs::exists(dir / a); });
}

// Writes the per-model artifacts; returns their paths relative to `dir`.
std::vector<std::string> write_model_artifacts(const StudyConfig& cfg, const fs::path& dir, ShapeFamily family,
                                               int n, const ModelRun& run) {
  const std::string id = model_id(family, n);
  const std::string rel = "models/" + id + "/";
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back(rel + "polygon.csv",
                     to_string_with([&](std::ostream& o) { write_polygon_csv(o, run.geometry.base); }));
  files.emplace_back(rel + "profile.csv", profile_csv(run));
  files.emplace_back(rel + "signature.csv", dataset_csv({signature_row(family, n, run)}));
  files.emplace_back(rel + "field.csv", to_string_with([&](std::ostream& o) {
                       write_field_csv(o, run.mesh, run.heat.temperature);
                     }));
  if (std::find(cfg.slice_models.begin(), cfg.slice_models.end(), n) != cfg.slice_models.end()) {
    SlicePlane plane{Axis::Y, 0.5 * cfg.dims.y_len};
    const SliceGrid grid = surface_slice(run.mesh, run.heat.temperature, plane);
    const std::string csv = to_string_with([&](std::ostream& o) { write_slice_csv(o, grid); });
    files.emplace_back(rel + "slice.csv", csv);
    files.emplace_back(rel + "slice.svg", render_slice_svg(parse_csv(csv)));
  }
  std::vector<std::string> names;
  for (const auto& [name, content] : files) {
    write_file_atomic(dir / name, content);
    names.push_back(name);
  }
  return names;
}

std::vector<std::string> feature_header() {
  std::vector<std::string> h{"model_id", "family", "n"};
  for (const char* f : kFeatureNames) h.emplace_back(f);
  for (const char* f : {"fit_rmse_rel", "T_max", "x_max"}) h.emplace_back(f);
  return h;
}

}  // namespace

std::string profile_csv(const ModelRun& run) {
  std::string s = "x_mm,T_celsius,T_fit\n";
  for (std::size_t i = 0; i < run.profile.positions.size(); ++i) {
    const double x = run.profile.positions[i];
    s += fmt("%.10g", x * 1000.0) + "," + fmt_exact(run.profile.temps[i]) + "," +
         fmt_exact(run.signature.evaluate(x)) + "\n";
  }
  return s;
}

std::string model_id(ShapeFamily family, int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_n%03d", std::string(family_name(family)).c_str(), n);
  return buf;
}

fs::path family_dir(const fs::path& out_root, ShapeFamily family) {
  return out_root / std::string(family_name(family));
}

ModelRun run_model(const StudyConfig& cfg, ShapeFamily family, int n, double t_ambient, const MeshLevel& level) {
  const auto t0 = Clock::now();
  ModelRun r;
  r.geometry = place_prism(tumor_shape(cfg, family, n), cfg.dims);
  const TetMesh mesh = build_mesh(r.geometry, refinement(cfg, level));
  const SolverOptions opts = solver_options(cfg);
  if (cfg.deform) {
    r.elastic = solve_elastic(mesh, cfg.elastic, opts);
    r.mesh = deform_mesh(mesh, r.elastic.displacement);
  } else {
    r.mesh = mesh;
  }
  ThermalParams tp = cfg.thermal;
  tp.t_ambient = t_ambient;
  r.heat = solve_heat(r.mesh, tp, opts);
  r.profile = extract_profile(r.mesh, r.heat.temperature, static_cast<std::size_t>(cfg.profile_samples));
  r.signature = fit_fourier4(r.profile);
  r.max = max_surface_temp(r.profile);
  r.seconds = seconds_since(t0);
  return r;
}

double calibrate_ambient(const StudyConfig& cfg) {
  const ShapeFamily f = ShapeFamily::RegularPolygon;
  const int n = cfg.ambient.target_n;
  ModelRun base = run_model(cfg, f, n, cfg.thermal.t_ambient, cfg.mesh);
  ThermalParams tp = cfg.thermal;
  auto surface_max = [&](double ta) {
    tp.t_ambient = ta;
    const HeatSolution h = solve_heat(base.mesh, tp, solver_options(cfg));
    return max_surface_temp(extract_profile(base.mesh, h.temperature, static_cast<std::size_t>(cfg.profile_samples))).t;
  };
  // The field is affine in t_ambient; secant steps absorb solver round-off.
  double a = cfg.thermal.t_ambient, fa = base.max.t - cfg.ambient.target_max;
  double b = a - 1.0, fb = surface_max(b) - cfg.ambient.target_max;
  for (int it = 0; it < 6 && std::abs(fb) > 1e-10; ++it) {
    if (fb == fa) throw SolverError("ambient calibration: surface maximum does not depend on t_ambient", {});
    const double c = b - fb * (b - a) / (fb - fa);
    a = b;
    fa = fb;
    b = c;
    fb = surface_max(b) - cfg.ambient.target_max;
  }
  return b;
}

double effective_ambient(const StudyConfig& cfg) {
  return cfg.ambient.calibrate ? calibrate_ambient(cfg) : cfg.thermal.t_ambient;
}

SignatureRow signature_row(ShapeFamily family, int n, const ModelRun& run) {
  SignatureRow r;
  r.model_id = model_id(family, n);
  r.family = family;
  r.n = n;
  r.features = run.signature.features();
  r.fit_rmse_rel = run.signature.fit_rmse_rel;
  r.t_max = run.max.t;
  r.x_max_mm = run.max.x * 1000.0;
  return r;
}

std::string dataset_csv(const std::vector<SignatureRow>& rows) {
  std::string s;
  const auto header = feature_header();
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += '\n';
  for (const auto& r : rows) {
    s += r.model_id + "," + std::string(family_name(r.family)) + "," + std::to_string(r.n);
    for (double f : r.features) s += "," + fmt_exact(f);
    s += "," + fmt_exact(r.fit_rmse_rel) + "," + fmt_exact(r.t_max) + "," + fmt_exact(r.x_max_mm) + "\n";
  }
  return s;
}

std::vector<SignatureRow> read_dataset_csv(const fs::path& path) {
  const CsvTable t = parse_csv(read_file(path));
  if (t.header != feature_header()) throw ArtifactError("unexpected dataset header in " + path.string());
  std::vector<SignatureRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    SignatureRow r;
    r.model_id = t.rows[i][0];
    r.family = parse_family(t.rows[i][1]);
    r.n = static_cast<int>(t.number(i, "n"));
    for (std::size_t f = 0; f < kFeatureNames.size(); ++f) r.features[f] = t.number(i, kFeatureNames[f]);
    r.fit_rmse_rel = t.number(i, "fit_rmse_rel");
    r.t_max = t.number(i, "T_max");
    r.x_max_mm = t.number(i, "x_max");
    rows.push_back(r);
  }
  return rows;
}

Dataset to_dataset(const std::vector<SignatureRow>& rows, ShapeFamily family) {
  Dataset d;
  d.family = family;
  for (const auto& r : rows) {
    if (r.family != family) continue;
    Sample s;
    s.model_id = r.model_id;
    s.n = r.n;
    s.features.assign(r.features.begin(), r.features.end());
    s.target = r.n;
    d.rows.push_back(std::move(s));
  }
  return d;
}

SweepReport run_sweep(const StudyConfig& cfg, ShapeFamily family, const fs::path& out_root) {
  const fs::path dir = family_dir(out_root, family);
  fs::create_directories(dir / "models");
  Manifest manifest(dir / "manifest.jsonl");
  const std::string hash = config_hash(cfg);
  Manifest::Loaded prior = manifest.load();

  SweepReport report;
  report.family = family;
  if (prior.exists) {
    if (prior.config_hash != hash) {
      throw ArtifactError(dir.string() + " holds a run with a different configuration (hash " + prior.config_hash +
                          "); use a fresh output directory");
    }
    report.t_ambient = prior.t_ambient;
  } else {
    report.t_ambient = effective_ambient(cfg);
    manifest.write_header(hash, family, report.t_ambient);
  }

  std::vector<int> todo;
  for (int n : cfg.sweep.values()) {
    auto it = prior.models.find(n);
    if (it != prior.models.end() && it->second.ok && artifacts_present(dir, it->second)) {
      ++report.skipped;
    } else {
      todo.push_back(n);
    }
  }

  std::vector<ModelStatus> statuses(todo.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < todo.size(); k = next++) {
      const int n = todo[k];
      ModelStatus& s = statuses[k];
      s.model_id = model_id(family, n);
      s.n = n;
      const auto t0 = Clock::now();
      try {
        const ModelRun run = run_model(cfg, family, n, report.t_ambient, cfg.mesh);
        s.artifacts = write_model_artifacts(cfg, dir, family, n, run);
        s.ok = true;
      } catch (const std::exception& e) {
        s.ok = false;
        s.solver_failure = is_solver_failure(e);
        s.error = e.what();
      }
      s.seconds = seconds_since(t0);
      manifest.record(s);
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, cfg.workers));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(workers, todo.size()); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& s : statuses) {
    if (s.ok) {
      ++report.solved;
    } else {
      report.failures.push_back(s);
    }
  }

  // Reduce in model-id order from the per-model signature files.
  for (int n : cfg.sweep.values()) {
    const fs::path sig = dir / "models" / model_id(family, n) / "signature.csv";
    const bool failed = std::any_of(report.failures.begin(), report.failures.end(),
                                    [&](const ModelStatus& s) { return s.n == n; });
    if (failed || !fs::exists(sig)) continue;
    const auto rows = read_dataset_csv(sig);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  report.dataset_path = dir / "dataset.csv";
  write_file_atomic(report.dataset_path, dataset_csv(report.rows));
  return report;
}

std::vector<std::string> verify_manifest(const StudyConfig& cfg, ShapeFamily family, const fs::path& out_root) {
  const fs::path dir = family_dir(out_root, family);
  std::vector<std::string> problems;
  Manifest manifest(dir / "manifest.jsonl");
  const auto loaded = manifest.load();
  if (!loaded.exists) return {"no manifest in " + dir.string()};
  std::set<std::string> listed;
  for (int n : cfg.sweep.values()) {
    auto it = loaded.models.find(n);
    if (it == loaded.models.end() || !it->second.ok) {
      problems.push_back(model_id(family, n) + ": not completed");
      continue;
    }
    for (const auto& a : it->second.artifacts) {
      listed.insert(a);
      if (!fs::exists(dir / a)) problems.push_back(model_id(family, n) + ": missing " + a);
    }
  }
  if (fs::exists(dir / "models")) {
    std::vector<std::string> extra;
    for (const auto& e : fs::recursive_directory_iterator(dir / "models")) {
      if (!e.is_regular_file()) continue;
      const std::string rel = fs::relative(e.path(), dir).generic_string();
      if (!listed.count(rel)) extra.push_back("unlisted file " + rel);
    }
    std::sort(extra.begin(), extra.end());
    problems.insert(problems.end(), extra.begin(), extra.end());
  }
  return problems;
}

MeshStudyReport mesh_study(const StudyConfig& cfg, ShapeFamily family, int n, double t_ambient) {
  MeshStudyReport rep;
  rep.family = family;
  rep.n = n;
  std::vector<std::vector<double>> probes;
  for (const auto& level : cfg.study_levels) {
    const ModelRun run = run_model(cfg, family, n, t_ambient, level);
    MeshLevelResult r;
    r.level = level;
    r.nodes = run.mesh.node_count();
    r.tets = run.mesh.tet_count();
    r.seconds = run.seconds;
    r.heat_iterations = run.heat.stats.iterations;
    r.t_max = run.max.t;
    rep.levels.push_back(r);

    // Probes: the surface path plus an interior lattice below the compressed top.
    std::vector<double> values = run.profile.temps;
    const PointLocator locator(run.mesh);
    const double z_hi = cfg.dims.z_len * (1.0 - cfg.elastic.applied_strain) - 1.0;
    for (int i = 1; i <= 11; ++i) {
      for (int j = 1; j <= 5; ++j) {
        for (int k = 0; k <= 5; ++k) {
          const Point3 p{cfg.dims.x_len * i / 12.0, cfg.dims.y_len * j / 6.0, 1.0 + (z_hi - 1.0) * k / 5.0};
          values.push_back(sample_field(run.mesh, locator, run.heat.temperature, p));
        }
      }
    }
    probes.push_back(std::move(values));
  }
  for (std::size_t l = 0; l + 1 < probes.size(); ++l) {
    double rel = 0.0, abs_diff = 0.0;
    for (std::size_t i = 0; i < probes[l].size(); ++i) {
      const double a = probes[l][i], b = probes[l + 1][i];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      abs_diff = std::max(abs_diff, std::abs(a - b));
      rel = std::max(rel, std::abs(a - b) / std::abs(b));
    }
    rep.max_rel_diff.push_back(rel);
    rep.max_abs_diff.push_back(abs_diff);
  }
  rep.passed = !rep.max_rel_diff.empty() && rep.max_rel_diff[0] < 0.01;
  return rep;
}

std::string mesh_study_csv(const std::vector<MeshStudyReport>& reports) {
  std::string s = "model_id,level,nx,ny,nz,nodes,tets,seconds,heat_iterations,T_max,max_rel_diff_to_next,max_abs_diff_to_next\n";
  for (const auto& r : reports) {
    for (std::size_t l = 0; l < r.levels.size(); ++l) {
      const auto& v = r.levels[l];
      s += model_id(r.family, r.n) + "," + std::to_string(l + 1) + "," + std::to_string(v.level.nx) + "," +
           std::to_string(v.level.ny) + "," + std::to_string(v.level.nz) + "," + std::to_string(v.nodes) + "," +
           std::to_string(v.tets) + "," + fmt("%.3f", v.seconds) + "," + std::to_string(v.heat_iterations) + "," +
           fmt("%.10g", v.t_max) + ",";
      if (l < r.max_rel_diff.size()) {
        s += fmt("%.6e", r.max_rel_diff[l]) + "," + fmt("%.6e", r.max_abs_diff[l]);
      } else {
        s += ",";
      }
      s += "\n";
    }
  }
  return s;
}

std::string eval_csv(const EvalReport& train, const EvalReport& test) {
  std::string s = "split,count,rmse,mse,mean_err,variance,std,rounded_accuracy,rank_correlation\n";
  for (const auto& [name, r] : {std::pair<const char*, const EvalReport&>{"train", train}, {"test", test}}) {
    s += std::string(name) + "," + std::to_string(r.count) + "," + fmt_exact(r.rmse) + "," + fmt_exact(r.mse) + "," +
         fmt_exact(r.mean_err) + "," + fmt_exact(r.variance) + "," + fmt_exact(r.std_dev) + "," +
         fmt_exact(r.rounded_accuracy) + "," + fmt_exact(r.rank_correlation) + "\n";
  }
  return s;
}

std::string eval_text(const LearningReport& report, ShapeFamily family) {
  std::ostringstream o;
  o << "RBF network evaluation (" << family_name(family) << ")\n";
  o << "centers " << report.model.centers.size() << ", width " << report.model.options.width << " ("
    << (report.model.options.mode == WidthMode::Adaptive ? "adaptive" : "fixed") << "), ridge "
    << report.model.options.ridge << "\n\n";
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-8s %6s %12s %12s %12s %12s %12s %9s %9s\n", "split", "count", "RMSE", "MSE", "mean",
                "variance", "std", "accuracy", "rank_r");
  o << buf;
  for (const auto& [name, r] : {std::pair<const char*, const EvalReport&>{"train", report.train}, {"test", report.test}}) {
    std::snprintf(buf, sizeof buf, "%-8s %6zu %12.4e %12.4e %12.4e %12.4e %12.4e %9.4f %9.4f\n", name, r.count, r.rmse,
                  r.mse, r.mean_err, r.variance, r.std_dev, r.rounded_accuracy, r.rank_correlation);
    o << buf;
  }
  o << "\nseed  train_rmse    test_accuracy  test_rank_r\n";
  for (const auto& s : report.seeds) {
    std::snprintf(buf, sizeof buf, "%4llu  %.4e  %13.4f  %11.4f\n", static_cast<unsigned long long>(s.seed),
                  s.train_rmse, s.test_rounded_accuracy, s.test_rank_correlation);
    o << buf;
  }
  std::snprintf(buf, sizeof buf, "mean  %10s  %13.4f  %11.4f\n", "", report.mean_test_accuracy,
                report.mean_rank_correlation);
  o << buf;
  return o.str();
}

LearningReport run_learning(const Dataset& data, const StudyConfig& cfg, const fs::path& out_dir) {
  const SplitOptions split_opts{cfg.expected_rows, 68};
  LearningReport rep;
  auto train_eval = [&](std::uint64_t seed, RbfModel& model, EvalReport& train, EvalReport& test, Dataset& split) {
    split = split_dataset(data, seed, split_opts);
    const auto tr = split.rows_in(Split::Train);
    const auto te = split.rows_in(Split::Test);
    model = fit_rbf_network(tr, cfg.rbf);
    train = evaluate(model, tr);
    test = evaluate(model, te);
  };

  Dataset split;
  train_eval(cfg.seed, rep.model, rep.train, rep.test, split);
  for (int s = 1; s <= cfg.generalization_seeds; ++s) {
    RbfModel m;
    EvalReport tr, te;
    Dataset d;
    train_eval(static_cast<std::uint64_t>(s), m, tr, te, d);
    rep.seeds.push_back({static_cast<std::uint64_t>(s), tr.rmse, te.rounded_accuracy, te.rank_correlation});
    rep.mean_test_accuracy += te.rounded_accuracy / cfg.generalization_seeds;
    rep.mean_rank_correlation += te.rank_correlation / cfg.generalization_seeds;
  }

  write_file_atomic(out_dir / "model.txt", to_string_with([&](std::ostream& o) { write_model(o, rep.model); }));
  write_file_atomic(out_dir / "eval.csv", eval_csv(rep.train, rep.test));
  write_file_atomic(out_dir / "eval.txt", eval_text(rep, data.family));
  std::string pred = "model_id,n,split,predicted\n";
  for (std::size_t i = 0; i < split.rows.size(); ++i) {
    const auto& r = split.rows[i];
    pred += r.model_id + "," + std::to_string(r.n) + "," + (split.split[i] == Split::Train ? "train" : "test") + "," +
            fmt_exact(rep.model.predict(r.features)) + "\n";
  }
  write_file_atomic(out_dir / "predictions.csv", pred);
  std::string gen = "seed,train_rmse,test_rounded_accuracy,test_rank_correlation\n";
  for (const auto& s : rep.seeds) {
    gen += std::to_string(s.seed) + "," + fmt_exact(s.train_rmse) + "," + fmt_exact(s.test_rounded_accuracy) + "," +
           fmt_exact(s.test_rank_correlation) + "\n";
  }
  write_file_atomic(out_dir / "generalization.csv", gen);
  return rep;
}

// ---- figures ----

std::string render_tmax_svg(const CsvTable& csv) {
  std::map<std::string, svg::Series> by_family;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const std::string& fam = csv.rows[i][csv.column("family")];
    auto& s = by_family[fam];
    s.label = fam;
    s.x.push_back(csv.number(i, "n"));
    s.y.push_back(csv.number(i, "T_max"));
  }
  std::vector<svg::Series> series;
  for (auto& [k, s] : by_family) series.push_back(std::move(s));
  return svg::line_chart({"Maximum surface temperature vs number of sides / wings", "n", "T_max (degC)"}, series);
}

std::string render_profiles_svg(const CsvTable& csv) {
  std::map<int, svg::Series> by_n;
  std::string family;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    family = csv.rows[i][csv.column("family")];
    const int n = static_cast<int>(csv.number(i, "n"));
    auto& s = by_n[n];
    s.label = "n = " + std::to_string(n);
    s.x.push_back(csv.number(i, "x_mm"));
    s.y.push_back(csv.number(i, "T_celsius"));
  }
  std::vector<svg::Series> series;
  for (auto& [k, s] : by_n) series.push_back(std::move(s));
  return svg::line_chart({"Temperature along the surface path (" + family + ")", "x (mm)", "T (degC)"}, series);
}

std::string render_box_svg(const CsvTable& csv) {
  std::vector<std::string> labels;
  std::vector<BoxStats> boxes;
  std::string family;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    family = csv.rows[i][csv.column("family")];
    labels.push_back(csv.rows[i][csv.column("feature")]);
    boxes.push_back({csv.number(i, "min"), csv.number(i, "q1"), csv.number(i, "median"), csv.number(i, "q3"),
                     csv.number(i, "max")});
  }
  return svg::box_plot({"Normalized Fourier coefficients (" + family + ")", "coefficient", "normalized value"}, labels,
                       boxes);
}

std::string render_slice_svg(const CsvTable& csv) {
  if (csv.header.size() != 3) throw ArtifactError("slice CSV needs three columns");
  std::vector<double> u, v, values;
  std::set<double> us, vs;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    us.insert(csv.number(i, csv.header[0]));
    vs.insert(csv.number(i, csv.header[1]));
    values.push_back(csv.number(i, csv.header[2]));
  }
  u.assign(us.begin(), us.end());
  v.assign(vs.begin(), vs.end());
  if (u.size() * v.size() != values.size()) throw ArtifactError("slice CSV is not a complete grid");
  auto strip = [](std::string s) { return s.substr(0, s.find('_')) + " (mm)"; };
  return svg::heatmap({"Temperature in the mid cross-section (degC)", strip(csv.header[0]), strip(csv.header[1])}, u, v,
                      values);
}

std::vector<fs::path> make_figures(const StudyConfig& cfg, const fs::path& out_root) {
  const std::vector<ShapeFamily> families{ShapeFamily::RegularPolygon, ShapeFamily::StarPolygon};
  std::vector<std::pair<fs::path, std::string>> outputs;
  std::vector<std::string> missing;
  const fs::path fig = out_root / "figures";

  std::string tmax = "family,n,T_max\n";
  for (ShapeFamily f : families) {
    const std::string fam(family_name(f));
    const fs::path dir = family_dir(out_root, f);
    if (!fs::exists(dir / "dataset.csv")) throw ArtifactError("missing dataset " + (dir / "dataset.csv").string());
    const auto rows = read_dataset_csv(dir / "dataset.csv");
    if (rows.empty()) throw ArtifactError("dataset " + (dir / "dataset.csv").string() + " is empty");
    std::set<int> have;
    for (const auto& r : rows) have.insert(r.n);
    for (int n : cfg.sweep.values()) {
      if (!have.count(n)) missing.push_back(model_id(f, n));
    }
    for (const auto& r : rows) tmax += fam + "," + std::to_string(r.n) + "," + fmt_exact(r.t_max) + "\n";

    // raw coefficient statistics and the normalized box plot
    const Dataset data = to_dataset(rows, f);
    std::vector<FeatureVector> feats;
    for (const auto& s : data.rows) feats.push_back(s.features);
    const Normalizer norm = Normalizer::fit(feats);
    std::vector<Sample> normalized = data.rows;
    for (auto& s : normalized) s.features = norm.apply(s.features);
    std::string raw = "family,feature,min,q1,median,q3,max\n";
    std::string box = raw;
    for (std::size_t k = 0; k < kFeatureNames.size(); ++k) {
      for (auto [text, src] : {std::pair<std::string*, const std::vector<Sample>*>{&raw, &data.rows},
                               {&box, &normalized}}) {
        const BoxStats b = coefficient_stats(*src, k);
        *text += fam + "," + kFeatureNames[k] + "," + fmt_exact(b.min) + "," + fmt_exact(b.q1) + "," +
                 fmt_exact(b.median) + "," + fmt_exact(b.q3) + "," + fmt_exact(b.max) + "\n";
      }
    }
    outputs.emplace_back(fig / ("coefficients_" + fam + ".csv"), raw);
    outputs.emplace_back(fig / ("boxplot_" + fam + ".csv"), box);
    outputs.emplace_back(fig / ("boxplot_" + fam + ".svg"), render_box_svg(parse_csv(box)));

    std::string prof = "family,n,x_mm,T_celsius\n";
    for (int n : cfg.profile_figure_models) {
      const fs::path p = dir / "models" / model_id(f, n) / "profile.csv";
      if (!fs::exists(p)) {
        missing.push_back(model_id(f, n) + " (profile)");
        continue;
      }
      const CsvTable t = parse_csv(read_file(p));
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        prof += fam + "," + std::to_string(n) + "," + t.rows[i][t.column("x_mm")] + "," +
                t.rows[i][t.column("T_celsius")] + "\n";
      }
    }
    outputs.emplace_back(fig / ("profiles_" + fam + ".csv"), prof);

    for (int n : cfg.slice_models) {
      const fs::path p = dir / "models" / model_id(f, n) / "slice.csv";
      if (!fs::exists(p)) {
        missing.push_back(model_id(f, n) + " (slice)");
        continue;
      }
      const std::string csv = read_file(p);
      const std::string stem = "slice_" + model_id(f, n);
      outputs.emplace_back(fig / (stem + ".csv"), csv);
      outputs.emplace_back(fig / (stem + ".svg"), render_slice_svg(parse_csv(csv)));
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing artifacts for:";
    for (const auto& m : missing) msg += " " + m;
    throw ArtifactError(msg);
  }
  for (ShapeFamily f : families) {
    const std::string fam(family_name(f));
    const fs::path p = fig / ("profiles_" + fam + ".csv");
    const auto it = std::find_if(outputs.begin(), outputs.end(), [&](const auto& o) { return o.first == p; });
    outputs.emplace_back(fig / ("profiles_" + fam + ".svg"), render_profiles_svg(parse_csv(it->second)));
  }
  outputs.emplace_back(fig / "tmax_vs_n.csv", tmax);
  outputs.emplace_back(fig / "tmax_vs_n.svg", render_tmax_svg(parse_csv(tmax)));

  std::vector<fs::path> written;
  for (const auto& [path, content] : outputs) {
    write_file_atomic(path, content);
    written.push_back(path);
  }
  return written;
}

}  // namespace thermo
