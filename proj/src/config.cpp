#include "thermo/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "thermo/errors.hpp"

namespace thermo {
namespace {

using nlohmann::json;

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

json level_json(const MeshLevel& l) { return json{{"nx", l.nx}, {"ny", l.ny}, {"nz", l.nz}}; }

MeshLevel level_from(const json& j) {
  MeshLevel l;
  get_if(j, "nx", l.nx);
  get_if(j, "ny", l.ny);
  get_if(j, "nz", l.nz);
  return l;
}

json result_fields(const StudyConfig& c) {
  json j;
  j["tissue"] = {{"x_len_mm", c.dims.x_len}, {"y_len_mm", c.dims.y_len}, {"z_len_mm", c.dims.z_len}};
  j["thermal"] = {{"k_tissue", c.thermal.k_tissue}, {"k_tumor", c.thermal.k_tumor},
                  {"q_tumor", c.thermal.q_tumor},   {"h_top", c.thermal.h_top},
                  {"t_ambient", c.thermal.t_ambient}, {"t_bottom", c.thermal.t_bottom}};
  j["elastic"] = {{"e_tissue", c.elastic.e_tissue},
                  {"poisson", c.elastic.poisson},
                  {"tumor_stiffness_factor", c.elastic.tumor_stiffness_factor},
                  {"applied_strain", c.elastic.applied_strain},
                  {"deform", c.deform}};
  j["tumor"] = {{"base_area_mm2", c.base_area},
                {"prism_height_mm", c.prism_height},
                {"star_inner_radius_mm", c.inner_radius},
                {"top_depth_mm", c.top_depth}};
  j["sweep"] = {{"start", c.sweep.start}, {"step", c.sweep.step}, {"end", c.sweep.end}};
  json levels = json::array();
  for (const auto& l : c.study_levels) levels.push_back(level_json(l));
  j["mesh"] = {{"level", level_json(c.mesh)},
               {"local_factor", c.local_factor},
               {"box_margin_mm", c.box_margin},
               {"study_levels", levels},
               {"study_n", c.study_n}};
  j["solver"] = {{"rel_tol", c.solver_tol}};
  j["signature"] = {{"profile_samples", c.profile_samples}};
  j["ambient_calibration"] = {{"calibrate", c.ambient.calibrate},
                              {"target_n", c.ambient.target_n},
                              {"target_max", c.ambient.target_max}};
  j["learn"] = {{"seed", c.seed},
                {"generalization_seeds", c.generalization_seeds},
                {"width", c.rbf.width},
                {"ridge", c.rbf.ridge},
                {"width_mode", c.rbf.mode == WidthMode::Adaptive ? "adaptive" : "fixed"},
                {"expected_rows", c.expected_rows}};
  j["figures"] = {{"slice_models", c.slice_models}, {"profile_models", c.profile_figure_models}};
  return j;
}

void validate(const StudyConfig& c) {
  if (c.sweep.step <= 0 || c.sweep.start < 3 || c.sweep.end < c.sweep.start) {
    throw ParameterError("sweep needs start >= 3, step > 0 and end >= start");
  }
  if (c.workers < 1) throw ParameterError("workers must be >= 1");
  if (c.profile_samples < 41) throw ParameterError("profile_samples must be >= 41");
  if (c.study_levels.size() != 3) throw ParameterError("mesh study needs exactly three levels");
  if (c.generalization_seeds < 1) throw ParameterError("generalization_seeds must be >= 1");
}

}  // namespace

std::vector<int> SweepSpec::values() const {
  std::vector<int> v;
  for (int n = start; n <= end; n += step) v.push_back(n);
  return v;
}

StudyConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  StudyConfig c;
  try {
    if (j.contains("tissue")) {
      const auto& t = j["tissue"];
      get_if(t, "x_len_mm", c.dims.x_len);
      get_if(t, "y_len_mm", c.dims.y_len);
      get_if(t, "z_len_mm", c.dims.z_len);
    }
    if (j.contains("thermal")) {
      const auto& t = j["thermal"];
      get_if(t, "k_tissue", c.thermal.k_tissue);
      get_if(t, "k_tumor", c.thermal.k_tumor);
      get_if(t, "q_tumor", c.thermal.q_tumor);
      get_if(t, "h_top", c.thermal.h_top);
      get_if(t, "t_ambient", c.thermal.t_ambient);
      get_if(t, "t_bottom", c.thermal.t_bottom);
    }
    if (j.contains("elastic")) {
      const auto& e = j["elastic"];
      get_if(e, "e_tissue", c.elastic.e_tissue);
      get_if(e, "poisson", c.elastic.poisson);
      get_if(e, "tumor_stiffness_factor", c.elastic.tumor_stiffness_factor);
      get_if(e, "applied_strain", c.elastic.applied_strain);
      get_if(e, "deform", c.deform);
    }
    if (j.contains("tumor")) {
      const auto& t = j["tumor"];
      get_if(t, "base_area_mm2", c.base_area);
      get_if(t, "prism_height_mm", c.prism_height);
      get_if(t, "star_inner_radius_mm", c.inner_radius);
      get_if(t, "top_depth_mm", c.top_depth);
    }
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      get_if(s, "start", c.sweep.start);
      get_if(s, "step", c.sweep.step);
      get_if(s, "end", c.sweep.end);
    }
    if (j.contains("mesh")) {
      const auto& m = j["mesh"];
      if (m.contains("level")) c.mesh = level_from(m["level"]);
      get_if(m, "local_factor", c.local_factor);
      get_if(m, "box_margin_mm", c.box_margin);
      if (m.contains("study_levels")) {
        c.study_levels.clear();
        for (const auto& l : m["study_levels"]) c.study_levels.push_back(level_from(l));
      }
      get_if(m, "study_n", c.study_n);
    }
    if (j.contains("solver")) get_if(j["solver"], "rel_tol", c.solver_tol);
    if (j.contains("signature")) get_if(j["signature"], "profile_samples", c.profile_samples);
    if (j.contains("ambient_calibration")) {
      const auto& a = j["ambient_calibration"];
      get_if(a, "calibrate", c.ambient.calibrate);
      get_if(a, "target_n", c.ambient.target_n);
      get_if(a, "target_max", c.ambient.target_max);
    }
    if (j.contains("learn")) {
      const auto& l = j["learn"];
      get_if(l, "seed", c.seed);
      get_if(l, "generalization_seeds", c.generalization_seeds);
      get_if(l, "width", c.rbf.width);
      get_if(l, "ridge", c.rbf.ridge);
      get_if(l, "expected_rows", c.expected_rows);
      if (l.contains("width_mode")) {
        const std::string mode = l["width_mode"].get<std::string>();
        if (mode != "adaptive" && mode != "fixed") throw ParameterError("width_mode must be adaptive or fixed");
        c.rbf.mode = mode == "adaptive" ? WidthMode::Adaptive : WidthMode::Fixed;
      }
    }
    if (j.contains("figures")) {
      get_if(j["figures"], "slice_models", c.slice_models);
      get_if(j["figures"], "profile_models", c.profile_figure_models);
    }
    if (j.contains("run")) {
      get_if(j["run"], "out_dir", c.out_dir);
      get_if(j["run"], "workers", c.workers);
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config field has the wrong type: ") + e.what());
  }
  validate(c);
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const StudyConfig& cfg) {
  json j = result_fields(cfg);
  j["run"] = {{"out_dir", cfg.out_dir}, {"workers", cfg.workers}};
  return j.dump(2) + "\n";
}

std::string config_hash(const StudyConfig& cfg) {
  // FNV-1a over the canonical dump (object keys are sorted by nlohmann::json).
  const std::string text = result_fields(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

TumorShape tumor_shape(const StudyConfig& cfg, ShapeFamily family, int n) {
  TumorShape s;
  s.family = family;
  s.n = n;
  s.base_area = cfg.base_area;
  s.inner_radius = cfg.inner_radius;
  s.top_depth = cfg.top_depth;
  s.prism_height = cfg.prism_height;
  return s;
}

Box3 refinement_box(const StudyConfig& cfg) {
  double reach = 0.0;
  auto values = cfg.sweep.values();
  values.push_back(cfg.study_n);
  for (ShapeFamily f : {ShapeFamily::RegularPolygon, ShapeFamily::StarPolygon}) {
    for (int n : values) reach = std::max(reach, max_vertex_radius(base_polygon(tumor_shape(cfg, f, n))));
  }
  const double cx = 0.5 * cfg.dims.x_len, cy = 0.5 * cfg.dims.y_len;
  const double z_top = cfg.dims.z_len - cfg.top_depth;
  const double z_bottom = z_top - cfg.prism_height;
  const double r = reach + cfg.box_margin;
  Box3 b;
  b.lo[0] = std::max(0.0, cx - r);
  b.hi[0] = std::min(cfg.dims.x_len, cx + r);
  b.lo[1] = std::max(0.0, cy - r);
  b.hi[1] = std::min(cfg.dims.y_len, cy + r);
  b.lo[2] = std::max(0.0, z_bottom - cfg.box_margin);
  b.hi[2] = std::min(cfg.dims.z_len, z_top + cfg.box_margin);
  return b;
}

RefinementSpec refinement(const StudyConfig& cfg, const MeshLevel& level) {
  RefinementSpec r;
  r.nx = level.nx;
  r.ny = level.ny;
  r.nz = level.nz;
  r.local_factor = cfg.local_factor;
  r.box_margin = cfg.box_margin;
  r.box = refinement_box(cfg);
  return r;
}

SolverOptions solver_options(const StudyConfig& cfg) {
  SolverOptions o;
  o.rel_tol = cfg.solver_tol;
  return o;
}

}  // namespace thermo
