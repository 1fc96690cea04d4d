#include "conservolast/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "conservolast/errors.hpp"

namespace conservolast {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

namespace {

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void check_schema(const Json& j, const char* schema) {
  if (!j.is_object()) throw InputError("expected a JSON object");
  if (j.contains("schema") && j["schema"] != schema) {
    throw InputError("unexpected schema " + j["schema"].dump() + ", expected " + schema);
  }
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec3 vec3_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json packed_json(const Mat3& m) {
  const SymPacked p = pack_symmetric(m);
  return Json(std::vector<double>(p.begin(), p.end()));
}

Mat3 packed_from(const Json& j) {
  if (!j.is_array() || j.size() != 6) throw InputError("expected a packed symmetric matrix of 6 numbers");
  SymPacked p{};
  for (int k = 0; k < 6; ++k) p[k] = j[k].get<double>();
  return unpack_symmetric(p);
}

}  // namespace

Json model_to_json(const EnergyModel& m) {
  Json j;
  j["schema"] = kModelSchema;
  j["kernel"] = {{"family", to_string(m.kernel.family())}, {"radius", m.kernel.radius()}};
  j["centers"] = Json::array();
  for (const VoigtStrain& c : m.centers) j["centers"].push_back(vec_json(c));
  j["grad_coeffs"] = Json::array();
  for (const Vec3& w : m.grad_coeffs) j["grad_coeffs"].push_back(vec_json(w));
  j["hess_coeffs"] = Json::array();
  for (const Mat3& w : m.hess_coeffs) j["hess_coeffs"].push_back(packed_json(w));
  j["stress_offset"] = vec_json(m.stress_offset);
  j["stiffness_offset"] = packed_json(m.stiffness_offset);
  j["energy_shift"] = m.energy_shift;
  return j;
}

EnergyModel model_from_json(const Json& j) {
  check_schema(j, kModelSchema);
  try {
    const Json& k = j.at("kernel");
    EnergyModel m;
    m.kernel = Kernel(kernel_family_from_string(get<std::string>(k, "family")), get<double>(k, "radius"));
    for (const Json& c : j.at("centers")) m.centers.push_back(vec3_from(c));
    for (const Json& w : j.value("grad_coeffs", Json::array())) m.grad_coeffs.push_back(vec3_from(w));
    for (const Json& w : j.value("hess_coeffs", Json::array())) m.hess_coeffs.push_back(packed_from(w));
    m.stress_offset = vec3_from(j.at("stress_offset"));
    m.stiffness_offset = packed_from(j.at("stiffness_offset"));
    m.energy_shift = j.value("energy_shift", 0.0);
    m.check();
    return m;
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed model: ") + e.what());
  }
}

Json tile_spec_to_json(const TileSpec& s) {
  return {{"family", to_string(s.family)},
          {"target_elements", s.target_elements},
          {"period", {s.period.x(), s.period.y()}},
          {"young", s.young},
          {"poisson", s.poisson},
          {"hole_radius", s.hole_radius},
          {"slit_length", s.slit_length},
          {"slit_gap", s.slit_gap},
          {"chevron_angle", s.chevron_angle},
          {"chevron_thickness", s.chevron_thickness}};
}

TileSpec tile_spec_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("tile spec must be an object");
  TileSpec s;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "family") s.family = tile_family_from_string(v.get<std::string>());
      else if (key == "target_elements") s.target_elements = v.get<int>();
      else if (key == "period") s.period = Vec2(v.at(0).get<double>(), v.at(1).get<double>());
      else if (key == "young") s.young = v.get<double>();
      else if (key == "poisson") s.poisson = v.get<double>();
      else if (key == "hole_radius") s.hole_radius = v.get<double>();
      else if (key == "slit_length") s.slit_length = v.get<double>();
      else if (key == "slit_gap") s.slit_gap = v.get<double>();
      else if (key == "chevron_angle") s.chevron_angle = v.get<double>();
      else if (key == "chevron_thickness") s.chevron_thickness = v.get<double>();
      else throw InputError("unknown tile spec key '" + key + "'");
    } catch (const Json::exception& e) {
      throw InputError("bad tile spec value for '" + key + "': " + e.what());
    }
  }
  return s;
}

Json mesh_to_json(const Mesh& mesh) {
  Json j;
  j["schema"] = kMeshSchema;
  j["vertices"] = Json::array();
  for (const Vec2& v : mesh.vertices) j["vertices"].push_back({v.x(), v.y()});
  j["triangles"] = mesh.triangles;
  j["materials"] = Json::array();
  for (const NeoHookean& m : mesh.materials) j["materials"].push_back({{"mu", m.mu}, {"lambda", m.lambda}});
  j["element_material"] = mesh.element_material;
  return j;
}

Json tile_to_json(const Tile& tile) {
  Json j = mesh_to_json(tile.mesh);
  j["period"] = {tile.period.x(), tile.period.y()};
  j["periodic_pairs"] = Json::array();
  for (const PeriodicPair& p : tile.periodic_pairs) {
    j["periodic_pairs"].push_back({p.source, p.image, p.offset.x(), p.offset.y()});
  }
  j["spec"] = tile_spec_to_json(tile.spec);
  return j;
}

Mesh mesh_from_json(const Json& j) {
  check_schema(j, kMeshSchema);
  Mesh mesh;
  try {
    for (const Json& v : j.at("vertices")) mesh.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    for (const Json& m : j.at("materials")) mesh.materials.push_back({m.at("mu").get<double>(), m.at("lambda").get<double>()});
    if (j.contains("triangles")) {
      mesh.triangles = j["triangles"].get<std::vector<std::array<int, 3>>>();
      if (j.contains("element_material")) {
        mesh.element_material = j["element_material"].get<std::vector<int>>();
      } else {
        mesh.element_material.assign(mesh.triangles.size(), 0);
      }
    }
    if (j.contains("quads")) {
      const auto quads = j["quads"].get<std::vector<std::array<int, 4>>>();
      std::vector<int> qmat(quads.size(), 0);
      if (j.contains("quad_material")) qmat = j["quad_material"].get<std::vector<int>>();
      if (qmat.size() != quads.size()) throw InputError("quad_material length differs from quads");
      for (std::size_t q = 0; q < quads.size(); ++q) {
        const auto& c = quads[q];
        mesh.triangles.push_back({c[0], c[1], c[2]});
        mesh.triangles.push_back({c[0], c[2], c[3]});
        mesh.element_material.push_back(qmat[q]);
        mesh.element_material.push_back(qmat[q]);
      }
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed mesh: ") + e.what());
  }
  mesh.check();
  return mesh;
}

Tile tile_from_json(const Json& j) {
  Tile tile;
  tile.mesh = mesh_from_json(j);
  try {
    if (!j.contains("period") || !j.contains("periodic_pairs")) throw InputError("tile file lacks periodic data");
    tile.period = Vec2(j["period"].at(0).get<double>(), j["period"].at(1).get<double>());
    for (const Json& p : j["periodic_pairs"]) {
      tile.periodic_pairs.push_back(
          {p.at(0).get<int>(), p.at(1).get<int>(), Vec2(p.at(2).get<double>(), p.at(3).get<double>())});
    }
    if (j.contains("spec")) tile.spec = tile_spec_from_json(j["spec"]);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed tile: ") + e.what());
  }
  tile.check();
  return tile;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["schema"] = kConfigSchema;
  j["tile"] = tile_spec_to_json(c.tile);
  j["grid"] = {{"lambda1_lo", c.grid.lambda1_lo},
               {"lambda1_hi", c.grid.lambda1_hi},
               {"n_lambda1", c.grid.n_lambda1},
               {"n_theta", c.grid.n_theta},
               {"lambda2_offset", c.grid.lambda2_offset}};
  j["fit"] = {{"max_rbfs", c.fit.max_rbfs},
              {"target_error", c.fit.target_error},
              {"radius_grid", c.fit.radius_grid},
              {"kernel", to_string(c.fit.kernel_family)},
              {"kmeans_restarts", c.fit.kmeans_restarts},
              {"condition_limit", c.fit.condition_limit}};
  j["kernels"] = Json::array();
  for (KernelFamily f : c.kernels) j["kernels"].push_back(to_string(f));
  j["compare_centers"] = c.compare_centers;
  j["seed"] = c.seed;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  check_schema(j, kConfigSchema);
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "schema") continue;
      if (key == "tile") {
        c.tile = tile_spec_from_json(v);
      } else if (key == "grid") {
        for (const auto& [gk, gv] : v.items()) {
          if (gk == "lambda1_lo") c.grid.lambda1_lo = gv.get<double>();
          else if (gk == "lambda1_hi") c.grid.lambda1_hi = gv.get<double>();
          else if (gk == "n_lambda1") c.grid.n_lambda1 = gv.get<int>();
          else if (gk == "n_theta") c.grid.n_theta = gv.get<int>();
          else if (gk == "lambda2_offset") c.grid.lambda2_offset = gv.get<double>();
          else throw InputError("unknown grid key '" + gk + "'");
        }
      } else if (key == "fit") {
        for (const auto& [fk, fv] : v.items()) {
          if (fk == "max_rbfs") c.fit.max_rbfs = fv.get<int>();
          else if (fk == "target_error") c.fit.target_error = fv.get<double>();
          else if (fk == "radius_grid") c.fit.radius_grid = fv.get<std::vector<double>>();
          else if (fk == "kernel") c.fit.kernel_family = kernel_family_from_string(fv.get<std::string>());
          else if (fk == "kmeans_restarts") c.fit.kmeans_restarts = fv.get<int>();
          else if (fk == "condition_limit") c.fit.condition_limit = fv.get<double>();
          else throw InputError("unknown fit key '" + fk + "'");
        }
      } else if (key == "kernels") {
        c.kernels.clear();
        for (const Json& f : v) c.kernels.push_back(kernel_family_from_string(f.get<std::string>()));
      } else if (key == "compare_centers") {
        c.compare_centers = v.get<int>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else {
        throw InputError("unknown config key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  c.fit.kmeans_seed = c.seed;
  c.fit.check();
  return c;
}

namespace {

Json sample_errors_json(std::span<const SampleError> rows) {
  Json a = Json::array();
  for (const SampleError& e : rows) {
    a.push_back({{"stress_target_norm", e.stress_target_norm},
                 {"stress_fit_norm", e.stress_fit_norm},
                 {"stress_pct", e.stress_pct},
                 {"stiffness_target_norm", e.stiffness_target_norm},
                 {"stiffness_fit_norm", e.stiffness_fit_norm},
                 {"stiffness_pct", e.stiffness_pct}});
  }
  return a;
}

// JSON has no NaN; infeasible entries are written as null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json fit_report_to_json(const FitReport& r) {
  Json j;
  j["schema"] = kFitReportSchema;
  j["stress_error_pct"] = r.stress_error_pct;
  j["stiffness_error_pct"] = r.stiffness_error_pct;
  j["mean_error_pct"] = r.mean_error_pct;
  j["objective"] = r.objective;
  j["n_rbfs"] = r.n_rbfs;
  j["chosen_radius"] = r.chosen_radius;
  j["condition_estimate"] = r.condition_estimate;
  j["s_rms"] = r.s_rms;
  j["k_rms"] = r.k_rms;
  j["parameter_count"] = r.parameter_count;
  j["radius_sweep"] = Json::array();
  for (const RadiusCandidate& c : r.radius_sweep) {
    j["radius_sweep"].push_back({{"radius", c.radius},
                                 {"feasible", c.feasible},
                                 {"objective", number_or_null(c.objective)},
                                 {"mean_error_pct", number_or_null(c.mean_error_pct)}});
  }
  j["greedy_history"] = Json::array();
  for (const GreedyStep& s : r.greedy_history) {
    j["greedy_history"].push_back({{"n_rbfs", s.n_rbfs},
                                   {"radius", s.radius},
                                   {"feasible", s.feasible},
                                   {"mean_error_pct", number_or_null(s.mean_error_pct)},
                                   {"best_so_far_pct", number_or_null(s.best_so_far_pct)}});
  }
  j["per_sample"] = sample_errors_json(r.per_sample_errors);
  return j;
}

Json validation_report_to_json(const ValidationReport& r) {
  Json j;
  j["schema"] = kValidationSchema;
  j["tile_id"] = r.tile_id;
  j["grid"] = r.grid;
  j["seed"] = r.seed;
  j["split"] = r.split;
  j["stress_error_pct"] = r.stress_error_pct;
  j["stiffness_error_pct"] = r.stiffness_error_pct;
  j["orthogonal_error_pct"] = r.orthogonal_error_pct;
  j["orthogonal_mean_error_pct"] = r.orthogonal_mean_error_pct;
  j["s_rms"] = r.s_rms;
  j["k_rms"] = r.k_rms;
  j["per_sample"] = sample_errors_json(r.per_sample);
  j["orthogonal"] = Json::array();
  for (const OrthogonalPoint& p : r.orthogonal_points) {
    j["orthogonal"].push_back({{"lambda1", p.lambda1},
                               {"theta", p.theta},
                               {"lambda2_reference", p.lambda2_reference},
                               {"lambda2_model", p.lambda2_model},
                               {"error_pct", p.error_pct}});
  }
  return j;
}

Json extrapolation_to_json(const ExtrapolationResult& r, SplitKind split) {
  Json j;
  j["schema"] = kExtrapolationSchema;
  j["split"] = to_string(split);
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["train_error_pct"] = r.train_error_pct;
  j["test_error_pct"] = r.test_error_pct;
  j["train_stress_error_pct"] = r.train_report.stress_error_pct;
  j["train_stiffness_error_pct"] = r.train_report.stiffness_error_pct;
  j["test_stress_error_pct"] = r.test_report.stress_error_pct;
  j["test_stiffness_error_pct"] = r.test_report.stiffness_error_pct;
  j["n_rbfs"] = r.train_report.n_rbfs;
  return j;
}

Json ablation_to_json(const std::string& mode, std::span<const AblationRow> rows) {
  Json j;
  j["schema"] = kComparisonSchema;
  j["mode"] = mode;
  j["rows"] = Json::array();
  for (const AblationRow& r : rows) {
    j["rows"].push_back({{"label", r.label},
                         {"n_rbfs", r.n_rbfs},
                         {"parameter_count", r.parameter_count},
                         {"decomposition", r.decomposition},
                         {"stress_error_pct", r.stress_error_pct},
                         {"stiffness_error_pct", r.stiffness_error_pct}});
  }
  return j;
}

Json kernel_rows_to_json(std::span<const KernelRow> rows) {
  Json j;
  j["schema"] = kComparisonSchema;
  j["mode"] = "rbf-types";
  j["rows"] = Json::array();
  for (const KernelRow& r : rows) {
    j["rows"].push_back({{"kernel", to_string(r.family)},
                         {"radius", r.radius},
                         {"stress_error_pct", r.stress_error_pct},
                         {"stiffness_error_pct", r.stiffness_error_pct},
                         {"mean_error_pct", r.mean_error_pct}});
  }
  return j;
}

std::string samples_csv_header() {
  return "E_xx,E_yy,E_xy2,s_1,s_2,s_3,K_11,K_12,K_13,K_22,K_23,K_33,psi,lambda1,lambda2,theta,flags";
}

void write_samples_csv(std::ostream& out, std::span<const TrainingSample> samples) {
  out << samples_csv_header() << '\n';
  for (const TrainingSample& s : samples) {
    for (int i = 0; i < 3; ++i) out << format_double(s.strain(i)) << ',';
    for (int i = 0; i < 3; ++i) out << format_double(s.stress(i)) << ',';
    const SymPacked k = pack_symmetric(s.stiffness);
    for (double v : k) out << format_double(v) << ',';
    if (s.energy) out << format_double(*s.energy);
    out << ',' << format_double(s.lambda1) << ',' << format_double(s.lambda2) << ',' << format_double(s.theta)
        << ',' << s.flags << '\n';
  }
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw InputError("line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::vector<TrainingSample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty samples file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != samples_csv_header()) throw InputError("unexpected samples header: " + line);
  std::vector<TrainingSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 17) {
      throw InputError("line " + std::to_string(line_no) + ": expected 17 fields, got " + std::to_string(fields.size()));
    }
    TrainingSample s;
    for (int i = 0; i < 3; ++i) s.strain(i) = parse_double(fields[i], line_no);
    for (int i = 0; i < 3; ++i) s.stress(i) = parse_double(fields[3 + i], line_no);
    SymPacked k{};
    for (int i = 0; i < 6; ++i) k[i] = parse_double(fields[6 + i], line_no);
    s.stiffness = unpack_symmetric(k);
    if (!fields[12].empty()) s.energy = parse_double(fields[12], line_no);
    s.lambda1 = parse_double(fields[13], line_no);
    s.lambda2 = parse_double(fields[14], line_no);
    s.theta = parse_double(fields[15], line_no);
    std::uint32_t flags = 0;
    const auto [ptr, ec] = std::from_chars(fields[16].data(), fields[16].data() + fields[16].size(), flags);
    if (ec != std::errc() || ptr != fields[16].data() + fields[16].size()) {
      throw InputError("line " + std::to_string(line_no) + ": bad flags");
    }
    s.flags = flags;
    if (!s.strain.allFinite() || !s.stress.allFinite() || (s.has_stiffness() && !s.stiffness.allFinite())) {
      throw InputError("line " + std::to_string(line_no) + ": non-finite strain, stress or stiffness");
    }
    out.push_back(s);
  }
  return out;
}

void write_samples_file(const std::filesystem::path& path, std::span<const TrainingSample> samples) {
  std::ostringstream os;
  write_samples_csv(os, samples);
  write_text_file(path, os.str());
}

std::vector<TrainingSample> read_samples_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_samples_csv(in);
}

void write_errors_csv(std::ostream& out, std::span<const SampleError> rows) {
  out << "index,stress_target_norm,stress_fit_norm,stress_pct,stiffness_target_norm,stiffness_fit_norm,stiffness_pct\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SampleError& e = rows[i];
    out << i << ',' << format_double(e.stress_target_norm) << ',' << format_double(e.stress_fit_norm) << ','
        << format_double(e.stress_pct) << ',' << format_double(e.stiffness_target_norm) << ','
        << format_double(e.stiffness_fit_norm) << ',' << format_double(e.stiffness_pct) << '\n';
  }
}

void write_orthogonal_csv(std::ostream& out, std::span<const OrthogonalPoint> rows) {
  out << "lambda1,theta,lambda2_reference,lambda2_model,error_pct\n";
  for (const OrthogonalPoint& p : rows) {
    out << format_double(p.lambda1) << ',' << format_double(p.theta) << ',' << format_double(p.lambda2_reference)
        << ',' << format_double(p.lambda2_model) << ',' << format_double(p.error_pct) << '\n';
  }
}

}  // namespace conservolast
