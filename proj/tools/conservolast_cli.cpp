#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conservolast/baselines.hpp"
#include "conservolast/errors.hpp"
#include "conservolast/homogenize.hpp"
#include "conservolast/io.hpp"
#include "conservolast/validate.hpp"

namespace fs = std::filesystem;
using namespace conservolast;

namespace {

struct Options {
  std::string tile;
  std::string samples;
  std::string config;
  std::string model;
  std::string out;
  std::string grid;
  std::string kernel;
  std::string mode;
  std::string split = "lower-half-stretch";
  std::string input;
  std::string kind;
  std::string family;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_rbfs;
  std::optional<double> target_error;
  std::optional<int> elements;
  std::optional<double> hole_radius;
  std::optional<int> centers;
};

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

double to_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw InputError("bad number '" + s + "' in --grid");
  return v;
}

// "lambda1:lo:hi:n,theta:n"; either part may be omitted.
void apply_grid(const std::string& spec, SamplingGrid& grid) {
  for (const std::string& part : split_on(spec, ',')) {
    const auto f = split_on(part, ':');
    if (!f.empty() && f[0] == "lambda1" && f.size() == 4) {
      grid.lambda1_lo = to_number(f[1]);
      grid.lambda1_hi = to_number(f[2]);
      grid.n_lambda1 = static_cast<int>(to_number(f[3]));
    } else if (!f.empty() && f[0] == "theta" && f.size() == 2) {
      grid.n_theta = static_cast<int>(to_number(f[1]));
    } else {
      throw InputError("bad --grid component '" + part + "', expected lambda1:lo:hi:n or theta:n");
    }
  }
  if (grid.n_lambda1 < 1 || grid.n_theta < 1 || !(grid.lambda1_lo > 0.0) || grid.lambda1_hi < grid.lambda1_lo) {
    throw InputError("empty or invalid sampling grid");
  }
}

ExperimentConfig load_config(const Options& o) {
  ExperimentConfig c;
  if (!o.config.empty()) c = config_from_json(read_json_file(o.config));
  if (!o.grid.empty()) apply_grid(o.grid, c.grid);
  if (!o.kernel.empty()) c.fit.kernel_family = kernel_family_from_string(o.kernel);
  if (o.max_rbfs) c.fit.max_rbfs = *o.max_rbfs;
  if (o.target_error) c.fit.target_error = *o.target_error;
  if (o.seed) c.seed = *o.seed;
  if (o.centers) c.compare_centers = *o.centers;
  c.fit.kmeans_seed = c.seed;
  c.fit.check();
  return c;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InputError(std::string("missing required option ") + flag);
}

std::string grid_label(const SamplingGrid& g) {
  return "lambda1:" + format_double(g.lambda1_lo) + ":" + format_double(g.lambda1_hi) + ":" +
         std::to_string(g.n_lambda1) + ",theta:" + std::to_string(g.n_theta);
}

void cmd_gen_tile(const Options& o) {
  require(o.out, "--out");
  ExperimentConfig c = load_config(o);
  if (!o.family.empty()) c.tile.family = tile_family_from_string(o.family);
  if (o.elements) c.tile.target_elements = *o.elements;
  if (o.hole_radius) c.tile.hole_radius = *o.hole_radius;
  const Tile tile = make_tile(c.tile);
  write_json_file(o.out, tile_to_json(tile));
  std::cout << "tile: " << tile.mesh.triangles.size() << " elements, " << tile.mesh.vertices.size()
            << " vertices\n";
}

void cmd_gen_data(const Options& o) {
  require(o.tile, "--tile");
  require(o.out, "--out");
  const ExperimentConfig c = load_config(o);
  const Tile tile = tile_from_json(read_json_file(o.tile));
  const Homogenizer h(tile);
  const GenerationResult res = h.generate_training_data(c.grid);
  for (const std::string& line : res.log) std::cerr << line << '\n';
  write_samples_file(o.out, res.samples);
  std::cout << "samples: " << res.samples.size() << '\n';
}

void write_csv(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream os;
  body(os);
  write_text_file(path, os.str());
}

void cmd_fit(const Options& o) {
  require(o.samples, "--samples");
  require(o.out, "--out");
  const ExperimentConfig c = load_config(o);
  const auto samples = read_samples_file(o.samples);
  const auto [model, report] = greedy_fit(samples, c.fit);
  const fs::path dir(o.out);
  write_json_file(dir / "model.json", model_to_json(model));
  write_json_file(dir / "fit_report.json", fit_report_to_json(report));
  write_csv(dir / "errors.csv", [&](std::ostream& os) { write_errors_csv(os, report.per_sample_errors); });
  std::cout << "rbfs " << report.n_rbfs << ", stress error " << report.stress_error_pct << "%, stiffness error "
            << report.stiffness_error_pct << "%\n";
}

void cmd_validate(const Options& o) {
  require(o.out, "--out");
  const ExperimentConfig c = load_config(o);
  const std::string mode = o.mode.empty() ? "errors" : o.mode;
  const fs::path dir(o.out);
  ValidationReport rep;
  rep.seed = c.seed;

  if (mode == "extrapolation") {
    require(o.samples, "--samples");
    const auto samples = read_samples_file(o.samples);
    const SplitKind split = split_kind_from_string(o.split);
    const ExtrapolationResult ex = extrapolation_experiment(samples, split, c.fit);
    write_json_file(dir / "extrapolation.json", extrapolation_to_json(ex, split));
    std::cout << "train error " << ex.train_error_pct << "%, test error " << ex.test_error_pct << "%\n";
    return;
  }

  require(o.model, "--model");
  const EnergyModel model = model_from_json(read_json_file(o.model));
  if (mode == "errors") {
    require(o.samples, "--samples");
    const auto samples = read_samples_file(o.samples);
    const ValidationReport table = error_table(model, samples);
    rep.stress_error_pct = table.stress_error_pct;
    rep.stiffness_error_pct = table.stiffness_error_pct;
    rep.s_rms = table.s_rms;
    rep.k_rms = table.k_rms;
    rep.per_sample = table.per_sample;
    write_csv(dir / "errors.csv", [&](std::ostream& os) { write_errors_csv(os, rep.per_sample); });
  } else if (mode == "orthogonal") {
    std::vector<OrthogonalTarget> targets;
    if (!o.tile.empty()) {
      const Tile tile = tile_from_json(read_json_file(o.tile));
      const Homogenizer h(tile);
      rep.tile_id = to_string(tile.spec.family);
      rep.grid = grid_label(c.grid);
      for (double theta : c.grid.theta_values()) {
        for (double l1 : c.grid.lambda1_values()) {
          targets.push_back({l1, theta, h.orthogonal_stretch_search(l1, theta).lambda2});
        }
      }
    } else {
      require(o.samples, "--samples");
      targets = orthogonal_targets(read_samples_file(o.samples));
    }
    rep.orthogonal_points = orthogonal_validation(model, targets);
    double sum = 0.0;
    for (const OrthogonalPoint& p : rep.orthogonal_points) {
      rep.orthogonal_error_pct = std::max(rep.orthogonal_error_pct, p.error_pct);
      sum += p.error_pct;
    }
    if (!rep.orthogonal_points.empty()) rep.orthogonal_mean_error_pct = sum / rep.orthogonal_points.size();
    write_csv(dir / "orthogonal.csv", [&](std::ostream& os) { write_orthogonal_csv(os, rep.orthogonal_points); });
  } else {
    throw InputError("unknown validate mode '" + mode + "'");
  }
  write_json_file(dir / "validation.json", validation_report_to_json(rep));
  if (mode == "errors") {
    std::cout << "stress error " << rep.stress_error_pct << "%, stiffness error " << rep.stiffness_error_pct << "%\n";
  } else {
    std::cout << "orthogonal error: max " << rep.orthogonal_error_pct << "%, mean " << rep.orthogonal_mean_error_pct
              << "%\n";
  }
}

void cmd_compare(const Options& o) {
  require(o.samples, "--samples");
  require(o.out, "--out");
  require(o.mode, "--mode");
  const ExperimentConfig c = load_config(o);
  const auto samples = read_samples_file(o.samples);
  const fs::path dir(o.out);
  Json out;
  if (o.mode == "rbf-types") {
    const auto rows = kernel_comparison(samples, c.compare_centers, c.fit);
    out = kernel_rows_to_json(rows);
    for (const KernelRow& r : rows) {
      std::cout << to_string(r.family) << ": mean error " << r.mean_error_pct << "%\n";
    }
  } else if (o.mode == "ablation" || o.mode == "energy-interp") {
    const auto rows =
        o.mode == "ablation" ? stress_stiffness_ablation(samples, c.fit) : energy_interp_comparison(samples, c.fit);
    for (const AblationRow& r : rows) {
      if (r.parameter_count != rows.front().parameter_count) {
        throw NumericalError("parameter counts differ between comparison rows");
      }
      std::cout << r.label << ": " << r.decomposition << " = " << r.parameter_count << " parameters, stress "
                << r.stress_error_pct << "%, stiffness " << r.stiffness_error_pct << "%\n";
    }
    out = ablation_to_json(o.mode, rows);
  } else if (o.mode == "curl") {
    const double k_rms = rms_normalizers(samples).k_rms;
    EnergyModel model;
    if (!o.model.empty()) {
      model = model_from_json(read_json_file(o.model));
    } else {
      model = greedy_fit(samples, c.fit).first;
    }
    const auto centers = kmeans_centers(samples, c.compare_centers, c.fit.kmeans_seed, c.fit.kmeans_restarts);
    const BaselineFit interp = sweep_baseline(BaselineKind::StressInterp, samples, centers, c.fit.kernel_family,
                                              c.fit.radius_grid, TargetSet::Stress, c.fit.condition_limit);
    const auto curl_model = curl_report(StressField::of(model), samples, k_rms);
    const auto curl_interp = curl_report(interp.field(), samples, k_rms);
    out["schema"] = kComparisonSchema;
    out["mode"] = "curl";
    out["k_rms"] = k_rms;
    out["max_energy_model_curl_pct"] = *std::max_element(curl_model.begin(), curl_model.end());
    out["max_stress_interp_curl_pct"] = *std::max_element(curl_interp.begin(), curl_interp.end());
    out["rows"] = Json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      out["rows"].push_back({{"index", i},
                             {"strain", {samples[i].strain(0), samples[i].strain(1), samples[i].strain(2)}},
                             {"energy_model_curl_pct", curl_model[i]},
                             {"stress_interp_curl_pct", curl_interp[i]}});
    }
    std::cout << "max curl: energy model " << out["max_energy_model_curl_pct"].get<double>()
              << "%, stress interpolation " << out["max_stress_interp_curl_pct"].get<double>() << "%\n";
  } else {
    throw InputError("unknown compare mode '" + o.mode + "'");
  }
  write_json_file(dir / "comparison.json", out);
}

std::string cell(const Json& v) {
  if (v.is_null()) return "nan";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  throw InputError("cannot export a nested value");
}

void emit_rows(std::ostream& os, const Json& rows, const std::vector<std::string>& columns) {
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  if (!rows.is_array()) throw InputError("expected an array of rows");
  for (const Json& r : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (!r.contains(columns[c])) throw InputError("row lacks column '" + columns[c] + "'");
      os << (c ? "," : "") << cell(r.at(columns[c]));
    }
    os << '\n';
  }
}

void cmd_export_plot(const Options& o) {
  require(o.input, "--input");
  require(o.out, "--out");
  const Json j = read_json_file(o.input);
  if (!j.is_object()) throw InputError("report must be a JSON object");
  const std::string schema = j.value("schema", "");
  std::string kind = o.kind;
  if (kind.empty()) {
    if (schema == kFitReportSchema) kind = "radius-sweep";
    else if (schema == kValidationSchema) kind = "orthogonal";
    else if (schema == kComparisonSchema) kind = j.value("mode", "");
    else throw InputError("cannot infer the plot kind of schema '" + schema + "'");
  }
  std::ostringstream os;
  const Json empty = Json::array();
  auto rows_of = [&](const char* key) -> const Json& { return j.contains(key) ? j.at(key) : empty; };
  if (kind == "radius-sweep") {
    emit_rows(os, rows_of("radius_sweep"), {"radius", "mean_error_pct", "objective", "feasible"});
  } else if (kind == "greedy") {
    emit_rows(os, rows_of("greedy_history"), {"n_rbfs", "radius", "mean_error_pct", "best_so_far_pct", "feasible"});
  } else if (kind == "per-sample") {
    emit_rows(os, rows_of("per_sample"),
              {"stress_target_norm", "stress_fit_norm", "stress_pct", "stiffness_target_norm", "stiffness_fit_norm",
               "stiffness_pct"});
  } else if (kind == "orthogonal") {
    emit_rows(os, rows_of("orthogonal"), {"lambda1", "theta", "lambda2_reference", "lambda2_model", "error_pct"});
  } else if (kind == "curl") {
    emit_rows(os, rows_of("rows"), {"index", "energy_model_curl_pct", "stress_interp_curl_pct"});
  } else if (kind == "rbf-types") {
    emit_rows(os, rows_of("rows"), {"kernel", "radius", "stress_error_pct", "stiffness_error_pct", "mean_error_pct"});
  } else if (kind == "ablation" || kind == "energy-interp") {
    emit_rows(os, rows_of("rows"),
              {"label", "n_rbfs", "parameter_count", "decomposition", "stress_error_pct", "stiffness_error_pct"});
  } else {
    throw InputError("unknown plot kind '" + kind + "'");
  }
  write_text_file(o.out, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative RBF elastic energies from homogenized microstructure tiles"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "Experiment configuration JSON");
    cmd->add_option("--out", o.out, "Output file or directory");
    cmd->add_option("--seed", o.seed, "k-means seed");
  };
  auto add_fit = [&](CLI::App* cmd) {
    cmd->add_option("--kernel", o.kernel, "Kernel family");
    cmd->add_option("--max-rbfs", o.max_rbfs, "Largest number of RBFs the greedy fit may use");
    cmd->add_option("--target-error", o.target_error, "Greedy stopping error as a fraction");
  };

  auto* gen_tile = app.add_subcommand("gen-tile", "Build a periodic tile mesh");
  add_common(gen_tile);
  gen_tile->add_option("--family", o.family, "solid, circular_hole, slit_lattice or chevron");
  gen_tile->add_option("--elements", o.elements, "Target element count");
  gen_tile->add_option("--hole-radius", o.hole_radius, "Hole radius as a fraction of the period");

  auto* gen_data = app.add_subcommand("gen-data", "Homogenize a tile over the stretch grid");
  add_common(gen_data);
  gen_data->add_option("--tile", o.tile, "Tile JSON");
  gen_data->add_option("--grid", o.grid, "lambda1:lo:hi:n,theta:n");

  auto* fit = app.add_subcommand("fit", "Fit an energy model to samples");
  add_common(fit);
  add_fit(fit);
  fit->add_option("--samples", o.samples, "Samples CSV");

  auto* validate = app.add_subcommand("validate", "Error tables, orthogonal stretch and extrapolation");
  add_common(validate);
  add_fit(validate);
  validate->add_option("--model", o.model, "Model JSON");
  validate->add_option("--samples", o.samples, "Samples CSV");
  validate->add_option("--tile", o.tile, "Tile JSON for orthogonal reference stretches");
  validate->add_option("--grid", o.grid, "lambda1:lo:hi:n,theta:n");
  validate->add_option("--mode", o.mode, "errors, orthogonal or extrapolation");
  validate->add_option("--split", o.split, "lower-half-stretch, half-directions or none");

  auto* compare = app.add_subcommand("compare", "Baseline and kernel comparisons");
  add_common(compare);
  add_fit(compare);
  compare->add_option("--samples", o.samples, "Samples CSV");
  compare->add_option("--model", o.model, "Model JSON for the curl mode");
  compare->add_option("--mode", o.mode, "rbf-types, ablation, energy-interp or curl");
  compare->add_option("--centers", o.centers, "Centers for rbf-types and curl");

  auto* export_plot = app.add_subcommand("export-plot", "Flatten a report into a plotting CSV");
  export_plot->add_option("--input", o.input, "Report JSON");
  export_plot->add_option("--out", o.out, "Output CSV");
  export_plot->add_option("--kind", o.kind,
                          "radius-sweep, greedy, per-sample, orthogonal, curl, rbf-types, ablation or energy-interp");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen_tile) cmd_gen_tile(o);
    if (*gen_data) cmd_gen_data(o);
    if (*fit) cmd_fit(o);
    if (*validate) cmd_validate(o);
    if (*compare) cmd_compare(o);
    if (*export_plot) cmd_export_plot(o);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
