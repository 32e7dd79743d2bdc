#include <CLI11.hpp>

#include "semiord/evaluation.hpp"
#include "semiord/inference.hpp"
#include "semiord/io.hpp"
#include "semiord/optimizer.hpp"
#include "semiord/rotation.hpp"
#include "semiord/synth.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace semiord;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

std::vector<std::string> parse_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

Restriction parse_restriction(const std::string& s) {
  if (s == "none") return Restriction::None;
  if (s == "parallel") return Restriction::Parallel;
  if (s == "nonparallel") return Restriction::NonParallel;
  throw ConfigError("unknown restriction '" + s + "'");
}

struct LoadedData {
  RecordSchema schema;
  OrdinalDataset dataset;
  long rows_in = 0;
  long rows_dropped = 0;
};

LoadedData load(const std::string& data_path, const std::string& schema_path) {
  LoadedData out;
  out.schema = load_schema(schema_path);
  LoadResult res = load_dataset(data_path, out.schema);
  out.dataset = std::move(res.dataset);
  out.rows_in = res.rows_in;
  out.rows_dropped = res.rows_dropped;
  std::cerr << "loaded " << out.dataset.size() << " rows ("
            << out.rows_dropped << " dropped)\n";
  return out;
}

void finish_manifest(RunManifest& manifest, const Stopwatch& watch,
                     const std::string& out_path) {
  manifest.wall_time_seconds = watch.seconds();
  save_manifest(manifest, out_path + ".manifest.json");
}

int run_synth(const std::string& config_path, std::uint64_t seed,
              const std::string& out) {
  Stopwatch watch;
  PopulationConfig config;
  config.n_lhu = 8;
  config.stratify_sex_age = true;
  config.n_binary = 2;
  config.n_numeric = 1;
  config.interactions = true;
  std::map<std::string, std::string> raw;
  if (!config_path.empty()) raw = load_key_value_config(config_path);
  auto geti = [&](const std::string& k, int dflt) {
    return raw.count(k) ? std::stoi(raw.at(k)) : dflt;
  };
  config.n = geti("n", 2000);
  config.n_lhu = geti("n_lhu", config.n_lhu);
  config.n_binary = geti("n_binary", config.n_binary);
  config.n_numeric = geti("n_numeric", config.n_numeric);
  config.stratify_sex_age =
      geti("stratify_sex_age", config.stratify_sex_age ? 1 : 0) != 0;
  config.interactions = geti("interactions", config.interactions ? 1 : 0) != 0;
  config.seed = seed;
  const double shared_scale =
      raw.count("shared_scale") ? std::stod(raw.at("shared_scale")) : 0.5;
  const double specific_scale =
      raw.count("specific_scale") ? std::stod(raw.at("specific_scale")) : 0.1;
  config.truth = random_truth(config, seed + 1, shared_scale, specific_scale);

  const SyntheticData data = generate(config);

  RecordSchema schema;
  schema.response_column = "response";
  schema.response_codes = data.dataset.category_codes;
  if (!data.dataset.lhu.empty()) schema.lhu_column = "lhu";
  schema.weight_column = "weight";
  schema.variables = data.specs;

  RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = seed;
  for (const auto& [k, v] : raw) manifest.config[k] = v;
  manifest.config["n"] = std::to_string(config.n);
  manifest.config["n_lhu"] = std::to_string(config.n_lhu);
  manifest.config["out"] = out;

  save_dataset(data.dataset, schema, out, manifest.hash());
  save_schema(schema, out + ".schema.json");
  // ground truth in the fit format so recovery checks diff directly
  ModelFit truth_fit;
  truth_fit.coefs = data.truth;
  truth_fit.converged = true;
  save_fit(truth_fit, data.design, out + ".truth.json", manifest);
  finish_manifest(manifest, watch, out);
  std::cerr << "wrote " << out << " (invalid first-draw rate "
            << data.invalid_rate << ")\n";
  return 0;
}

int run_fit(const std::string& data_path, const std::string& schema_path,
            double alpha, double lambda, double rho,
            const std::string& restriction, const std::string& scaling,
            const std::string& out) {
  Stopwatch watch;
  const LoadedData loaded = load(data_path, schema_path);
  const bool include_lhu = !loaded.schema.lhu_column.empty();
  DesignMatrix design = build_design(loaded.dataset.records,
                                     loaded.schema.variables, include_lhu,
                                     loaded.dataset.lhu);
  std::optional<ScalingMode> mode;
  if (scaling == "standardize") mode = ScalingMode::Standardize;
  else if (scaling == "minmax") mode = ScalingMode::MinMax;
  else if (scaling == "none") mode = ScalingMode::None;
  else if (!scaling.empty() && scaling != "schema")
    throw ConfigError("unknown scaling '" + scaling + "'");
  design = apply_scaling(design, loaded.schema.variables, mode);

  const HyperParams hyper{lambda, alpha, rho};
  const Restriction r = parse_restriction(restriction);
  ModelFit fitted;
  if (r == Restriction::None) {
    fitted = fit(loaded.dataset, design.values, hyper);
  } else {
    fitted = fit_restricted(loaded.dataset, design.values, r, hyper);
  }

  RunManifest manifest;
  manifest.command = "fit";
  manifest.config = {{"data", data_path},     {"schema", schema_path},
                     {"alpha", std::to_string(alpha)},
                     {"lambda", std::to_string(lambda)},
                     {"rho", std::to_string(rho)},
                     {"restriction", restriction},
                     {"scaling", scaling},    {"out", out}};
  save_fit(fitted, design, out, manifest);
  finish_manifest(manifest, watch, out);
  std::cerr << (fitted.converged ? "converged" : "NOT converged") << " after "
            << fitted.n_iterations << " sweeps\n";
  if (fitted.separation) std::cerr << "warning: separation detected\n";
  return fitted.converged ? 0 : 3;
}

std::vector<ModelDescriptor> default_models(const RecordSchema& schema) {
  std::vector<ModelDescriptor> models;
  const bool has_lhu = !schema.lhu_column.empty();
  bool has_sex = false, has_age = false;
  for (const auto& v : schema.variables) {
    if (v.name == "sex") has_sex = true;
    if (v.name == "ageclass") has_age = true;
  }
  ModelDescriptor m;
  m.name = "marginal";
  m.kind = ModelKind::MarginalBaseline;
  models.push_back(m);
  if (has_lhu) {
    m = ModelDescriptor{};
    m.name = "stratified-lhu";
    m.kind = ModelKind::StratifiedBaseline;
    m.stratum_vars = {"LHU"};
    models.push_back(m);
    if (has_sex && has_age) {
      m.name = "stratified-lhu-sex-age";
      m.stratum_vars = {"LHU", "sex", "ageclass"};
      models.push_back(m);
    }
  }
  m = ModelDescriptor{};
  m.name = "parallel";
  m.kind = ModelKind::Parallel;
  models.push_back(m);
  m.name = "nonparallel";
  m.kind = ModelKind::NonParallel;
  models.push_back(m);
  m = ModelDescriptor{};
  m.kind = ModelKind::SemiParallel;
  m.name = "ridge";
  m.hyper = HyperParams{1e-4, 0.0, 1.0};
  models.push_back(m);
  m.name = "lasso";
  m.hyper = HyperParams{1e-4, 1.0, 1.0};
  models.push_back(m);
  m.name = "elasticnet";
  m.hyper = HyperParams{1e-4, 0.5, 1.0};
  models.push_back(m);
  return models;
}

int run_cv(const std::string& data_path, const std::string& schema_path,
           int folds, std::uint64_t seed, const std::string& model_list,
           const std::string& out) {
  Stopwatch watch;
  const LoadedData loaded = load(data_path, schema_path);
  std::vector<ModelDescriptor> models = default_models(loaded.schema);
  if (!model_list.empty()) {
    const auto wanted = parse_list(model_list);
    std::vector<ModelDescriptor> chosen;
    for (const auto& name : wanted) {
      bool found = false;
      for (const auto& m : models)
        if (m.name == name) {
          chosen.push_back(m);
          found = true;
        }
      if (!found) throw ConfigError("unknown model '" + name + "'");
    }
    models = std::move(chosen);
  }
  CrossValidationOptions opts;
  opts.n_folds = folds;
  opts.seed = seed;
  const EvaluationReport report =
      cross_validate(loaded.dataset, loaded.schema.variables, models, opts);

  RunManifest manifest;
  manifest.command = "cv";
  manifest.seed = seed;
  manifest.config = {{"data", data_path},
                     {"schema", schema_path},
                     {"folds", std::to_string(folds)},
                     {"models", model_list},
                     {"out", out}};
  save_evaluation_report(report, out, manifest);
  finish_manifest(manifest, watch, out);
  for (const auto& m : report.models)
    std::cerr << m.model << ": rps=" << 100.0 * m.avg_rps
              << " me=" << 100.0 * m.avg_me << " (x100)\n";
  return 0;
}

int run_grid(const std::string& data_path, const std::string& schema_path,
             double alpha, const std::string& lambda_csv,
             const std::string& rho_csv, int folds, std::uint64_t seed,
             const std::string& out) {
  Stopwatch watch;
  const LoadedData loaded = load(data_path, schema_path);
  const std::vector<double> lambdas =
      lambda_csv.empty() ? default_lambda_grid() : parse_grid(lambda_csv);
  const std::vector<double> rhos =
      rho_csv.empty() ? default_rho_grid() : parse_grid(rho_csv);
  CrossValidationOptions opts;
  opts.n_folds = folds;
  opts.seed = seed;
  const GridReport report = grid_search(loaded.dataset, loaded.schema.variables,
                                        lambdas, rhos, alpha, opts);

  RunManifest manifest;
  manifest.command = "grid";
  manifest.seed = seed;
  manifest.config = {{"data", data_path},
                     {"schema", schema_path},
                     {"alpha", std::to_string(alpha)},
                     {"folds", std::to_string(folds)},
                     {"out", out}};
  save_grid_report(report, out, manifest);
  finish_manifest(manifest, watch, out);
  if (!report.any_success) {
    std::cerr << "every grid point failed\n";
    return 3;
  }
  std::cerr << "best: lambda=" << report.best.lambda
            << " rho=" << report.best.rho << "\n";
  return 0;
}

int run_bootstrap(const std::string& data_path, const std::string& schema_path,
                  double alpha, double lambda, double rho, int replicates,
                  std::uint64_t seed, int threads, const std::string& out) {
  Stopwatch watch;
  const LoadedData loaded = load(data_path, schema_path);
  BootstrapOptions opts;
  opts.replicates = replicates;
  opts.seed = seed;
  opts.threads = threads;
  opts.include_lhu = !loaded.schema.lhu_column.empty();
  if (!opts.include_lhu) opts.stratum_vars = {};
  const BootstrapEnsemble ensemble = bootstrap(
      loaded.dataset, loaded.schema.variables, {lambda, alpha, rho}, opts);

  DesignMatrix design = build_design(loaded.dataset.records,
                                     loaded.schema.variables, opts.include_lhu,
                                     loaded.dataset.lhu);
  RunManifest manifest;
  manifest.command = "bootstrap";
  manifest.seed = seed;
  manifest.config = {{"data", data_path},
                     {"schema", schema_path},
                     {"alpha", std::to_string(alpha)},
                     {"lambda", std::to_string(lambda)},
                     {"rho", std::to_string(rho)},
                     {"replicates", std::to_string(replicates)},
                     {"out", out}};
  save_ensemble(ensemble, design.columns, out, manifest);
  finish_manifest(manifest, watch, out);
  std::cerr << ensemble.replicates.size() << " replicates, "
            << ensemble.failures.size() << " failures\n";
  if (ensemble.unreliable) {
    std::cerr << "warning: more than 10% of replicate fits failed\n";
    return 3;
  }
  return 0;
}

int run_rotate(const std::string& fit_path, const std::string& ensemble_path,
               double level, const std::string& out) {
  Stopwatch watch;
  const LoadedFit loaded = load_fit(fit_path);
  if (loaded.fit.coefs.margins() != 2)
    throw ConfigError("rotation needs a 3-category (2-margin) fit");

  std::optional<BootstrapEnsemble> ensemble;
  if (!ensemble_path.empty()) ensemble = load_ensemble(ensemble_path);

  std::ostringstream text;
  RunManifest manifest;
  manifest.command = "rotate";
  manifest.config = {{"fit", fit_path}, {"ensemble", ensemble_path},
                     {"out", out}};
  text << "# manifest " << manifest.hash() << "\n";
  text << "label,kind,b_neg,b_zero,positivity,neutrality,quadrant";
  if (ensemble)
    text << ",positivity_lo,positivity_hi,neutrality_lo,neutrality_hi";
  text << "\n";

  const int p_count = loaded.fit.coefs.dim();
  const Vector g0 = loaded.fit.coefs.margin_coefficients(0);
  const Vector g1 = loaded.fit.coefs.margin_coefficients(1);
  for (int p = 0; p < p_count; ++p) {
    CoefficientPair pair{g0[p], g1[p], loaded.columns[p].name};
    const RotatedPair rot = to_positivity_neutrality(pair);
    text << pair.label << ','
         << (loaded.columns[p].lhu
                 ? "lhu"
                 : loaded.columns[p].interaction ? "interaction" : "main")
         << ',' << pair.b_neg << ',' << pair.b_zero << ',' << rot.positivity
         << ',' << rot.neutrality << ','
         << quadrant_label(classify_quadrant(pair));
    if (ensemble) {
      std::vector<double> pos, neu;
      for (const auto& rep : ensemble->replicates) {
        if (rep.dim() != p_count || rep.margins() != 2) continue;
        const CoefficientPair rp{rep.margin_coefficients(0)[p],
                                 rep.margin_coefficients(1)[p], ""};
        const RotatedPair rr = to_positivity_neutrality(rp);
        pos.push_back(rr.positivity);
        neu.push_back(rr.neutrality);
      }
      if (static_cast<int>(pos.size()) >= 20) {
        const double a = (1.0 - level) / 2.0;
        text << ',' << quantile_type7(pos, a) << ','
             << quantile_type7(pos, 1.0 - a) << ',' << quantile_type7(neu, a)
             << ',' << quantile_type7(neu, 1.0 - a);
      } else {
        text << ",,,,";
      }
    }
    text << "\n";
  }
  write_text_atomic(out, text.str());
  finish_manifest(manifest, watch, out);
  return 0;
}

struct RotationRow {
  std::string label;
  std::string kind;
  double positivity = 0.0;
  double neutrality = 0.0;
  bool has_band = false;
  double pos_lo = 0.0, pos_hi = 0.0, neu_lo = 0.0, neu_hi = 0.0;
};

std::vector<RotationRow> read_rotation_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  std::vector<RotationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    while (fields.size() < 11) fields.emplace_back();
    if (header.empty()) {
      header = fields;
      if (header[0] != "label")
        throw ConfigError("'" + path + "' is not a rotation table");
      continue;
    }
    RotationRow row;
    row.label = fields[0];
    row.kind = fields[1];
    row.positivity = std::stod(fields[4]);
    row.neutrality = std::stod(fields[5]);
    if (header.size() >= 11 && !fields[7].empty()) {
      row.has_band = true;
      row.pos_lo = std::stod(fields[7]);
      row.pos_hi = std::stod(fields[8]);
      row.neu_lo = std::stod(fields[9]);
      row.neu_hi = std::stod(fields[10]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_report(const std::string& in_path, const std::string& kind,
               const std::string& schema_path, const std::string& out) {
  Stopwatch watch;
  RunManifest manifest;
  manifest.command = "report";
  manifest.config = {{"in", in_path}, {"kind", kind}, {"out", out}};
  std::ostringstream text;
  text << "# manifest " << manifest.hash() << "\n";

  if (kind == "ranking-positivity" || kind == "ranking-neutrality") {
    const auto rows = read_rotation_table(in_path);
    const bool pos = kind == "ranking-positivity";
    std::vector<RotatedPair> pairs;
    std::vector<std::pair<double, double>> bands;
    bool all_banded = !rows.empty();
    for (const auto& r : rows) {
      pairs.push_back({r.positivity, r.neutrality, r.label});
      if (r.has_band)
        bands.emplace_back(pos ? r.pos_lo : r.neu_lo, pos ? r.pos_hi : r.neu_hi);
      all_banded = all_banded && r.has_band;
    }
    const auto ranked =
        rank_effects(pairs, pos ? RotationAxis::Positivity : RotationAxis::Neutrality,
                     all_banded ? bands : std::vector<std::pair<double, double>>{});
    if (!all_banded) text << "# no ensemble bands available\n";
    text << "rank,label,value" << (all_banded ? ",lo,hi" : "") << "\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      text << (i + 1) << ',' << ranked[i].pair.label << ',' << ranked[i].value;
      if (all_banded)
        text << ',' << ranked[i].band->first << ',' << ranked[i].band->second;
      text << "\n";
    }
  } else if (kind == "plane") {
    const auto rows = read_rotation_table(in_path);
    text << "label,kind,positivity,neutrality\n";
    for (const auto& r : rows)
      text << r.label << ',' << r.kind << ',' << r.positivity << ','
           << r.neutrality << "\n";
  } else if (kind == "trace") {
    const LoadedFit loaded = load_fit(in_path);
    text << "sweep,objective\n";
    for (std::size_t t = 0; t < loaded.fit.objective_trace.size(); ++t)
      text << t << ',' << loaded.fit.objective_trace[t] << "\n";
  } else if (kind == "proportions") {
    if (schema_path.empty())
      throw ConfigError("kind=proportions needs --schema");
    const LoadedData loaded = load(in_path, schema_path);
    const auto keys = stratum_keys(loaded.dataset, {"LHU"});
    const auto strata = build_strata(keys);
    text << "lhu,category,proportion\n";
    for (const auto& s : strata) {
      Vector counts = Vector::Zero(loaded.dataset.n_categories);
      double total = 0.0;
      for (int i : s.indices) {
        counts[loaded.dataset.y[i]] += loaded.dataset.weights[i];
        total += loaded.dataset.weights[i];
      }
      for (int k = 0; k < loaded.dataset.n_categories; ++k)
        text << s.key << ',' << loaded.dataset.category_codes[k] << ','
             << counts[k] / total << "\n";
    }
  } else {
    throw ConfigError("unknown report kind '" + kind + "'");
  }
  write_text_atomic(out, text.str());
  finish_manifest(manifest, watch, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized semi-parallel cumulative-logit toolkit"};
  app.require_subcommand(1);

  std::string data_path, schema_path, out, config_path, restriction = "none";
  std::string model_list, lambda_csv, rho_csv, fit_path, ensemble_path;
  std::string kind, scaling = "schema";
  double alpha = 0.5, lambda = 1e-4, rho = 1.0, level = 0.95;
  std::uint64_t seed = 0;
  int folds = 5, replicates = 1000, threads = 1;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--config", config_path, "key=value population config");
  synth->add_option("--seed", seed, "master seed");
  synth->add_option("--out", out, "output data path")->required();

  auto* fit_cmd = app.add_subcommand("fit", "fit one penalized model");
  fit_cmd->add_option("--data", data_path)->required();
  fit_cmd->add_option("--schema", schema_path)->required();
  fit_cmd->add_option("--alpha", alpha, "elastic-net mix (default 0.5)");
  fit_cmd->add_option("--lambda", lambda, "penalty strength (default 1e-4)");
  fit_cmd->add_option("--rho", rho, "shared-block weight (default 1)");
  fit_cmd->add_option("--restriction", restriction,
                      "none | parallel | nonparallel");
  fit_cmd->add_option("--scaling", scaling,
                      "schema | standardize | minmax | none");
  fit_cmd->add_option("--out", out)->required();

  auto* cv = app.add_subcommand("cv", "cross-validate the model family");
  cv->add_option("--data", data_path)->required();
  cv->add_option("--schema", schema_path)->required();
  cv->add_option("--folds", folds, "number of folds (default 5)");
  cv->add_option("--seed", seed);
  cv->add_option("--models", model_list, "comma list (default: all)");
  cv->add_option("--out", out)->required();

  auto* grid = app.add_subcommand("grid", "hyperparameter grid search");
  grid->add_option("--data", data_path)->required();
  grid->add_option("--schema", schema_path)->required();
  grid->add_option("--alpha", alpha);
  grid->add_option("--lambda-grid", lambda_csv, "comma list (default 7-point)");
  grid->add_option("--rho-grid", rho_csv, "comma list (default 7-point)");
  grid->add_option("--folds", folds);
  grid->add_option("--seed", seed);
  grid->add_option("--out", out)->required();

  auto* boot = app.add_subcommand("bootstrap", "stratified bootstrap ensemble");
  boot->add_option("--data", data_path)->required();
  boot->add_option("--schema", schema_path)->required();
  boot->add_option("--alpha", alpha);
  boot->add_option("--lambda", lambda);
  boot->add_option("--rho", rho);
  boot->add_option("--replicates", replicates, "default 1000");
  boot->add_option("--seed", seed);
  boot->add_option("--threads", threads, "worker threads (default 1)");
  boot->add_option("--out", out)->required();

  auto* rotate = app.add_subcommand("rotate",
                                    "positivity-neutrality rotation table");
  rotate->add_option("--fit", fit_path)->required();
  rotate->add_option("--ensemble", ensemble_path, "bootstrap ensemble");
  rotate->add_option("--level", level, "band level (default 0.95)");
  rotate->add_option("--out", out)->required();

  auto* report = app.add_subcommand("report", "tidy plot-data files");
  report->add_option("--in", fit_path)->required();
  report->add_option("--kind", kind,
                     "ranking-positivity | ranking-neutrality | plane | "
                     "trace | proportions")
      ->required();
  report->add_option("--schema", schema_path, "needed for kind=proportions");
  report->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(config_path, seed, out);
    if (fit_cmd->parsed())
      return run_fit(data_path, schema_path, alpha, lambda, rho, restriction,
                     scaling, out);
    if (cv->parsed())
      return run_cv(data_path, schema_path, folds, seed, model_list, out);
    if (grid->parsed())
      return run_grid(data_path, schema_path, alpha, lambda_csv, rho_csv,
                      folds, seed, out);
    if (boot->parsed())
      return run_bootstrap(data_path, schema_path, alpha, lambda, rho,
                           replicates, seed, threads, out);
    if (rotate->parsed()) return run_rotate(fit_path, ensemble_path, level, out);
    if (report->parsed()) return run_report(fit_path, kind, schema_path, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
