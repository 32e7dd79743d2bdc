#include "semiord/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace semiord {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_csv_line(const std::string& line, long line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted)
    throw SchemaError("unterminated quote at line " + std::to_string(line_no));
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ScalingMode scaling_from_string(const std::string& s) {
  if (s == "none") return ScalingMode::None;
  if (s == "standardize") return ScalingMode::Standardize;
  if (s == "minmax" || s == "min-max") return ScalingMode::MinMax;
  throw SchemaError("unknown scaling mode '" + s + "'");
}

std::string scaling_to_string(ScalingMode m) {
  switch (m) {
    case ScalingMode::None: return "none";
    case ScalingMode::Standardize: return "standardize";
    case ScalingMode::MinMax: return "minmax";
  }
  return "none";
}

std::string restriction_to_string(Restriction r) {
  switch (r) {
    case Restriction::None: return "none";
    case Restriction::Parallel: return "parallel";
    case Restriction::NonParallel: return "nonparallel";
  }
  return "none";
}

Restriction restriction_from_string(const std::string& s) {
  if (s == "none") return Restriction::None;
  if (s == "parallel") return Restriction::Parallel;
  if (s == "nonparallel") return Restriction::NonParallel;
  throw ConfigError("unknown restriction '" + s + "'");
}

json column_to_json(const ColumnInfo& info, const ColumnScaling& cs) {
  json j;
  j["name"] = info.name;
  j["sources"] = info.sources;
  j["interaction"] = info.interaction;
  j["lhu"] = info.lhu;
  j["numeric"] = info.numeric;
  j["scaling"] = {{"mode", scaling_to_string(cs.mode)},
                  {"location", cs.location},
                  {"scale", cs.scale}};
  return j;
}

void column_from_json(const json& j, ColumnInfo& info, ColumnScaling& cs) {
  info.name = j.at("name").get<std::string>();
  info.sources = j.at("sources").get<std::vector<std::string>>();
  info.interaction = j.at("interaction").get<bool>();
  info.lhu = j.at("lhu").get<bool>();
  info.numeric = j.at("numeric").get<bool>();
  const auto& s = j.at("scaling");
  cs.mode = scaling_from_string(s.at("mode").get<std::string>());
  cs.location = s.at("location").get<double>();
  cs.scale = s.at("scale").get<double>();
}

json coefficients_to_json(const CoefficientSet& coefs) {
  json j;
  j["thresholds"] = std::vector<double>(
      coefs.thresholds.data(), coefs.thresholds.data() + coefs.thresholds.size());
  j["shared"] = std::vector<double>(coefs.shared.data(),
                                    coefs.shared.data() + coefs.shared.size());
  json specific = json::array();
  for (long col = 0; col < coefs.specific.cols(); ++col) {
    std::vector<double> v(coefs.specific.rows());
    for (long p = 0; p < coefs.specific.rows(); ++p) v[p] = coefs.specific(p, col);
    specific.push_back(v);
  }
  j["specific"] = specific;
  return j;
}

CoefficientSet coefficients_from_json(const json& j) {
  const auto thresholds = j.at("thresholds").get<std::vector<double>>();
  const auto shared = j.at("shared").get<std::vector<double>>();
  const auto specific = j.at("specific").get<std::vector<std::vector<double>>>();
  CoefficientSet coefs = CoefficientSet::zeros(
      static_cast<int>(shared.size()), static_cast<int>(thresholds.size()));
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    coefs.thresholds[static_cast<long>(i)] = thresholds[i];
  for (std::size_t i = 0; i < shared.size(); ++i)
    coefs.shared[static_cast<long>(i)] = shared[i];
  for (std::size_t col = 0; col < specific.size(); ++col)
    for (std::size_t p = 0; p < specific[col].size(); ++p)
      coefs.specific(static_cast<long>(p), static_cast<long>(col)) =
          specific[col][p];
  return coefs;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp + "'");
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError("cannot rename into '" + path + "'");
}

RecordSchema load_schema(const std::string& path) {
  const json j = json::parse(read_file(path));
  RecordSchema schema;
  schema.response_column = j.at("response").at("column").get<std::string>();
  schema.response_codes = j.at("response").at("codes").get<std::vector<int>>();
  if (j.contains("lhu")) schema.lhu_column = j.at("lhu").get<std::string>();
  if (j.contains("weight")) schema.weight_column = j.at("weight").get<std::string>();
  for (const auto& v : j.at("variables")) {
    VariableSpec s;
    s.name = v.at("name").get<std::string>();
    const std::string kind = v.at("kind").get<std::string>();
    if (kind == "binary") s.kind = VariableKind::Binary;
    else if (kind == "categorical") s.kind = VariableKind::Categorical;
    else if (kind == "numeric") s.kind = VariableKind::Numeric;
    else throw SchemaError("unknown variable kind '" + kind + "'");
    if (v.contains("levels"))
      s.levels = v.at("levels").get<std::vector<std::string>>();
    if (s.kind == VariableKind::Categorical && s.levels.size() < 2)
      throw SchemaError("categorical '" + s.name + "' needs >= 2 levels");
    if (v.contains("scaling"))
      s.scaling = scaling_from_string(v.at("scaling").get<std::string>());
    schema.variables.push_back(std::move(s));
  }
  return schema;
}

void save_schema(const RecordSchema& schema, const std::string& path) {
  json j;
  j["response"] = {{"column", schema.response_column},
                   {"codes", schema.response_codes}};
  if (!schema.lhu_column.empty()) j["lhu"] = schema.lhu_column;
  if (!schema.weight_column.empty()) j["weight"] = schema.weight_column;
  j["variables"] = json::array();
  for (const auto& v : schema.variables) {
    json e;
    e["name"] = v.name;
    e["kind"] = v.kind == VariableKind::Binary
                    ? "binary"
                    : v.kind == VariableKind::Categorical ? "categorical"
                                                          : "numeric";
    if (!v.levels.empty()) e["levels"] = v.levels;
    e["scaling"] = scaling_to_string(v.scaling);
    j["variables"].push_back(e);
  }
  write_text_atomic(path, j.dump(2) + "\n");
}

LoadResult load_dataset(const std::string& path, const RecordSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  long line_no = 0;
  // skip comment lines (embedded manifest hash)
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] != '#') break;
  }
  if (line.empty()) throw SchemaError("missing header row");
  const auto header = split_csv_line(line, line_no);
  auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw SchemaError("declared column '" + name + "' missing from header");
  };

  const int resp_idx = column_index(schema.response_column);
  const int lhu_idx =
      schema.lhu_column.empty() ? -1 : column_index(schema.lhu_column);
  const int weight_idx =
      schema.weight_column.empty() ? -1 : column_index(schema.weight_column);
  std::vector<int> var_idx;
  for (const auto& v : schema.variables) var_idx.push_back(column_index(v.name));

  std::vector<int> y;
  std::vector<double> weights;
  std::vector<std::string> lhu;
  RecordTable tab;
  for (const auto& v : schema.variables) {
    RawColumn col;
    col.name = v.name;
    col.is_numeric = v.kind == VariableKind::Numeric;
    col.levels = v.kind == VariableKind::Binary ? std::vector<std::string>{"0", "1"}
                                                : v.levels;
    tab.columns.push_back(std::move(col));
  }

  LoadResult result;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    ++result.rows_in;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size())
      throw SchemaError("malformed row at line " + std::to_string(line_no));

    int code;
    try {
      code = std::stoi(fields[resp_idx]);
    } catch (...) {
      throw SchemaError("non-integer response at line " + std::to_string(line_no));
    }
    int cat = -1;
    for (std::size_t k = 0; k < schema.response_codes.size(); ++k)
      if (schema.response_codes[k] == code) cat = static_cast<int>(k);
    if (cat < 0) {
      ++result.rows_dropped;  // out-of-scope code, e.g. "I don't know"
      continue;
    }

    y.push_back(cat);
    weights.push_back(weight_idx < 0 ? 1.0 : std::stod(fields[weight_idx]));
    if (lhu_idx >= 0) lhu.push_back(fields[lhu_idx]);
    for (std::size_t v = 0; v < schema.variables.size(); ++v) {
      const auto& field = fields[var_idx[v]];
      auto& col = tab.columns[v];
      if (field.empty())
        throw SchemaError("missing value in column '" + col.name +
                          "' at line " + std::to_string(line_no));
      if (col.is_numeric) {
        try {
          col.values.push_back(std::stod(field));
        } catch (...) {
          throw SchemaError("non-numeric value in column '" + col.name +
                            "' at line " + std::to_string(line_no));
        }
      } else {
        int level = -1;
        for (std::size_t l = 0; l < col.levels.size(); ++l)
          if (col.levels[l] == field) level = static_cast<int>(l);
        if (level < 0)
          throw SchemaError("unknown level '" + field + "' in column '" +
                            col.name + "' at line " + std::to_string(line_no));
        col.codes.push_back(level);
      }
    }
  }
  tab.n = y.size();

  Vector w(static_cast<long>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i)
    w[static_cast<long>(i)] = weights[i];
  result.dataset = make_dataset(std::move(y), schema.response_codes,
                                std::move(w), std::move(tab), std::move(lhu));
  return result;
}

void save_dataset(const OrdinalDataset& data, const RecordSchema& schema,
                  const std::string& path, const std::string& manifest_hash) {
  std::ostringstream out;
  if (!manifest_hash.empty()) out << "# manifest " << manifest_hash << "\n";
  out << csv_escape(schema.response_column);
  if (!schema.lhu_column.empty()) out << ',' << csv_escape(schema.lhu_column);
  if (!schema.weight_column.empty())
    out << ',' << csv_escape(schema.weight_column);
  for (const auto& v : schema.variables) out << ',' << csv_escape(v.name);
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.category_codes[data.y[i]];
    if (!schema.lhu_column.empty()) out << ',' << csv_escape(data.lhu[i]);
    if (!schema.weight_column.empty())
      out << ',' << format_double(data.weights[static_cast<long>(i)]);
    for (const auto& v : schema.variables) {
      const RawColumn* col = data.records.find(v.name);
      if (!col) throw SchemaError("dataset lacks column '" + v.name + "'");
      out << ',';
      if (col->is_numeric)
        out << format_double(col->values[i]);
      else
        out << csv_escape(col->levels.empty() ? std::to_string(col->codes[i])
                                              : col->levels[col->codes[i]]);
    }
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

std::string RunManifest::hash() const {
  std::ostringstream canon;
  canon << command << '\0' << seed << '\0';
  for (const auto& [k, v] : config) canon << k << '=' << v << '\n';
  const std::string s = canon.str();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  j["seed"] = std::to_string(manifest.seed);
  j["wall_time_seconds"] = manifest.wall_time_seconds;
  j["manifest_hash"] = manifest.hash();
  j["format_version"] = 1;
  write_text_atomic(path, j.dump(2) + "\n");
}

void save_fit(const ModelFit& fit_result, const DesignMatrix& design,
              const std::string& path, const RunManifest& manifest) {
  json j;
  j["format"] = "semiord-fit";
  j["format_version"] = 1;
  j["manifest_hash"] = manifest.hash();
  j["hyper"] = {{"lambda", fit_result.hyper.lambda},
                {"alpha", fit_result.hyper.alpha},
                {"rho", fit_result.hyper.rho}};
  j["restriction"] = restriction_to_string(fit_result.restriction);
  j["converged"] = fit_result.converged;
  j["n_iterations"] = fit_result.n_iterations;
  j["separation"] = fit_result.separation;
  j["ridge_fallback"] = fit_result.ridge_fallback;
  j["objective_trace"] = fit_result.objective_trace;
  j["coefficients"] = coefficients_to_json(fit_result.coefs);
  j["columns"] = json::array();
  for (std::size_t c = 0; c < design.columns.size(); ++c)
    j["columns"].push_back(column_to_json(design.columns[c], design.scaling[c]));
  write_text_atomic(path, j.dump(2) + "\n");
}

LoadedFit load_fit(const std::string& path) {
  const json j = json::parse(read_file(path));
  if (j.value("format", "") != "semiord-fit")
    throw ConfigError("'" + path + "' is not a fit document");
  LoadedFit out;
  out.fit.hyper.lambda = j.at("hyper").at("lambda").get<double>();
  out.fit.hyper.alpha = j.at("hyper").at("alpha").get<double>();
  out.fit.hyper.rho = j.at("hyper").at("rho").get<double>();
  out.fit.restriction =
      restriction_from_string(j.at("restriction").get<std::string>());
  out.fit.converged = j.at("converged").get<bool>();
  out.fit.n_iterations = j.at("n_iterations").get<int>();
  out.fit.separation = j.at("separation").get<bool>();
  out.fit.ridge_fallback = j.at("ridge_fallback").get<bool>();
  out.fit.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  out.fit.coefs = coefficients_from_json(j.at("coefficients"));
  for (const auto& c : j.at("columns")) {
    ColumnInfo info;
    ColumnScaling cs;
    column_from_json(c, info, cs);
    out.columns.push_back(info);
    out.scaling.push_back(cs);
  }
  return out;
}

void save_ensemble(const BootstrapEnsemble& ensemble,
                   const std::vector<ColumnInfo>& columns,
                   const std::string& path, const RunManifest& manifest) {
  json j;
  j["format"] = "semiord-ensemble";
  j["format_version"] = 1;
  j["manifest_hash"] = manifest.hash();
  j["warm_started"] = ensemble.warm_started;
  j["unreliable"] = ensemble.unreliable;
  j["replicate_ids"] = ensemble.replicate_ids;
  j["seeds"] = json::array();
  for (auto s : ensemble.seeds) j["seeds"].push_back(std::to_string(s));
  j["replicates"] = json::array();
  for (const auto& r : ensemble.replicates)
    j["replicates"].push_back(coefficients_to_json(r));
  j["failures"] = json::array();
  for (const auto& f : ensemble.failures)
    j["failures"].push_back({{"replicate", f.replicate}, {"reason", f.reason}});
  j["columns"] = json::array();
  for (const auto& c : columns)
    j["columns"].push_back(column_to_json(c, ColumnScaling{}));
  write_text_atomic(path, j.dump() + "\n");
}

BootstrapEnsemble load_ensemble(const std::string& path,
                                std::vector<ColumnInfo>* columns) {
  const json j = json::parse(read_file(path));
  if (j.value("format", "") != "semiord-ensemble")
    throw ConfigError("'" + path + "' is not an ensemble document");
  BootstrapEnsemble out;
  out.warm_started = j.at("warm_started").get<bool>();
  out.unreliable = j.at("unreliable").get<bool>();
  out.replicate_ids = j.at("replicate_ids").get<std::vector<int>>();
  for (const auto& s : j.at("seeds"))
    out.seeds.push_back(std::stoull(s.get<std::string>()));
  for (const auto& r : j.at("replicates"))
    out.replicates.push_back(coefficients_from_json(r));
  for (const auto& f : j.at("failures"))
    out.failures.push_back(BootstrapFailure{f.at("replicate").get<int>(),
                                            f.at("reason").get<std::string>()});
  if (columns) {
    columns->clear();
    for (const auto& c : j.at("columns")) {
      ColumnInfo info;
      ColumnScaling cs;
      column_from_json(c, info, cs);
      columns->push_back(info);
    }
  }
  return out;
}

void save_evaluation_report(const EvaluationReport& report,
                            const std::string& path,
                            const RunManifest& manifest) {
  std::ostringstream out;
  out << "# manifest " << manifest.hash() << "\n";
  out << "model,fold,rps,me,rps_x100,me_x100\n";
  for (const auto& m : report.models) {
    for (std::size_t f = 0; f < m.folds.size(); ++f)
      out << csv_escape(m.model) << ',' << (f + 1) << ','
          << format_double(m.folds[f].rps) << ',' << format_double(m.folds[f].me)
          << ',' << format_double(100.0 * m.folds[f].rps) << ','
          << format_double(100.0 * m.folds[f].me) << '\n';
    out << csv_escape(m.model) << ",avg," << format_double(m.avg_rps) << ','
        << format_double(m.avg_me) << ',' << format_double(100.0 * m.avg_rps)
        << ',' << format_double(100.0 * m.avg_me) << '\n';
  }
  write_text_atomic(path, out.str());
}

void save_grid_report(const GridReport& report, const std::string& path,
                      const RunManifest& manifest) {
  std::ostringstream out;
  out << "# manifest " << manifest.hash() << "\n";
  out << "lambda,rho,avg_rps,avg_me,failed,failure\n";
  for (const auto& p : report.points)
    out << format_double(p.lambda) << ',' << format_double(p.rho) << ','
        << (p.failed ? "" : format_double(p.avg_rps)) << ','
        << (p.failed ? "" : format_double(p.avg_me)) << ','
        << (p.failed ? 1 : 0) << ',' << csv_escape(p.failure) << '\n';
  write_text_atomic(path, out.str());
}

std::map<std::string, std::string> load_key_value_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key=value at line " + std::to_string(line_no));
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace semiord
