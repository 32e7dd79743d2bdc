#include "semiord/synth.hpp"

#include "semiord/core_model.hpp"
#include "semiord/evaluation.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace semiord {

std::vector<VariableSpec> population_specs(const PopulationConfig& config) {
  std::vector<VariableSpec> specs;
  if (config.stratify_sex_age) {
    VariableSpec sex;
    sex.name = "sex";
    sex.kind = VariableKind::Binary;
    specs.push_back(sex);
    VariableSpec age;
    age.name = "ageclass";
    age.kind = VariableKind::Categorical;
    age.levels = {"18-34", "35-49", "50-69"};
    specs.push_back(age);
  }
  for (int b = 0; b < config.n_binary; ++b) {
    VariableSpec s;
    s.name = "bin" + std::to_string(b + 1);
    s.kind = VariableKind::Binary;
    specs.push_back(s);
  }
  for (int v = 0; v < config.n_numeric; ++v) {
    VariableSpec s;
    s.name = "num" + std::to_string(v + 1);
    s.kind = VariableKind::Numeric;
    specs.push_back(s);
  }
  return specs;
}

int population_dim(const PopulationConfig& config) {
  int m = config.n_binary + config.n_numeric;
  if (config.stratify_sex_age) m += 3;  // sex + 2 age dummies
  int inter = 0;
  if (config.interactions) {
    inter = m * (m - 1) / 2;
    if (config.stratify_sex_age) inter -= 1;  // the within-age dummy pair
  }
  return m + inter + config.n_lhu;
}

CoefficientSet random_truth(const PopulationConfig& config, std::uint64_t seed,
                            double shared_scale, double specific_scale) {
  const int p = population_dim(config);
  const int j_count = config.n_categories - 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  CoefficientSet truth = CoefficientSet::zeros(p, j_count);
  for (int j = 0; j < j_count; ++j)
    truth.thresholds[j] = -1.0 + 2.0 * static_cast<double>(j) /
                                      std::max(1, j_count - 1);
  if (j_count == 1) truth.thresholds[0] = 0.0;
  for (int q = 0; q < p; ++q) truth.shared[q] = shared_scale * noise(rng);
  for (int j = 0; j < j_count; ++j)
    for (int q = 0; q < p; ++q)
      truth.specific(q, j) = specific_scale * noise(rng);
  return truth;
}

namespace {

RecordTable draw_records(const PopulationConfig& config,
                         const std::vector<VariableSpec>& specs,
                         std::mt19937_64& rng,
                         std::vector<std::string>& lhu_labels) {
  RecordTable tab;
  tab.n = static_cast<std::size_t>(config.n);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (const auto& s : specs) {
    RawColumn col;
    col.name = s.name;
    if (s.kind == VariableKind::Numeric) {
      col.is_numeric = true;
      col.values.resize(tab.n);
      for (auto& v : col.values) v = gauss(rng);
    } else {
      col.levels = s.kind == VariableKind::Binary
                       ? std::vector<std::string>{"0", "1"}
                       : s.levels;
      col.codes.resize(tab.n);
      const int k = static_cast<int>(col.levels.size());
      for (auto& c : col.codes)
        c = k == 2 ? (coin(rng) ? 1 : 0)
                   : static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    }
    tab.columns.push_back(std::move(col));
  }

  if (config.n_lhu > 0) {
    lhu_labels.resize(tab.n);
    for (auto& l : lhu_labels) {
      const int id =
          static_cast<int>(rng() % static_cast<std::uint64_t>(config.n_lhu));
      std::ostringstream name;
      name << "LHU" << (id + 1 < 10 ? "0" : "") << (id + 1);
      l = name.str();
    }
  }
  return tab;
}

void redraw_row(RecordTable& tab, const std::vector<VariableSpec>& specs,
                std::vector<std::string>& lhu_labels, int n_lhu, long row,
                std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t c = 0; c < tab.columns.size(); ++c) {
    auto& col = tab.columns[c];
    if (col.is_numeric) {
      col.values[row] = gauss(rng);
    } else {
      const int k = static_cast<int>(col.levels.size());
      col.codes[row] = k == 2
                           ? (coin(rng) ? 1 : 0)
                           : static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    }
  }
  (void)specs;
  if (n_lhu > 0) {
    const int id = static_cast<int>(rng() % static_cast<std::uint64_t>(n_lhu));
    std::ostringstream name;
    name << "LHU" << (id + 1 < 10 ? "0" : "") << (id + 1);
    lhu_labels[row] = name.str();
  }
}

}  // namespace

SyntheticData generate(const PopulationConfig& config) {
  if (config.n < 1) throw ConfigError("population size must be positive");
  const auto violations = validate_coefficients(config.truth);
  if (!violations.empty())
    throw ConfigError("invalid true coefficients: " + violations.front());
  if (config.truth.dim() != population_dim(config))
    throw ConfigError("true coefficient dimension does not match the design");

  std::mt19937_64 rng(config.seed);
  std::vector<VariableSpec> specs = population_specs(config);
  std::vector<std::string> lhu_labels;
  RecordTable records = draw_records(config, specs, rng, lhu_labels);

  // LHU levels fixed a priori so the design has n_lhu columns even when some
  // unit never draws a given LHU (only relevant for tiny n).
  std::vector<std::string> lhu_order;
  for (int l = 0; l < config.n_lhu; ++l) {
    std::ostringstream name;
    name << "LHU" << (l + 1 < 10 ? "0" : "") << (l + 1);
    lhu_order.push_back(name.str());
  }

  auto make_design = [&] {
    return build_design(records, specs, config.n_lhu > 0, lhu_labels, lhu_order,
                        config.interactions);
  };
  DesignMatrix design = make_design();

  // Count first-draw invalid units, then redraw covariates where needed.
  long first_invalid = 0;
  Matrix eta = linear_predictor_matrix(design.values, config.truth);
  auto row_valid = [&](long i) {
    for (long j = 1; j < eta.cols(); ++j)
      if (sigmoid(eta(i, j)) < sigmoid(eta(i, j - 1))) return false;
    return true;
  };
  std::vector<long> bad;
  for (long i = 0; i < eta.rows(); ++i)
    if (!row_valid(i)) bad.push_back(i);
  first_invalid = static_cast<long>(bad.size());
  const double invalid_rate =
      static_cast<double>(first_invalid) / static_cast<double>(config.n);
  if (invalid_rate > 0.001) {
    std::ostringstream msg;
    msg << "coefficient scale yields invalid probability regions for "
        << invalid_rate * 100.0
        << "% of units; shrink the margin-specific deviations";
    throw ConfigError(msg.str());
  }
  int guard = 0;
  while (!bad.empty()) {
    if (++guard > 1000) throw ConfigError("could not redraw valid covariates");
    for (long i : bad)
      redraw_row(records, specs, lhu_labels, config.n_lhu, i, rng);
    design = make_design();
    eta = linear_predictor_matrix(design.values, config.truth);
    std::vector<long> still;
    for (long i : bad)
      if (!row_valid(i)) still.push_back(i);
    bad = std::move(still);
  }

  // Responses from the cumulative-logit probabilities at the truth.
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> y(config.n);
  Vector row_eta(eta.cols());
  for (long i = 0; i < eta.rows(); ++i) {
    row_eta = eta.row(i);
    const Vector pi = cumulative_probabilities(row_eta);
    const double u = unif(rng);
    double cum = 0.0;
    int cat = config.n_categories - 1;
    for (int k = 0; k < config.n_categories; ++k) {
      cum += pi[k];
      if (u <= cum) {
        cat = k;
        break;
      }
    }
    y[static_cast<std::size_t>(i)] = cat;
  }

  std::vector<int> codes;
  if (config.n_categories == 3)
    codes = {-1, 0, 1};
  else
    for (int k = 0; k < config.n_categories; ++k) codes.push_back(k);

  SyntheticData out;
  out.dataset = make_dataset(std::move(y), std::move(codes), Vector(),
                             std::move(records), std::move(lhu_labels));
  out.design = std::move(design);
  out.truth = config.truth;
  out.specs = std::move(specs);
  out.invalid_rate = invalid_rate;
  return out;
}

Vector empirical_probabilities(const OrdinalDataset& data,
                               const std::vector<std::string>& cell_vars,
                               const std::string& cell_key) {
  const auto keys = cell_vars.empty()
                        ? std::vector<std::string>(data.size(), "")
                        : stratum_keys(data, cell_vars);
  Vector counts = Vector::Zero(data.n_categories);
  long hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (keys[i] != cell_key) continue;
    counts[data.y[i]] += 1.0;
    ++hits;
  }
  if (hits == 0) throw ConfigError("empty covariate cell '" + cell_key + "'");
  return counts / static_cast<double>(hits);
}

}  // namespace semiord
