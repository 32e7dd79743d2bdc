#include "semiord/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace semiord {

std::vector<int> DesignMatrix::lhu_columns() const {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(columns.size()); ++j)
    if (columns[j].lhu) out.push_back(j);
  return out;
}

std::vector<int> DesignMatrix::main_effect_columns() const {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(columns.size()); ++j)
    if (!columns[j].lhu && !columns[j].interaction) out.push_back(j);
  return out;
}

std::vector<std::string> lhu_levels(const std::vector<std::string>& labels) {
  std::set<std::string> uniq(labels.begin(), labels.end());
  return {uniq.begin(), uniq.end()};
}

namespace {

struct MainColumn {
  ColumnInfo info;
  int spec_index;
  int level = -1;  // dummy level for categoricals, -1 for numeric/binary
};

std::vector<MainColumn> main_column_plan(const std::vector<VariableSpec>& specs) {
  std::vector<MainColumn> plan;
  for (int v = 0; v < static_cast<int>(specs.size()); ++v) {
    const auto& s = specs[v];
    switch (s.kind) {
      case VariableKind::Binary: {
        MainColumn c;
        c.info.name = s.name;
        c.info.sources = {s.name};
        c.spec_index = v;
        plan.push_back(c);
        break;
      }
      case VariableKind::Categorical: {
        if (s.levels.size() < 2)
          throw SchemaError("categorical variable '" + s.name +
                            "' declares fewer than 2 levels");
        if (s.levels.size() == 2) {
          MainColumn c;
          c.info.name = s.name + "=" + s.levels[1];
          c.info.sources = {s.name};
          c.spec_index = v;
          c.level = 1;
          plan.push_back(c);
        } else {
          // reference coding: first declared level dropped
          for (int l = 1; l < static_cast<int>(s.levels.size()); ++l) {
            MainColumn c;
            c.info.name = s.name + "=" + s.levels[l];
            c.info.sources = {s.name};
            c.spec_index = v;
            c.level = l;
            plan.push_back(c);
          }
        }
        break;
      }
      case VariableKind::Numeric: {
        MainColumn c;
        c.info.name = s.name;
        c.info.sources = {s.name};
        c.info.numeric = true;
        c.spec_index = v;
        plan.push_back(c);
        break;
      }
    }
  }
  return plan;
}

Vector extract_column(const RecordTable& records, const VariableSpec& spec,
                      const MainColumn& plan) {
  const RawColumn* col = records.find(spec.name);
  if (!col) throw SchemaError("column '" + spec.name + "' missing from records");
  const long n = static_cast<long>(records.n);
  Vector out(n);
  if (spec.kind == VariableKind::Numeric) {
    if (!col->is_numeric)
      throw SchemaError("column '" + spec.name + "' is not numeric");
    for (long i = 0; i < n; ++i) {
      const double v = col->values[i];
      if (std::isnan(v))
        throw SchemaError("missing value in column '" + spec.name + "'");
      out[i] = v;
    }
    return out;
  }
  // binary / categorical
  const int n_levels = spec.kind == VariableKind::Binary
                           ? 2
                           : static_cast<int>(spec.levels.size());
  for (long i = 0; i < n; ++i) {
    int code;
    if (col->is_numeric) {
      const double v = col->values[i];
      if (std::isnan(v))
        throw SchemaError("missing value in column '" + spec.name + "'");
      code = static_cast<int>(v);
      if (static_cast<double>(code) != v)
        throw SchemaError("non-integer level in column '" + spec.name + "'");
    } else {
      code = col->codes[i];
    }
    if (code < 0 || code >= n_levels)
      throw SchemaError("unknown level in column '" + spec.name + "'");
    if (plan.level >= 0)
      out[i] = code == plan.level ? 1.0 : 0.0;
    else
      out[i] = static_cast<double>(code);
  }
  return out;
}

}  // namespace

DesignMatrix build_design(const RecordTable& records,
                          const std::vector<VariableSpec>& specs,
                          bool include_lhu,
                          const std::vector<std::string>& lhu_labels,
                          const std::vector<std::string>& lhu_level_order,
                          bool interactions) {
  const long n = static_cast<long>(records.n);
  const auto plan = main_column_plan(specs);
  const int m = static_cast<int>(plan.size());

  std::vector<std::pair<int, int>> pairs;  // interaction column index pairs
  if (interactions)
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        if (plan[a].spec_index != plan[b].spec_index) pairs.emplace_back(a, b);

  std::vector<std::string> lhu_order = lhu_level_order;
  if (include_lhu) {
    if (lhu_labels.size() != records.n)
      throw SchemaError("LHU labels required for every record");
    if (lhu_order.empty()) lhu_order = lhu_levels(lhu_labels);
  }
  const int l_count = include_lhu ? static_cast<int>(lhu_order.size()) : 0;

  const int p = m + static_cast<int>(pairs.size()) + l_count;
  DesignMatrix design;
  design.values.resize(n, p);
  design.columns.resize(p);
  design.scaling.assign(p, ColumnScaling{});

  for (int c = 0; c < m; ++c) {
    design.values.col(c) = extract_column(records, specs[plan[c].spec_index], plan[c]);
    design.columns[c] = plan[c].info;
  }
  for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
    const auto [a, b] = pairs[k];
    const int c = m + k;
    design.values.col(c) =
        design.values.col(a).cwiseProduct(design.values.col(b));
    ColumnInfo info;
    info.name = plan[a].info.name + ":" + plan[b].info.name;
    info.sources = {plan[a].info.sources[0], plan[b].info.sources[0]};
    info.interaction = true;
    info.numeric = plan[a].info.numeric || plan[b].info.numeric;
    design.columns[c] = info;
  }
  if (include_lhu) {
    std::map<std::string, int> index;
    for (int l = 0; l < l_count; ++l) index[lhu_order[l]] = l;
    design.values.rightCols(l_count).setZero();
    for (long i = 0; i < n; ++i) {
      auto it = index.find(lhu_labels[i]);
      if (it == index.end())
        throw SchemaError("unknown LHU label '" + lhu_labels[i] + "'");
      design.values(i, m + static_cast<int>(pairs.size()) + it->second) = 1.0;
    }
    for (int l = 0; l < l_count; ++l) {
      ColumnInfo info;
      info.name = "LHU=" + lhu_order[l];
      info.sources = {"LHU"};
      info.lhu = true;
      design.columns[m + static_cast<int>(pairs.size()) + l] = info;
    }
  }
  return design;
}

namespace {

const VariableSpec& spec_of(const std::vector<VariableSpec>& specs,
                            const std::string& name) {
  for (const auto& s : specs)
    if (s.name == name) return s;
  throw SchemaError("no spec for variable '" + name + "'");
}

void recompute_interactions(DesignMatrix& design) {
  std::map<std::string, int> by_name;
  for (int c = 0; c < static_cast<int>(design.columns.size()); ++c)
    if (!design.columns[c].interaction && !design.columns[c].lhu)
      by_name[design.columns[c].name] = c;
  for (int c = 0; c < static_cast<int>(design.columns.size()); ++c) {
    const auto& info = design.columns[c];
    if (!info.interaction) continue;
    const auto sep = info.name.find(':');
    const int a = by_name.at(info.name.substr(0, sep));
    const int b = by_name.at(info.name.substr(sep + 1));
    design.values.col(c) =
        design.values.col(a).cwiseProduct(design.values.col(b));
  }
}

}  // namespace

DesignMatrix apply_scaling(const DesignMatrix& design,
                           const std::vector<VariableSpec>& specs,
                           std::optional<ScalingMode> mode) {
  DesignMatrix out = design;
  const long n = out.rows();
  for (int c : out.main_effect_columns()) {
    auto& info = out.columns[c];
    if (!info.numeric) continue;
    const ScalingMode eff =
        mode ? *mode : spec_of(specs, info.sources[0]).scaling;
    if (eff == ScalingMode::None) continue;
    auto col = out.values.col(c);
    ColumnScaling cs;
    cs.mode = eff;
    if (eff == ScalingMode::Standardize) {
      cs.location = col.mean();
      const double ss = (col.array() - cs.location).square().sum();
      cs.scale = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    } else {  // MinMax
      cs.location = col.minCoeff();
      cs.scale = col.maxCoeff() - cs.location;
    }
    if (!(cs.scale > 0.0))
      throw SchemaError("degenerate column '" + info.name +
                        "': zero spread, cannot scale");
    col = (col.array() - cs.location) / cs.scale;
    out.scaling[c] = cs;
  }
  recompute_interactions(out);
  out.scaled = true;
  return out;
}

DesignMatrix transfer_scaling(const RecordTable& new_records,
                              const std::vector<VariableSpec>& specs,
                              const DesignMatrix& fitted_design,
                              const std::vector<std::string>& lhu_labels) {
  std::vector<std::string> lhu_order;
  for (int c : fitted_design.lhu_columns())
    lhu_order.push_back(fitted_design.columns[c].name.substr(4));
  const bool include_lhu = !lhu_order.empty();
  bool interactions = false;
  for (const auto& info : fitted_design.columns)
    if (info.interaction) interactions = true;

  DesignMatrix out = build_design(new_records, specs, include_lhu, lhu_labels,
                                  lhu_order, interactions);
  if (out.cols() != fitted_design.cols())
    throw SchemaError("scaling metadata does not match the variable specs");
  for (int c = 0; c < out.cols(); ++c) {
    if (out.columns[c].name != fitted_design.columns[c].name)
      throw SchemaError("column mismatch at position " + std::to_string(c));
    const auto& cs = fitted_design.scaling[c];
    if (cs.mode == ScalingMode::None) continue;
    out.values.col(c) = (out.values.col(c).array() - cs.location) / cs.scale;
    out.scaling[c] = cs;
  }
  recompute_interactions(out);
  out.scaled = fitted_design.scaled;
  return out;
}

}  // namespace semiord
