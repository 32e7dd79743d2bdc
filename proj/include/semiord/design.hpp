#ifndef SEMIORD_DESIGN_HPP
#define SEMIORD_DESIGN_HPP

#include "semiord/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace semiord {

enum class VariableKind { Binary, Categorical, Numeric };
enum class ScalingMode { None, Standardize, MinMax };

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::Numeric;
  std::vector<std::string> levels;  // categorical only, >= 2 entries
  ScalingMode scaling = ScalingMode::Standardize;  // numeric columns only
};

struct ColumnInfo {
  std::string name;
  std::vector<std::string> sources;  // 1 source, or 2 for interactions
  bool interaction = false;
  bool lhu = false;
  bool numeric = false;  // carries a scalable (non 0/1) payload
};

struct ColumnScaling {
  ScalingMode mode = ScalingMode::None;
  double location = 0.0;  // mean (standardize) or min (min-max)
  double scale = 1.0;     // sd (standardize) or max-min (min-max)
};

struct DesignMatrix {
  Matrix values;                     // n x P
  std::vector<ColumnInfo> columns;   // length P
  std::vector<ColumnScaling> scaling;  // length P, identity until scaled
  bool scaled = false;

  long cols() const { return values.cols(); }
  long rows() const { return values.rows(); }
  std::vector<int> lhu_columns() const;
  std::vector<int> main_effect_columns() const;  // non-LHU, non-interaction
};

// Expands records into main effects (spec order; categoricals with >2 levels
// use reference coding, the first level is dropped), all two-way interactions
// between columns of distinct source variables (unless disabled), and
// optionally one indicator per LHU. Column order is deterministic.
DesignMatrix build_design(const RecordTable& records,
                          const std::vector<VariableSpec>& specs,
                          bool include_lhu,
                          const std::vector<std::string>& lhu_labels = {},
                          const std::vector<std::string>& lhu_level_order = {},
                          bool interactions = true);

// Scales numeric main-effect columns in place (interaction columns are
// recomputed from their scaled parents) and records the statistics used.
// mode == nullopt applies each variable's spec-declared scaling.
DesignMatrix apply_scaling(const DesignMatrix& design,
                           const std::vector<VariableSpec>& specs,
                           std::optional<ScalingMode> mode = std::nullopt);

// Applies previously recorded scaling statistics to new records without
// recomputing anything. Out-of-range values are allowed.
DesignMatrix transfer_scaling(const RecordTable& new_records,
                              const std::vector<VariableSpec>& specs,
                              const DesignMatrix& fitted_design,
                              const std::vector<std::string>& lhu_labels = {});

// Distinct LHU labels in sorted order.
std::vector<std::string> lhu_levels(const std::vector<std::string>& labels);

}  // namespace semiord

#endif
