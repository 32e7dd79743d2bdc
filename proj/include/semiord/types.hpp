#ifndef SEMIORD_TYPES_HPP
#define SEMIORD_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace semiord {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when a linear predictor leaves the region where the cumulative
// construction yields valid probabilities (an interior category probability
// would be negative). The optimizer maps this to an infinite objective.
class InvalidRegion : public std::runtime_error {
 public:
  InvalidRegion(int margin, const std::string& what)
      : std::runtime_error(what), margin_(margin) {}
  int margin() const { return margin_; }

 private:
  int margin_;
};

class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Parameters of the cumulative model: J ordered thresholds, P shared
// coefficients and a P x J matrix of margin-specific deviations.
struct CoefficientSet {
  Vector thresholds;  // length J, strictly increasing
  Vector shared;      // length P
  Matrix specific;    // P x J

  int margins() const { return static_cast<int>(thresholds.size()); }
  int dim() const { return static_cast<int>(shared.size()); }

  // gamma_j = shared + specific column j; the identified per-margin effects.
  Vector margin_coefficients(int j) const {
    return shared + specific.col(j);
  }

  static CoefficientSet zeros(int p, int j) {
    CoefficientSet cs;
    cs.thresholds = Vector::Zero(j);
    cs.shared = Vector::Zero(p);
    cs.specific = Matrix::Zero(p, j);
    return cs;
  }
};

// One typed covariate column as loaded from a delimited file.
struct RawColumn {
  std::string name;
  bool is_numeric = false;
  std::vector<double> values;        // numeric payload
  std::vector<int> codes;            // categorical payload (level indices)
  std::vector<std::string> levels;   // declared level names, fixed order
};

struct RecordTable {
  std::size_t n = 0;
  std::vector<RawColumn> columns;

  const RawColumn* find(const std::string& name) const {
    for (const auto& c : columns)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Ordinal responses plus covariate records, normalized weights and the LHU
// label of every respondent.
struct OrdinalDataset {
  std::vector<int> y;               // 0-based category index
  std::vector<int> category_codes;  // declared codes in order, e.g. {-1,0,1}
  int n_categories = 0;
  Vector weights;                   // normalized so that sum == n
  RecordTable records;
  std::vector<std::string> lhu;     // empty when no LHU column is declared

  std::size_t size() const { return y.size(); }
  int margins() const { return n_categories - 1; }
};

// Normalizes raw weights so they sum to n and validates the response coding.
OrdinalDataset make_dataset(std::vector<int> y,
                            std::vector<int> category_codes,
                            Vector raw_weights,
                            RecordTable records = {},
                            std::vector<std::string> lhu = {});

// Row subset (bootstrap replicates, CV folds).
OrdinalDataset subset_dataset(const OrdinalDataset& data,
                              const std::vector<int>& rows);

}  // namespace semiord

#endif
