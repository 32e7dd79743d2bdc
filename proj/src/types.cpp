#include "semiord/types.hpp"

#include <algorithm>
#include <set>

namespace semiord {

OrdinalDataset make_dataset(std::vector<int> y,
                            std::vector<int> category_codes,
                            Vector raw_weights,
                            RecordTable records,
                            std::vector<std::string> lhu) {
  const std::size_t n = y.size();
  if (category_codes.size() < 3)
    throw StructuralError("ordinal response needs at least 3 categories");
  std::set<int> uniq(category_codes.begin(), category_codes.end());
  if (uniq.size() != category_codes.size())
    throw StructuralError("duplicate category codes");

  const int k = static_cast<int>(category_codes.size());
  for (int v : y)
    if (v < 0 || v >= k) throw StructuralError("response index out of range");

  if (raw_weights.size() == 0) raw_weights = Vector::Ones(static_cast<long>(n));
  if (static_cast<std::size_t>(raw_weights.size()) != n)
    throw StructuralError("weight vector length mismatch");
  if ((raw_weights.array() < 0.0).any())
    throw StructuralError("negative observation weight");
  const double total = raw_weights.sum();
  if (n > 0 && total <= 0.0)
    throw StructuralError("weights sum to zero");

  if (records.n != 0 && records.n != n)
    throw StructuralError("record table size mismatch");
  if (!lhu.empty() && lhu.size() != n)
    throw StructuralError("LHU label vector length mismatch");

  OrdinalDataset d;
  d.y = std::move(y);
  d.category_codes = std::move(category_codes);
  d.n_categories = k;
  d.weights = n > 0 ? Vector(raw_weights * (static_cast<double>(n) / total))
                    : Vector();
  d.records = std::move(records);
  d.records.n = n;
  d.lhu = std::move(lhu);
  return d;
}

OrdinalDataset subset_dataset(const OrdinalDataset& data,
                              const std::vector<int>& rows) {
  const std::size_t m = rows.size();
  std::vector<int> y(m);
  Vector w(static_cast<long>(m));
  std::vector<std::string> lhu;
  if (!data.lhu.empty()) lhu.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const int r = rows[i];
    y[i] = data.y[r];
    w[static_cast<long>(i)] = data.weights[r];
    if (!data.lhu.empty()) lhu[i] = data.lhu[r];
  }
  RecordTable tab;
  tab.n = m;
  for (const auto& col : data.records.columns) {
    RawColumn c;
    c.name = col.name;
    c.is_numeric = col.is_numeric;
    c.levels = col.levels;
    if (col.is_numeric) {
      c.values.resize(m);
      for (std::size_t i = 0; i < m; ++i) c.values[i] = col.values[rows[i]];
    } else {
      c.codes.resize(m);
      for (std::size_t i = 0; i < m; ++i) c.codes[i] = col.codes[rows[i]];
    }
    tab.columns.push_back(std::move(c));
  }
  return make_dataset(std::move(y), data.category_codes, std::move(w),
                      std::move(tab), std::move(lhu));
}

}  // namespace semiord
