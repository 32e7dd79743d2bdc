#ifndef SEMIORD_IO_HPP
#define SEMIORD_IO_HPP

#include "semiord/design.hpp"
#include "semiord/evaluation.hpp"
#include "semiord/inference.hpp"
#include "semiord/optimizer.hpp"
#include "semiord/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace semiord {

struct RecordSchema {
  std::string response_column;
  std::vector<int> response_codes;  // ordered, e.g. -1,0,1
  std::string lhu_column;           // optional
  std::string weight_column;        // optional
  std::vector<VariableSpec> variables;
};

RecordSchema load_schema(const std::string& path);
void save_schema(const RecordSchema& schema, const std::string& path);

struct LoadResult {
  OrdinalDataset dataset;
  long rows_in = 0;
  long rows_dropped = 0;  // out-of-scope response codes
};

// Reads a comma-separated file with a mandatory header. Rows whose response
// code is not declared in the schema are dropped and counted; missing values
// and unknown levels are errors.
LoadResult load_dataset(const std::string& path, const RecordSchema& schema);

void save_dataset(const OrdinalDataset& data, const RecordSchema& schema,
                  const std::string& path, const std::string& manifest_hash = "");

// Key/value run manifest shared by every CLI artifact.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  double wall_time_seconds = 0.0;

  std::string hash() const;  // FNV-1a over the canonical config echo
};

// Versioned fit document: coefficients keyed by column metadata,
// hyperparameters and convergence diagnostics.
void save_fit(const ModelFit& fit_result, const DesignMatrix& design,
              const std::string& path, const RunManifest& manifest);
struct LoadedFit {
  ModelFit fit;
  std::vector<ColumnInfo> columns;
  std::vector<ColumnScaling> scaling;
};
LoadedFit load_fit(const std::string& path);

void save_ensemble(const BootstrapEnsemble& ensemble,
                   const std::vector<ColumnInfo>& columns,
                   const std::string& path, const RunManifest& manifest);
BootstrapEnsemble load_ensemble(const std::string& path,
                                std::vector<ColumnInfo>* columns = nullptr);

void save_evaluation_report(const EvaluationReport& report,
                            const std::string& path,
                            const RunManifest& manifest);

void save_grid_report(const GridReport& report, const std::string& path,
                      const RunManifest& manifest);

void save_manifest(const RunManifest& manifest, const std::string& path);

// Atomic text write (temp file + rename).
void write_text_atomic(const std::string& path, const std::string& content);

// Plain key=value config files; '#' starts a comment.
std::map<std::string, std::string> load_key_value_config(const std::string& path);

}  // namespace semiord

#endif
