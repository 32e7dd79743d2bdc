#include <doctest.h>

#include "semiord/io.hpp"
#include "semiord/synth.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace semiord;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("semiord-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

RecordSchema toy_schema() {
  RecordSchema s;
  s.response_column = "resp";
  s.response_codes = {-1, 0, 1};
  s.lhu_column = "lhu";
  s.weight_column = "w";
  s.variables = {
      {"sex", VariableKind::Binary, {}, ScalingMode::None},
      {"age", VariableKind::Categorical, {"a", "b", "c"}, ScalingMode::None},
      {"score", VariableKind::Numeric, {}, ScalingMode::Standardize},
  };
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("schema round trip") {
  TempDir dir;
  const RecordSchema s = toy_schema();
  save_schema(s, dir.file("schema.json"));
  const RecordSchema r = load_schema(dir.file("schema.json"));
  CHECK(r.response_column == "resp");
  CHECK(r.response_codes == std::vector<int>{-1, 0, 1});
  CHECK(r.lhu_column == "lhu");
  CHECK(r.weight_column == "w");
  REQUIRE(r.variables.size() == 3);
  CHECK(r.variables[1].kind == VariableKind::Categorical);
  CHECK(r.variables[1].levels == std::vector<std::string>{"a", "b", "c"});
  CHECK(r.variables[2].scaling == ScalingMode::Standardize);
}

TEST_CASE("dataset loading") {
  TempDir dir;
  const RecordSchema schema = toy_schema();

  SUBCASE("valid rows load with typed columns") {
    write_file(dir.file("d.csv"),
               "resp,lhu,w,sex,age,score\n"
               "-1,u1,1.0,0,a,1.5\n"
               "0,u2,2.0,1,b,2.5\n"
               "1,u1,1.0,0,c,3.5\n");
    const LoadResult res = load_dataset(dir.file("d.csv"), schema);
    CHECK(res.rows_in == 3);
    CHECK(res.rows_dropped == 0);
    REQUIRE(res.dataset.size() == 3);
    CHECK(res.dataset.y == std::vector<int>{0, 1, 2});
    CHECK(res.dataset.lhu == std::vector<std::string>{"u1", "u2", "u1"});
    CHECK(res.dataset.weights.sum() == doctest::Approx(3.0));
    const RawColumn* age = res.dataset.records.find("age");
    REQUIRE(age);
    CHECK(age->codes == std::vector<int>{0, 1, 2});
    const RawColumn* score = res.dataset.records.find("score");
    REQUIRE(score);
    CHECK(score->values[1] == doctest::Approx(2.5));
  }

  SUBCASE("out-of-scope response codes are dropped and counted") {
    write_file(dir.file("d.csv"),
               "resp,lhu,w,sex,age,score\n"
               "-1,u1,1,0,a,1\n"
               "9,u1,1,0,a,1\n"
               "0,u1,1,1,b,2\n"
               "1,u1,1,0,c,3\n");
    const LoadResult res = load_dataset(dir.file("d.csv"), schema);
    CHECK(res.rows_in == 4);
    CHECK(res.rows_dropped == 1);
    CHECK(res.dataset.size() == 3);
    CHECK(res.rows_in == static_cast<long>(res.dataset.size()) + res.rows_dropped);
  }

  SUBCASE("missing declared column names it") {
    write_file(dir.file("d.csv"),
               "resp,lhu,w,sex,score\n"
               "-1,u1,1,0,1\n");
    try {
      load_dataset(dir.file("d.csv"), schema);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("age") != std::string::npos);
    }
  }

  SUBCASE("unknown level reports the line") {
    write_file(dir.file("d.csv"),
               "resp,lhu,w,sex,age,score\n"
               "-1,u1,1,0,a,1\n"
               "0,u1,1,0,zzz,2\n"
               "1,u1,1,0,b,3\n");
    try {
      load_dataset(dir.file("d.csv"), schema);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      const std::string what = e.what();
      CHECK(what.find("zzz") != std::string::npos);
      CHECK(what.find("3") != std::string::npos);  // 1-based file line
    }
  }

  SUBCASE("missing value is an error") {
    write_file(dir.file("d.csv"),
               "resp,lhu,w,sex,age,score\n"
               "-1,u1,1,0,a,\n");
    CHECK_THROWS_AS(load_dataset(dir.file("d.csv"), schema), SchemaError);
  }

  SUBCASE("comment lines are skipped") {
    write_file(dir.file("d.csv"),
               "# manifest deadbeefdeadbeef\n"
               "resp,lhu,w,sex,age,score\n"
               "-1,u1,1,0,a,1\n"
               "0,u1,1,1,b,2\n"
               "1,u1,1,0,c,3\n");
    const LoadResult res = load_dataset(dir.file("d.csv"), schema);
    CHECK(res.dataset.size() == 3);
  }

  SUBCASE("round trip: save then reload is identical") {
    write_file(dir.file("d.csv"),
               "resp,lhu,w,sex,age,score\n"
               "-1,u1,1.25,0,a,1.5\n"
               "0,u2,2.0,1,b,-2.5\n"
               "1,u1,0.75,0,c,3.0\n"
               "1,u2,1.0,1,a,0.125\n");
    const LoadResult first = load_dataset(dir.file("d.csv"), toy_schema());
    save_dataset(first.dataset, toy_schema(), dir.file("copy.csv"), "abc123");
    const LoadResult second = load_dataset(dir.file("copy.csv"), toy_schema());
    CHECK(second.dataset.y == first.dataset.y);
    CHECK(second.dataset.lhu == first.dataset.lhu);
    CHECK((second.dataset.weights - first.dataset.weights)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    for (const auto& col : first.dataset.records.columns) {
      const RawColumn* other = second.dataset.records.find(col.name);
      REQUIRE(other);
      CHECK(other->values == col.values);
      CHECK(other->codes == col.codes);
    }
    CHECK(read_file(dir.file("copy.csv")).rfind("# manifest abc123", 0) == 0);
  }
}

TEST_CASE("run manifest hashing") {
  RunManifest m;
  m.command = "fit";
  m.config = {{"alpha", "0.5"}, {"lambda", "1e-4"}};
  m.seed = 7;
  const std::string h1 = m.hash();
  CHECK(h1.size() == 16);
  CHECK(m.hash() == h1);  // deterministic
  RunManifest other = m;
  other.config["lambda"] = "1e-3";
  CHECK(other.hash() != h1);
  // wall time does not participate: reruns of the same config match
  RunManifest slow = m;
  slow.wall_time_seconds = 99.0;
  CHECK(slow.hash() == h1);
}

TEST_CASE("fit round trip") {
  TempDir dir;
  PopulationConfig config;
  config.n = 200;
  config.n_lhu = 3;
  config.n_binary = 1;
  config.seed = 5;
  config.truth = random_truth(config, 6);
  const SyntheticData data = generate(config);
  DesignMatrix design = data.design;
  design = apply_scaling(design, data.specs);
  const ModelFit fitted = fit(data.dataset, design.values, {1e-3, 0.5, 1.0});

  RunManifest manifest;
  manifest.command = "fit";
  manifest.seed = 5;
  save_fit(fitted, design, dir.file("fit.json"), manifest);
  const LoadedFit loaded = load_fit(dir.file("fit.json"));

  CHECK((loaded.fit.coefs.thresholds - fitted.coefs.thresholds)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((loaded.fit.coefs.shared - fitted.coefs.shared).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((loaded.fit.coefs.specific - fitted.coefs.specific)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(loaded.fit.hyper.lambda == fitted.hyper.lambda);
  CHECK(loaded.fit.converged == fitted.converged);
  REQUIRE(loaded.columns.size() == design.columns.size());
  for (std::size_t p = 0; p < loaded.columns.size(); ++p) {
    CHECK(loaded.columns[p].name == design.columns[p].name);
    CHECK(loaded.columns[p].lhu == design.columns[p].lhu);
    CHECK(loaded.scaling[p].location ==
          doctest::Approx(design.scaling[p].location));
  }
}

TEST_CASE("ensemble round trip") {
  TempDir dir;
  BootstrapEnsemble ens;
  for (int r = 0; r < 3; ++r) {
    CoefficientSet c = CoefficientSet::zeros(2, 2);
    c.thresholds << -1.0 - r, 1.0 + r;
    c.shared << 0.5 * r, -0.25;
    c.specific.setConstant(0.01 * r);
    ens.replicates.push_back(c);
    ens.replicate_ids.push_back(r);
    ens.seeds.push_back(1000 + r);
  }
  ens.warm_started = true;
  ens.failures.push_back({7, "did not converge"});

  RunManifest manifest;
  manifest.command = "bootstrap";
  save_ensemble(ens, {}, dir.file("ens.json"), manifest);
  const BootstrapEnsemble loaded = load_ensemble(dir.file("ens.json"));
  REQUIRE(loaded.replicates.size() == 3);
  CHECK(loaded.replicate_ids == ens.replicate_ids);
  CHECK(loaded.seeds == ens.seeds);
  CHECK(loaded.warm_started);
  REQUIRE(loaded.failures.size() == 1);
  CHECK(loaded.failures[0].replicate == 7);
  for (int r = 0; r < 3; ++r) {
    CHECK((loaded.replicates[r].thresholds - ens.replicates[r].thresholds)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((loaded.replicates[r].specific - ens.replicates[r].specific)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("evaluation report file") {
  TempDir dir;
  EvaluationReport report;
  ModelEvaluation ev;
  ev.model = "marginal";
  ev.folds = {{0.25, 0.5, false}, {0.35, 0.4, false}};
  ev.avg_rps = 0.3;
  ev.avg_me = 0.45;
  report.models.push_back(ev);
  RunManifest manifest;
  manifest.command = "cv";
  save_evaluation_report(report, dir.file("cv.csv"), manifest);
  const std::string text = read_file(dir.file("cv.csv"));
  CHECK(text.find("marginal") != std::string::npos);
  CHECK(text.find("rps") != std::string::npos);
  CHECK(text.find("# manifest " + manifest.hash()) != std::string::npos);
}

TEST_CASE("key=value config files") {
  TempDir dir;
  write_file(dir.file("run.cfg"),
             "# comment\n"
             "alpha = 0.5\n"
             "lambda=1e-4\n"
             "\n"
             "out = /tmp/x.json\n");
  const auto cfg = load_key_value_config(dir.file("run.cfg"));
  CHECK(cfg.at("alpha") == "0.5");
  CHECK(cfg.at("lambda") == "1e-4");
  CHECK(cfg.at("out") == "/tmp/x.json");
  CHECK(cfg.size() == 3);
}

TEST_CASE("atomic writes replace the target completely") {
  TempDir dir;
  write_text_atomic(dir.file("a.txt"), "first\n");
  write_text_atomic(dir.file("a.txt"), "second\n");
  CHECK(read_file(dir.file("a.txt")) == "second\n");
  // no temp file litter
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
}
