#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "clab/embedding_set.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / ("clab_cli_" + std::to_string(::getpid()));

int run_clab(const std::string& args) {
  const std::string cmd = std::string(CLAB_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string out_dir(const std::string& name) { return (kWork / name).string(); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

nlohmann::json read_json(const fs::path& path) { return nlohmann::json::parse(slurp(path)); }

struct Workspace {
  Workspace() { fs::create_directories(kWork); }
  ~Workspace() { fs::remove_all(kWork); }
} workspace;

}  // namespace

TEST_CASE("ufm-run exit codes") {
  CHECK(run_clab("ufm-run --out " + out_dir("ufm")) == 0);
  CHECK(fs::exists(kWork / "ufm" / "embeddings.emb"));
  CHECK(read_json(kWork / "ufm" / "summary.json")["pass"] == true);
  CHECK(run_clab("ufm-run --dim 3 --out " + out_dir("ufm_bad_dim")) == 2);
  CHECK(run_clab("ufm-run --steps 0 --out " + out_dir("ufm_zero")) == 1);
}

TEST_CASE("config files reject unknown keys and wrong types") {
  const auto path = kWork / "bad.json";
  std::ofstream(path) << R"({"steps": 10, "stepz": 3})";
  CHECK(run_clab("ufm-run --config " + path.string() + " --out " + out_dir("bad1")) == 2);
  std::ofstream(path) << R"({"steps": "ten"})";
  CHECK(run_clab("ufm-run --config " + path.string() + " --out " + out_dir("bad2")) == 2);
  std::ofstream(path) << R"({"classes": [4, 8], "repeats": 1, "steps": 5, "seed": 3})";
  CHECK(run_clab("gap-sweep --config " + path.string() + " --out " + out_dir("good")) == 0);
  CHECK(read_json(kWork / "good" / "manifest.json")["seed"] == 3);
}

TEST_CASE("gap-sweep rows and reproducibility") {
  CHECK(run_clab("gap-sweep --source random --classes 4,16,64 --repeats 2 --out " + out_dir("sweep")) == 0);
  const auto rows = read_csv(kWork / "sweep" / "gaps.csv");
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == std::vector<std::string>{"C", "repeat", "dcl", "nscl", "gap", "bound"});
  double previous_bound = 1e300;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(std::stod(rows[r][4]) >= 0.0);
    CHECK(std::stod(rows[r][4]) <= std::stod(rows[r][5]));
    if (r % 2 == 1) {
      CHECK(std::stod(rows[r][5]) < previous_bound);
      previous_bound = std::stod(rows[r][5]);
    }
  }
  CHECK(run_clab("gap-sweep --config " + (kWork / "sweep" / "manifest.json").string() + " --out " + out_dir("sweep2")) == 0);
  CHECK(slurp(kWork / "sweep" / "gaps.csv") == slurp(kWork / "sweep2" / "gaps.csv"));
  CHECK(run_clab("gap-sweep --source random --classes 4 --repeats 1 --seed 9 --out " + out_dir("sweep3")) == 0);
  CHECK(slurp(kWork / "sweep" / "gaps.csv") != slurp(kWork / "sweep3" / "gaps.csv"));
}

TEST_CASE("bound-check on an exactly collapsed bundle") {
  const Eigen::MatrixXd means = clab::simplex_etf(3, 3);
  Eigen::MatrixXd data(120, 3);
  for (int i = 0; i < 60; ++i) data.middleRows(2 * i, 2).rowwise() = means.row(i / 20);
  const clab::EmbeddingSet set(60, 2, data, clab::Labeling::balanced_blocks(60, 3));
  const auto bundle = kWork / "collapsed.emb";
  clab::save_bundle(set, bundle);
  CHECK(run_clab("bound-check --source bundle --dispersion empirical --shots 5,10 --input " + bundle.string() +
             " --out " + out_dir("collapsed")) == 0);
  const auto rows = read_csv(kWork / "collapsed" / "bounds.csv");
  REQUIRE(rows.size() == 2);  // m = 5 skipped
  CHECK(rows[1][0] == "10");
  CHECK(rows[1][1] == "0");
  CHECK(rows[1][2] == "0");
  CHECK(rows[1][4] == "0");
  CHECK(read_json(kWork / "collapsed" / "summary.json")["skipped_m"] == nlohmann::json::array({5}));
}

TEST_CASE("bound-check reproduces the optimized bound on the matching Gaussian task") {
  CHECK(run_clab("bound-check --n-classes 6 --dim 5 --sigma 0.2 --distance 2 --shots 100 --per-class 200 --out " +
             out_dir("cor")) == 0);
  const auto rows = read_csv(kWork / "cor" / "bounds.csv");
  CHECK(std::stod(rows[1][4]) == doctest::Approx(0.3217031).epsilon(1e-6));
}

TEST_CASE("batch-check rows") {
  CHECK(run_clab("batch-check --n-classes 100 --n-samples 2000 --batch-sizes 1024 --epsilons 0.05 --n-trials 200 --out " +
             out_dir("batch")) == 0);
  const auto rows = read_csv(kWork / "batch" / "batch.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][2] == "963");
  CHECK(std::stod(rows[1][5]) == doctest::Approx(-0.115034).epsilon(1e-5));
  CHECK(std::stod(rows[1][6]) == doctest::Approx(0.586676).epsilon(1e-5));

  CHECK(run_clab("batch-check --n-classes 2 --n-samples 100 --batch-sizes 64 --epsilons 0.05,0.6 --n-trials 50 --out " +
             out_dir("batch_reject")) == 0);
  CHECK(read_csv(kWork / "batch_reject" / "batch.csv").size() == 2);
  CHECK(read_json(kWork / "batch_reject" / "summary.json")["rejected"].size() == 1);
  CHECK(run_clab("batch-check --n-classes 2 --n-samples 100 --epsilons 0.6 --out " + out_dir("batch_none")) == 2);
}

TEST_CASE("report on a bundle") {
  const auto set = clab::generate_random_unit(20, 2, 4, 1).with_labeling(clab::Labeling::balanced_blocks(20, 4));
  const auto bundle = kWork / "report.emb";
  clab::save_bundle(set, bundle);
  CHECK(run_clab("report --input " + bundle.string() + " --compare " + bundle.string() + " --out " + out_dir("report")) == 0);
  const auto summary = read_json(kWork / "report" / "summary.json");
  CHECK(summary["cka"].get<double>() == doctest::Approx(1.0));
  CHECK(summary["gap"]["gap_dcl_nscl"].get<double>() >= 0.0);
  CHECK(read_csv(kWork / "report" / "anchors.csv").size() == 41);
  CHECK(run_clab("report --out " + out_dir("report_missing")) == 2);
}
