#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "gfam/matio.hpp"
#include "helpers.hpp"
#include "json.hpp"

using testing::TempDir;

namespace {

int run_cli(const std::string& args, const TempDir& dir) {
  const std::string cmd = std::string(GFAM_CLI) + " " + args + " > " + (dir / "stdout.txt").string() +
                          " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<double>> csv_rows(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  TempDir dir;
  CHECK(run_cli("", dir) == 2);
  CHECK(run_cli("cluster --k 3", dir) == 2);
  CHECK(run_cli("frobnicate", dir) == 2);
  REQUIRE(run_cli("gen --kind planes-line --n-plane 20 --n-line 10 --output " + (dir / "p.csv").string(), dir) == 0);
  CHECK(run_cli("ensemble --input " + (dir / "p.csv").string() + " --q 0", dir) == 2);
  CHECK(run_cli("cluster --input " + (dir / "p.csv").string() + " --alpha 1.5", dir) == 2);
  CHECK(run_cli("cssp --input " + (dir / "p.csv").string() + " --r-list 4 --output " + (dir / "c.csv").string(), dir) == 2);
}

TEST_CASE("runtime failures exit with 1") {
  TempDir dir;
  CHECK(run_cli("cluster --input " + (dir / "missing.csv").string(), dir) == 1);
  std::ofstream(dir / "bad.csv") << "1,2\n3,x\n";
  CHECK(run_cli("cluster --input " + (dir / "bad.csv").string() + " --k 1", dir) == 1);
  CHECK(slurp(dir / "stderr.txt").find("at byte 6") != std::string::npos);
}

TEST_CASE("gen and cluster: outputs are written and byte-identical across runs") {
  TempDir dir;
  const std::string data = (dir / "b.bin").string();
  REQUIRE(run_cli("gen --kind blobs --k 3 --ambient 40 --per-cluster 30 --separation 30 --seed 4 --output " + data +
                   " --truth " + (dir / "truth.json").string(),
               dir) == 0);
  const auto truth = nlohmann::json::parse(slurp(dir / "truth.json"));
  CHECK(truth["true_k"] == 3);
  CHECK(truth["labels"].size() == 90);

  const std::string args = "cluster --input " + data + " --alpha 0.5 --k 6 --r 6 --adapt --seed 9 --out ";
  REQUIRE(run_cli(args + (dir / "a").string(), dir) == 0);
  REQUIRE(run_cli(args + (dir / "b").string(), dir) == 0);
  for (const char* f : {"labels.csv", "report.json", "plot.csv"}) {
    REQUIRE(std::filesystem::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const auto report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  CHECK(report.contains("energy_trace"));
  CHECK(gfam::load_labels(dir / "a" / "labels.csv").size() == 90);
  CHECK(slurp(dir / "a" / "plot.csv").rfind("pc1,pc2,label\n", 0) == 0);
}

TEST_CASE("ensemble reports an estimate") {
  TempDir dir;
  const std::string data = (dir / "p.csv").string();
  REQUIRE(run_cli("gen --kind planes-line --n-plane 40 --n-line 20 --seed 2 --output " + data, dir) == 0);
  REQUIRE(run_cli("ensemble --input " + data + " --B 10 --q 20 --out " + (dir / "e").string(), dir) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "e" / "ensemble.json"));
  CHECK(j["k_hat"].get<int>() >= 1);
  CHECK(j["runs"] == 10);
  CHECK(gfam::load_labels(dir / "e" / "labels.csv").size() == 100);
}

TEST_CASE("cssp sweep writes one row per rank and a monitor") {
  TempDir dir;
  const std::string data = (dir / "l.bin").string();
  REQUIRE(run_cli("gen --kind lowrank --m 60 --n 50 --rank 12 --noise 0.001 --seed 3 --output " + data, dir) == 0);
  REQUIRE(run_cli("cssp --input " + data + " --r-list 4,8,12 --method cpqr --variant cvod --k 3 --output " +
                   (dir / "c.csv").string() + " --monitor " + (dir / "m.csv").string(),
               dir) == 0);
  const auto rows = csv_rows(dir / "c.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][0] == 4);
  CHECK(rows[2][1] < rows[0][1]);
  CHECK(csv_rows(dir / "m.csv").size() == 3);
}

TEST_CASE("mor: 41 rows on the desk grid and one cluster reproduces POD") {
  TempDir dir;
  REQUIRE(run_cli("mor --k 1 --output " + (dir / "m.csv").string() + " --report " + (dir / "r.json").string(), dir) == 0);
  const auto rows = csv_rows(dir / "m.csv");
  REQUIRE(rows.size() == 41);
  for (const auto& row : rows) CHECK(std::abs(row[1] - row[2]) <= 1e-9);
  CHECK(std::filesystem::exists(dir / "r.json"));
  std::ofstream(dir / "bad.json") << "{\"dx\": 0.03}";
  CHECK(run_cli("mor --pde-config " + (dir / "bad.json").string() + " --output " + (dir / "x.csv").string(), dir) != 0);
}
