#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "chiralfv/analytic.hpp"
#include "chiralfv/io.hpp"

using namespace chiralfv;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "chiralfv_cli";

int cli(const std::string& args, const std::string& stdout_file = "out.txt") {
  fs::create_directories(kDir);
  const std::string cmd = std::string(CHIRALFV_CLI_PATH) + " " + args + " > " + (kDir / stdout_file).string() +
                          " 2> " + (kDir / "err.txt").string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("unknown subcommand prints usage and fails") {
  CHECK(cli("frobnicate") != 0);
  const std::string err = slurp(kDir / "err.txt");
  CHECK(err.find("Usage") != std::string::npos);
  CHECK(cli("") != 0);
}

TEST_CASE("sce table starts at the von Mises state") {
  REQUIRE(cli("sce --alpha-from 0 --alpha-to 1.5 --alpha-step 0.01 --d-list 0.1", "sce.csv") == 0);
  std::ifstream in(kDir / "sce.csv");
  const CsvTable t = read_csv(in);
  REQUIRE(t.rows.size() == 151);
  ModelParams p;
  CHECK(std::stod(t.rows[0][t.column("R")]) == doctest::Approx(von_mises(0.0, p).r_mag).epsilon(1e-9));
  CHECK(std::stod(t.rows[150][t.column("alpha")]) == doctest::Approx(1.5));
  for (const auto& row : t.rows)
    if (row[t.column("disordered")] == "0") CHECK(std::stod(row[t.column("v")]) <= 1e-12);
  // ordered up to the transition at cos(alpha) = 0.2
  CHECK(t.rows[136][t.column("disordered")] == "0");
  CHECK(t.rows[138][t.column("disordered")] == "1");
}

TEST_CASE("ic and run subcommands") {
  const fs::path chk = kDir / "ic.chk";
  REQUIRE(cli("ic --mode 3d -n 6 -m 6 -l 16 --k-modes 2 --seed 4 --out " + chk.string()) == 0);
  const Field3D f = read_field_3d(chk);
  CHECK(f.grid.n() == 6);
  CHECK(std::abs(total_mass(f) - 1.0) < 1e-12);

  const fs::path cfg = kDir / "run.ini";
  {
    std::ofstream out(cfg);
    out << "mode = 3d\n[params]\nd_phi = 0.1\nalpha = 1\nrho = 0.2\n[grid]\nn = 6\nm = 6\nl = 16\n"
        << "[stepper]\nt_end = 1\ndt = 0.01\n[ic]\ncheckpoint = " << chk.string() << "\n[output]\ndir = "
        << (kDir / "out").string() << "\nobserve_every = 0.25\n";
  }
  REQUIRE(cli("run " + cfg.string()) == 0);
  std::ifstream in(kDir / "out" / "run.csv");
  const CsvTable t = read_csv(in);
  CHECK(t.rows.size() == 5);
  CHECK(fs::exists(kDir / "out" / "run_final.chk"));
  bool has_grid = false;
  for (const auto& [k, v] : t.meta) has_grid |= (k == "n" && v == "6");
  CHECK(has_grid);
}

TEST_CASE("config errors are a single line") {
  const fs::path cfg = kDir / "bad.ini";
  {
    std::ofstream out(cfg);
    out << "mode = 1d\n[params]\nd_phi = -1\n[grid]\nl = 16\n[stepper]\nt_end = 1\n";
  }
  CHECK(cli("run " + cfg.string()) == 1);
  const std::string err = slurp(kDir / "err.txt");
  CHECK(err.rfind("error: ", 0) == 0);
  CHECK(err.find("d_phi") != std::string::npos);
  CHECK(std::count(err.begin(), err.end(), '\n') == 1);
}

TEST_CASE("norms table") {
  REQUIRE(cli("norms --mode 1d --sizes 16,32 --t-end 0.5 --dt 0.01", "norms.csv") == 0);
  std::ifstream in(kDir / "norms.csv");
  const CsvTable t = read_csv(in);
  CHECK(t.rows.size() == 2);
  CHECK(t.column("L1") == 4);
}
