// End-to-end checks of the installed command-line surface: subcommands, exit
// codes, artifact layout and determinism. The binary path comes from CMake.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef FLYQ_CLI_PATH
#define FLYQ_CLI_PATH "flyq"
#endif

namespace {

namespace fs = std::filesystem;

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CommandResult run_cli(const std::string& args) {
  std::string cmd = std::string(FLYQ_CLI_PATH) + " " + args + " 2>&1";
  std::FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe)) result.output += buf;
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "flyq_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const std::string& name, const std::string& body) {
  fs::path path = scratch_dir() / name;
  std::ofstream out(path);
  out << body;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string phase_config(const std::string& outdir) {
  return "scenario = \"gate\"\noutput = \"" + outdir +
         "\"\n[gate]\nkind = \"PHASE\"\nlength = \"1 nat\"\nomega_q = \"0.5 nat\"\n"
         "v0 = \"1 nat\"\ndelta_x = \"0.05 nat\"\nsamples = 16\n";
}

}  // namespace

TEST_CASE("run produces CSV and manifest; PHASE ends at unit fidelity") {
  fs::path out = scratch_dir() / "phase_run";
  fs::remove_all(out);
  std::string cfg = write_config("phase.toml", phase_config(out.string()));
  CommandResult r = run_cli("run " + cfg);
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "trajectory.csv"));
  REQUIRE(fs::exists(out / "manifest.txt"));

  std::string csv = slurp((out / "trajectory.csv").string());
  CHECK(csv.rfind("t,F_pert,S_pert_nats,S_pert_bits,F_clock,S_clock_nats,"
                  "fid_approx_vs_grid\n", 0) == 0);
  // final F_clock column of the last row
  std::string last = csv.substr(0, csv.find_last_not_of('\n') + 1);
  last = last.substr(last.rfind('\n') + 1);
  std::stringstream ss(last);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  REQUIRE(fields.size() >= 6);
  CHECK(std::stod(fields[4]) >= 1.0 - 1e-8);
  CHECK(std::stod(fields[5]) <= 1e-8);
  CHECK(fields[6].empty());  // grid tier disabled
}

TEST_CASE("repeated runs are byte-identical") {
  fs::path out = scratch_dir() / "det_run";
  std::string cfg = write_config("det.toml", phase_config(out.string()));
  CHECK(run_cli("run " + cfg).exit_code == 0);
  std::string first = slurp((out / "trajectory.csv").string());
  CHECK(run_cli("run " + cfg).exit_code == 0);
  CHECK(first == slurp((out / "trajectory.csv").string()));
  CHECK(!first.empty());
}

TEST_CASE("schema violations exit 2 with a line-anchored message") {
  std::string cfg = write_config("bad.toml",
                                 "scenario = \"gate\"\n[gate]\nkind = \"NOT\"\n"
                                 "length = \"1 nat\"\nomega_q = \"0.5 nat\"\n"
                                 "v0 = \"1 nat\"\ndelta_x = \"0.05 nat\"\nbogus = 2\n");
  CommandResult r = run_cli("run " + cfg);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("line 8") != std::string::npos);
  CHECK(r.output.find("bogus") != std::string::npos);
}

TEST_CASE("missing config exits 2") {
  CommandResult r = run_cli("run /nonexistent/flyq.toml");
  CHECK(r.exit_code == 2);
}

TEST_CASE("validate prints diagnostics and exits 0") {
  std::string cfg = write_config("val.toml", phase_config((scratch_dir() / "v").string()));
  CommandResult r = run_cli("validate " + cfg);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("epsilon = ") != std::string::npos);
  CHECK(r.output.find("support_check = ok") != std::string::npos);
}

TEST_CASE("empty sweep writes a header-only table and exits 0") {
  fs::path out = scratch_dir() / "sweep_empty";
  std::string cfg = write_config("se.toml", phase_config(out.string()));
  CommandResult r = run_cli("sweep " + cfg + " --axis gate.delta_x --values ,");
  CHECK(r.exit_code == 0);
  std::string csv = slurp((out / "sweep.csv").string());
  CHECK(csv == "index,value,status,message\n");
}

TEST_CASE("failing sweep points become error rows and the sweep continues") {
  fs::path out = scratch_dir() / "sweep_err";
  std::string cfg = write_config("serr.toml", phase_config(out.string()));
  // negative spread is invalid, the other two points still run
  CommandResult r = run_cli("sweep " + cfg + " --axis gate.delta_x --values 0.05,-1,0.02");
  CHECK(r.exit_code == 0);
  std::string csv = slurp((out / "sweep.csv").string());
  CHECK(csv.find("0,0.05") != std::string::npos);
  CHECK(csv.find("1,-1,error") != std::string::npos);
  CHECK(csv.find("2,0.02") != std::string::npos);
}

TEST_CASE("unknown sweep axis exits 2") {
  std::string cfg = write_config("sax.toml", phase_config((scratch_dir() / "sx").string()));
  CommandResult r = run_cli("sweep " + cfg + " --axis gate.flux --values 1,2");
  CHECK(r.exit_code == 2);
}

TEST_CASE("table trapped prints the three regimes") {
  CommandResult r = run_cli("table trapped");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("surfing") != std::string::npos);
  CHECK(r.output.find("shuttling") != std::string::npos);
  CHECK(r.output.find("Rydberg") != std::string::npos);
}

TEST_CASE("trapped preset run reports the expected bound") {
  fs::path out = scratch_dir() / "trap_run";
  std::string cfg = write_config(
      "trap.toml", "scenario = \"trapped\"\noutput = \"" + out.string() +
                       "\"\n[trapped]\npreset = \"surfing\"\n");
  CommandResult r = run_cli("run " + cfg);
  CHECK(r.exit_code == 0);
  std::string csv = slurp((out / "trajectory.csv").string());
  // header then a single bound near 3e-9
  auto nl = csv.find('\n');
  double bound = std::stod(csv.substr(nl + 1));
  CHECK(bound == doctest::Approx(3.24e-9).epsilon(0.01));
}
