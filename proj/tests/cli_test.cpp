#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Output {
  int code;
  std::string out;
};

Output run(const std::string& args) {
  const std::string cmd = std::string(HARDYOP_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string cfg(const std::string& name) { return std::string(HARDYOP_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hardyop_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const std::string& name, const std::string& body) {
  const auto path = scratch("cfg_" + name) / "config.json";
  std::ofstream(path) << body;
  return path.string();
}

json run_json(const std::string& args) {
  const auto r = run(args + " --format json");
  EXPECT_EQ(r.code, 0) << args;
  return json::parse(r.out);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(CliEval, IdentityAtComplexPoint) {
  const auto j = run_json("eval --config " + write_config("eval_id", R"({
    "phi": {"nevanlinna": {"alpha": 0}}, "points": [[1.0, 1.0]]})"));
  ASSERT_EQ(j["rows"].size(), 1u);
  const auto& r = j["rows"][0];
  EXPECT_DOUBLE_EQ(r["phi_re"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r["phi_im"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r["dphi_re"].get<double>(), 1.0);
  EXPECT_EQ(r["branch"].get<int>(), -1);
}

TEST(CliEval, SqrtOnRightBranch) {
  const auto j = run_json("eval --config " + cfg("sqrt.json"));
  bool seen = false;
  for (const auto& r : j["rows"]) {
    if (r["x"] == 2.0 && r["y"] == 0.0) {
      EXPECT_NEAR(r["phi_re"].get<double>(), std::sqrt(3.0), 1e-15);
      EXPECT_EQ(r["branch"].get<int>(), 1);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(CliEval, ZlogAtOne) {
  const auto j = run_json("eval --config " + write_config("eval_zlog", R"({
    "phi": {"catalog": "zlog"}, "points": [1.0]})"));
  EXPECT_DOUBLE_EQ(j["rows"][0]["phi_re"].get<double>(), 1.0);
  EXPECT_NEAR(j["rows"][0]["dphi_re"].get<double>(), 2.0, 1e-14);
}

TEST(CliClark, SqrtNoAtoms) {
  const auto j = run_json("clark --config " + write_config("clark_sqrt", R"({
    "phi": {"catalog": "sqrt"}, "taus": [0]})"));
  EXPECT_EQ(j["rows"][0]["atoms"].get<int>(), 0);
  EXPECT_NEAR(j["rows"][0]["ac_mass"].get<double>(), 1.0, 1e-6);
}

TEST(CliClark, ZlogAtomFilesWritten) {
  const auto dir = scratch("clark_zlog");
  const auto r = run("clark --config " + write_config("clark_zlog", R"({
    "phi": {"catalog": "zlog"}, "taus": [1]})") + " --out " + dir.string() + " --format json");
  ASSERT_EQ(r.code, 0);
  const auto atoms = json::parse(slurp(dir / "clark_atoms.json"));
  ASSERT_EQ(atoms["rows"].size(), 1u);
  EXPECT_NEAR(atoms["rows"][0]["position"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(atoms["rows"][0]["mass"].get<double>(), 0.5, 1e-12);
  EXPECT_TRUE(fs::exists(dir / "clark.json"));
  EXPECT_TRUE(fs::exists(dir / "clark_density_0.json"));
}

TEST(CliClark, TranslationAtom) {
  const auto dir = scratch("clark_tr");
  ASSERT_EQ(run("clark --config " + cfg("translation.json") + " --out " + dir.string() +
                " --format json").code, 0);
  const auto atoms = json::parse(slurp(dir / "clark_atoms.json"))["rows"];
  ASSERT_EQ(atoms.size(), 1u);
  EXPECT_EQ(atoms[0]["tau"].get<double>(), 5.0);
  EXPECT_NEAR(atoms[0]["position"].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(atoms[0]["mass"].get<double>(), 1.0, 1e-12);
}

TEST(CliConstants, Verdicts) {
  for (const auto& [name, verdict] :
       {std::pair{"identity.json", "closed_range"}, std::pair{"sqrt.json", "not_closed_range"},
        std::pair{"zloglin0.json", "closed_range"}}) {
    const auto j = run_json(std::string("constants --config ") + cfg(name));
    EXPECT_EQ(j["meta"]["verdict"], verdict) << name;
    EXPECT_EQ(j["rows"].size(), 4u);
  }
}

TEST(CliSimilarity, Statuses) {
  for (const auto& [name, status] : {std::pair{"zloglin5.json", "certified"},
                                     std::pair{"sqrt.json", "hypothesis_failed"},
                                     std::pair{"zloglin0.json", "alpha_too_small"}}) {
    const auto j = run_json(std::string("similarity --config ") + cfg(name));
    EXPECT_EQ(j["rows"][0]["status"], status) << name;
  }
}

TEST(CliSimilarity, IteratedTableAndOrbit) {
  const auto dir = scratch("sim");
  ASSERT_EQ(run("similarity --config " + cfg("zloglin5.json") + " --out " + dir.string()).code, 0);
  EXPECT_TRUE(fs::exists(dir / "similarity_iterates.csv"));
  EXPECT_TRUE(fs::exists(dir / "similarity_orbit.csv"));
}

TEST(CliVerify, AllSuitesPass) {
  const auto r = run("verify --config " + cfg("verify.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find(",false\n"), std::string::npos) << r.out;
  for (const char* suite : {"\nboole,", "\nletac,", "\ntsereteli,", "\ndisk_identity,"})
    EXPECT_NE(r.out.find(suite), std::string::npos) << suite;
}

TEST(CliVerify, FailureExitsOne) {
  const auto r = run("verify --config " + write_config("verify_fail", R"({
    "phi": {"catalog": "sqrt"},
    "verify": {"tsereteli": {"y": 100, "tolerance": 1e-12}}})"));
  EXPECT_EQ(r.code, 1);
}

TEST(CliErrors, ConfigProblemsExitTwo) {
  EXPECT_EQ(run("eval --config " + cfg("bad_key.json")).code, 2);
  EXPECT_EQ(run("eval --config /nonexistent/file.json").code, 2);
  EXPECT_EQ(run("eval --config " + write_config("badjson", "{ not json")).code, 2);
  EXPECT_EQ(run("eval --config " + write_config("badcat", R"({"phi": {"catalog": "nope"}})")).code, 2);
  EXPECT_EQ(run("eval --config " + write_config("twophi", R"({"phi": {"catalog": "sqrt",
    "nevanlinna": {}}})")).code, 2);
  EXPECT_EQ(run("clark --config " + write_config("beta2", R"({"phi": {"nevanlinna": {"beta": 2}}})")).code, 2);
  EXPECT_EQ(run("eval").code, 2);
  EXPECT_EQ(run("eval --config " + cfg("sqrt.json") + " --format xml").code, 2);
}

TEST(CliOutput, DeterministicFiles) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b})
    ASSERT_EQ(run("constants --config " + cfg("zloglin0.json") + " --out " + d.string() + " --seed 3 --jobs 2").code, 0);
  for (const auto& e : fs::directory_iterator(a)) {
    const auto other = b / e.path().filename();
    ASSERT_TRUE(fs::exists(other));
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path();
  }
  const auto v1 = run("verify --config " + cfg("verify.json") + " --seed 11");
  const auto v2 = run("verify --config " + cfg("verify.json") + " --seed 11");
  EXPECT_EQ(v1.out, v2.out);
  EXPECT_NE(v1.out.find("# seed: 11"), std::string::npos);
}

TEST(CliOutput, CsvHeaderEchoesDefaults) {
  const auto r = run("eval --config " + cfg("zlog.json"));
  for (const char* key : {"# command: eval", "# phi: zlog", "# seed: 1", "# y_grid:",
                          "# threshold_floor:", "\nx,y,phi_re,phi_im,dphi_re,dphi_im,branch\n"})
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
}
