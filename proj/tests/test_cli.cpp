#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ciid/cli.hpp"
#include "ciid/io.hpp"

using namespace ciid;
namespace fs = std::filesystem;

namespace {

struct Result {
  int rc;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ciid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {rc, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "ciid_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

const std::string kNormal = R"({"family":"exch_normal","rho":0,"d":2})";

}  // namespace

TEST(CliSample, DeterministicCsv) {
  auto a = run_cli({"sample", "--model", kNormal, "--n", "4", "--seed", "7"});
  auto b = run_cli({"sample", "--model", kNormal, "--n", "4", "--seed", "7"});
  ASSERT_EQ(a.rc, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("x1,x2\n", 0), 0u);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 5);
  EXPECT_EQ(a.out.find('\r'), std::string::npos);
  auto c = run_cli({"sample", "--model", kNormal, "--n", "4", "--seed", "8"});
  EXPECT_NE(a.out, c.out);
}

TEST(CliSample, ThreadCountDoesNotChangeOutput) {
  auto a = run_cli({"sample", "--model", kNormal, "--n", "9000", "--seed", "3"});
  auto b = run_cli({"sample", "--model", kNormal, "--n", "9000", "--seed", "3", "--threads", "3"});
  EXPECT_EQ(a.out, b.out);
}

TEST(CliSample, BinaryProducesIdenticalFiles) {
  std::string exe = CIID_CLI_PATH;
  auto f1 = scratch("a.csv"), f2 = scratch("b.csv");
  for (const auto& f : {f1, f2}) {
    std::string cmd = "\"" + exe + "\" sample --model '" + kNormal + "' --n 50 --seed 7 --out \"" + f.string() + "\"";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
  }
  EXPECT_EQ(slurp(f1), slurp(f2));
  EXPECT_FALSE(slurp(f1).empty());
}

TEST(CliSample, RejectsInvalidMarshallOlkin) {
  auto r = run_cli({"sample", "--model", R"({"family":"marshall_olkin","b":[1,0.5,0.1]})", "--n", "4", "--seed", "1"});
  EXPECT_EQ(r.rc, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(CliSample, SeedIsRequired) {
  EXPECT_NE(run_cli({"sample", "--model", kNormal, "--n", "4"}).rc, 0);
  EXPECT_NE(run_cli({"verify", "--model", kNormal}).rc, 0);
}

TEST(CliSample, InfinityWrittenAndReadBack) {
  auto path = scratch("inf.csv");
  auto r = run_cli({"sample", "--model", R"({"family":"l1","d":2,"M":{"family":"finite_discrete","atoms":[0,1],"weights":[0.5,0.5]}})",
                "--n", "200", "--seed", "5", "--out", path.string()});
  ASSERT_EQ(r.rc, 0) << r.err;
  auto text = slurp(path);
  EXPECT_NE(text.find("inf"), std::string::npos);
  auto s = io::read_csv_file(path.string());
  EXPECT_EQ(s.n, 200u);
  std::size_t infs = 0;
  for (double v : s.data) infs += std::isinf(v);
  EXPECT_GT(infs, 0u);
}

TEST(CliMinstable, LogisticSampleAndVerify) {
  std::string m = R"({"family":"minstable","d":3,"stdf":{"kind":"logistic","theta":0.5}})";
  auto r = run_cli({"sample", "--model", m, "--n", "20", "--seed", "11"});
  EXPECT_EQ(r.rc, 0);
  auto v = run_cli({"verify", "--model", m, "--n", "50000", "--seed", "11"});
  EXPECT_EQ(v.rc, 0) << v.out;
  auto j = nlohmann::json::parse(v.out);
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("points").size(), 10u);
}

TEST(CliVerify, ExitCodesAndCsv) {
  auto path = scratch("report.csv");
  auto ok = run_cli({"verify", "--model", R"({"family":"sato","d":1,"alpha":1})", "--n", "20000", "--seed", "2", "--grid", "1;0.5",
                 "--out", path.string()});
  EXPECT_EQ(ok.rc, 0) << ok.out;
  EXPECT_EQ(nlohmann::json::parse(ok.out).at("points").size(), 2u);
  EXPECT_FALSE(slurp(path).empty());
  auto m = cli::parse_model({{"family", "l1"}, {"d", 2}});
  m.eval["survival"] = [](std::span<const double> x) { return std::exp(-(x[0] + x[1])); };
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_verify(m, 20000, 2, Grid{{1, 1}, {0.5, 0.1}}, "", out), cli::kVerifyFailed);
  EXPECT_EQ(run_cli({"verify", "--model", R"({"family":"l1","d":2})", "--seed", "1", "--grid", "1,1,1"}).rc, 1);
}

TEST(CliEval, Examples) {
  auto a = run_cli({"eval", "--model", R"({"family":"sato","alpha":1,"d":1})", "--point", "1"});
  EXPECT_EQ(a.out, "0.5\n");
  auto b = run_cli({"eval", "--model", R"({"family":"dirichlet_prior","c":1,"d":2})", "--point", "0.5,0.5", "--kind", "copula"});
  EXPECT_EQ(b.out, "0.375\n");
  auto c = run_cli({"eval", "--model", R"({"family":"minstable","d":2,"stdf":{"kind":"logistic","theta":0.5}})", "--point", "1,1"});
  EXPECT_EQ(c.out, cli::format_12(std::exp(-std::sqrt(2.0))) + "\n");
  EXPECT_EQ(run_cli({"eval", "--model", R"({"family":"sato","d":2})", "--point", "1,1", "--kind", "stdf"}).rc, 1);
  EXPECT_EQ(run_cli({"eval", "--model", R"({"family":"sato","d":2})", "--point", "1"}).rc, 1);
}

TEST(CliEval, SurvivalAtZeroIsOne) {
  for (const auto& f : cli::families()) {
    auto m = cli::parse_model({{"family", f}});
    if (!m.has("survival")) continue;
    std::vector<double> z(m.d, 0.0);
    double v = m.eval.at("survival")(z);
    if (f == "exch_normal" || f == "spherical" || f == "binary")
      EXPECT_LT(v, 1.0) << f;
    else
      EXPECT_NEAR(v, 1.0, 1e-12) << f;
  }
}

TEST(CliCheck, Verdicts) {
  auto a = run_cli({"check", "--model", R"({"family":"binary","b":[1,0.5,0.25]})"});
  ASSERT_EQ(a.rc, 0);
  EXPECT_TRUE(nlohmann::json::parse(a.out).at("extendible").get<bool>());
  auto b = run_cli({"check", "--model", R"({"family":"binary","b":[1,0.5,0.2499]})"});
  EXPECT_FALSE(nlohmann::json::parse(b.out).at("extendible").get<bool>());
  auto c = run_cli({"check", "--model", R"({"family":"binary","b":[1,0.5,0.6]})"});
  ASSERT_EQ(c.rc, 0) << c.err;
  EXPECT_FALSE(nlohmann::json::parse(c.out).at("extendible").get<bool>());
  EXPECT_EQ(run_cli({"sample", "--model", R"({"family":"binary","b":[1,0.5,0.6]})", "--n", "4", "--seed", "1"}).rc, 1);
  EXPECT_EQ(run_cli({"check", "--model", R"({"family":"sato"})"}).rc, 1);
  auto mo = run_cli({"check", "--model", R"({"family":"marshall_olkin"})"});
  EXPECT_TRUE(nlohmann::json::parse(mo.out).at("extendible").get<bool>());
}

TEST(CliModel, ParamsAndConflicts) {
  auto a = run_cli({"eval", "--param", "family=sato", "--param", "d=1", "--param", "alpha=1", "--point", "1"});
  EXPECT_EQ(a.out, "0.5\n");
  auto b = run_cli({"eval", "--model", R"({"family":"sato","alpha":2,"d":1})", "--param", "alpha=1", "--point", "1"});
  EXPECT_EQ(b.rc, 1);
  EXPECT_EQ(run_cli({"eval", "--model", "/nonexistent/model.json", "--point", "1"}).rc, 3);
  EXPECT_EQ(run_cli({"eval", "--model", R"({"family":"nope"})", "--point", "1"}).rc, 1);
  auto file = scratch("model.json");
  std::ofstream(file) << R"({"family":"sato","alpha":1,"d":1})";
  EXPECT_EQ(run_cli({"eval", "--model", file.string(), "--point", "1"}).out, "0.5\n");
}

TEST(CliDiagnose, RoundTrip) {
  for (const auto& f : cli::families()) {
    auto path = scratch(f + ".csv");
    auto s = run_cli({"sample", "--model", "{\"family\":\"" + f + "\"}", "--n", "3000", "--seed", "4", "--out", path.string()});
    ASSERT_EQ(s.rc, 0) << f << s.err;
    auto d = run_cli({"diagnose", path.string(), "--tests", "kendall,ties"});
    ASSERT_EQ(d.rc, 0) << f << d.err;
    auto j = nlohmann::json::parse(d.out);
    EXPECT_TRUE(j.at("kendall").at("pass").get<bool>()) << f;
    EXPECT_TRUE(j.contains("ties"));
  }
  EXPECT_EQ(run_cli({"diagnose", "/nonexistent.csv"}).rc, 3);
}

TEST(CliDiagnose, RejectsMalformedCsv) {
  auto path = scratch("bad.csv");
  std::ofstream(path) << "x1,x2\n1,2\n3\n";
  EXPECT_EQ(run_cli({"diagnose", path.string()}).rc, 1);
  std::ofstream(path) << "a,b\n1,2\n";
  EXPECT_EQ(run_cli({"diagnose", path.string()}).rc, 1);
}
