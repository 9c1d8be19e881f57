#include <gtest/gtest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
  std::string out;
  int code = -1;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(PADEC_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, VerifyGeometryPasses) {
  auto r = run("verify geometry --q 3 --L 4");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  for (auto& rep : j["reports"]) EXPECT_FALSE(rep["anchor"].get<std::string>().empty());
}

TEST(Cli, VerifyKeystepPasses) {
  auto r = run("verify keystep --q 3 --nu-exp 1 --b 1 --trials 10 --format csv");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("keystep_orthogonality"), std::string::npos);
  EXPECT_EQ(r.out.find(",false"), std::string::npos);
}

TEST(Cli, RejectsEvenPrime) {
  auto r = run("verify all --q 2");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("odd prime"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("verify nothing").code, 2);
  EXPECT_EQ(run("count vmvt --N 6000").code, 2);
  EXPECT_EQ(run("estimate dec --L 8").code, 2);
  EXPECT_EQ(run("iterate --c3 1 --lambda0 0").code, 2);
  EXPECT_EQ(run("iterate --lambda0 abc").code, 2);
}

TEST(Cli, CountRows) {
  auto r = run("count vmvt --N 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\n3,93,"), std::string::npos) << r.out;
  EXPECT_NE(run("count vmvt --N 1").out.find("\n1,1,"), std::string::npos);
  auto e = run("count equiv --q 3 --t 1");
  EXPECT_EQ(e.code, 0);
  EXPECT_NE(e.out.find("\nequal,93,"), std::string::npos) << e.out;
  auto rows = run("count vmvt --N-min 1 --N 12");
  EXPECT_NE(rows.out.find("\n12,"), std::string::npos);
  EXPECT_EQ(std::count(rows.out.begin(), rows.out.end(), '\n'), 13);
}

TEST(Cli, IterateTrace) {
  auto r = run("iterate --c3 1 --lambda0 1/2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, 71), "round,N,lambda_exact,lambda_decimal,rounds_in_row\n1,5,31/64,0.484375,1\n");
  auto big = run("iterate --c3 10");
  EXPECT_EQ(big.code, 0);
  EXPECT_EQ(std::count(big.out.begin(), big.out.end(), '\n'), 1962);
  auto j = nlohmann::json::parse(run("iterate --c3 1 --eps 1/1000 --format json").out);
  EXPECT_TRUE(j["terminated"].get<bool>());
  EXPECT_EQ(j["trace"][0]["lambda_exact"], "31/64");
}

TEST(Cli, EstimatePlancherel) {
  auto r = run("estimate dec --p 2 --L 2 --seeds 2");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["reports"][0]["details"]["value"].get<double>(), 1.0, 1e-9);
}

TEST(Cli, EstimateKnAndWitnessFiles) {
  const std::string base = std::string(PADEC_TMP) + "/kn_report.json";
  auto r = run("estimate kn --N 12 --seeds 2 --seed 4 --out " + base);
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(slurp(base));
  auto d = j["reports"][0]["details"];
  EXPECT_GE(d["value"].get<double>(), d["all_ones_ratio"].get<double>() - 1e-12);
  EXPECT_EQ(d["J_N"].get<std::uint64_t>(), 10560u);
  EXPECT_EQ(j["reports"][0]["witness_ref"], base + ".witness.json");
  auto w = nlohmann::json::parse(slurp(base + ".witness.json"));
  EXPECT_EQ(w["a"].size(), 12u);
}

TEST(Cli, ReportsAreDeterministic) {
  const std::string a = std::string(PADEC_TMP) + "/det.json";
  ASSERT_EQ(run("estimate bilinear --seeds 1 --seed 9 --out " + a).code, 0);
  const std::string first = slurp(a), first_witness = slurp(a + ".witness.json");
  ASSERT_EQ(run("estimate bilinear --seeds 1 --seed 9 --out " + a).code, 0);
  EXPECT_EQ(slurp(a), first);
  EXPECT_EQ(slurp(a + ".witness.json"), first_witness);
  EXPECT_EQ(run("verify model --L 2 --trials 5").out, run("verify model --L 2 --trials 5").out);
}
