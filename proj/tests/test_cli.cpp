#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(QKDRATE_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

double h2(double p) { return p <= 0 || p >= 1 ? 0.0 : -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

}  // namespace

TEST(Cli, RateD1MubsQutrit) {
  const auto r = run("rate --scheme d+1 --d 3 --q 0.1 --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["rate"].get<double>(), 0.618452994168251, 1e-12);
  EXPECT_NEAR(j["params"]["a"].get<double>(), 0.866667, 1e-6);
  EXPECT_NEAR(j["params"]["b"].get<double>(), 0.016667, 1e-6);
}

TEST(Cli, RateJsonSchema) {
  const auto r = run("rate --scheme 2 --d 2 --q 0 --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"scheme", "d", "q", "rate", "params", "status", "method"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_DOUBLE_EQ(j["rate"].get<double>(), 1.0);
  EXPECT_EQ(j["method"], "analytic");
}

TEST(Cli, RateEngineReportsStatusAndDelta) {
  const auto cub = run("rate --qubit cuboid --theta 0.5236 --q 0.05 --method engine --format json");
  ASSERT_EQ(cub.code, 0);
  const auto j = nlohmann::json::parse(cub.out);
  EXPECT_TRUE(j["status"] == "converged" || j["status"] == "boundary");
  EXPECT_TRUE(j["rate"].is_number());
  const auto two = nlohmann::json::parse(run("rate --scheme 2 --d 3 --q 0.07 --method engine --format json").out);
  EXPECT_NEAR(two["closed_form_delta"].get<double>(), 0.0, 1e-8);
}

TEST(Cli, RateTextOutput) {
  const auto r = run("rate --scheme d+1 --d 3 --q 0.1");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.618452994168"), std::string::npos);
  EXPECT_NE(r.out.find("closed-form"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("rate --scheme d+1 --d 2 --q 0.9").code, 2);
  EXPECT_EQ(run("rate --scheme 2 --d 4 --q 0.1").code, 1);
  EXPECT_EQ(run("rate --scheme 7 --d 2 --q 0.1").code, 1);
  EXPECT_EQ(run("rate --scheme 2 --d 2").code, 1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, SweepTwoMubQubitMatchesBinaryEntropyForm) {
  const auto r = run("sweep --scheme 2 --d 2 --q-min 0 --q-max 0.15 --q-step 0.01");
  ASSERT_EQ(r.code, 0);
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 17u);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "scheme,d,Q,rate,a,b,c,status");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 8u);
    const double q = std::stod(rows[i][2]);
    EXPECT_NEAR(q, 0.01 * static_cast<double>(i - 1), 1e-12);
    EXPECT_NEAR(std::stod(rows[i][3]), 1 - 2 * h2(q), 1e-9);
  }
}

TEST(Cli, SweepD1CurvesStartAtLogD) {
  const auto r = run("sweep --scheme d+1 --d 2 3 5 7 11 13 --q-min 0 --q-max 0.1 --q-step 0.05");
  ASSERT_EQ(r.code, 0);
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 1u + 6u * 3u);
  int anchors = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][6], "");  // no c class for d+1 MUBs
    if (std::stod(rows[i][2]) == 0.0) {
      ++anchors;
      EXPECT_NEAR(std::stod(rows[i][3]), std::log2(std::stod(rows[i][1])), 1e-11);
    }
  }
  EXPECT_EQ(anchors, 6);
}

TEST(Cli, SweepDMubQutritMatchesGolden) {
  const auto r = run("sweep --scheme d --d 3 --q-min 0 --q-max 0.3 --q-step 0.01");
  ASSERT_EQ(r.code, 0);
  std::ifstream in(std::string(GOLDEN_DIR) + "/sweep_dmub_d3.csv", std::ios::binary);
  ASSERT_TRUE(in.good());
  std::stringstream golden;
  golden << in.rdbuf();
  EXPECT_EQ(r.out, golden.str());
  EXPECT_EQ(run("sweep --scheme d --d 3 --q-min 0 --q-max 0.3 --q-step 0.01 --threads 1").out, golden.str());
}

TEST(Cli, SweepJsonIsArrayOfRows) {
  const auto r = run("sweep --scheme d+1 --d 3 --q-min 0 --q-max 0.9 --q-step 0.3 --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 4u);
  EXPECT_EQ(j[3]["status"], "infeasible");
  EXPECT_TRUE(j[3]["rate"].is_null());
}

TEST(Cli, Thresholds) {
  EXPECT_NEAR(std::stod(run("threshold --scheme 2 --d 2").out), 0.110028, 1e-6);
  EXPECT_NEAR(std::stod(run("threshold --scheme d+1 --d 2").out), 0.126193, 1e-6);
  const auto r2 = run("threshold --scheme d+1 --d 2");
  const auto r13 = run("threshold --scheme d+1 --d 13");
  ASSERT_EQ(r13.code, 0);
  EXPECT_GT(std::stod(r13.out), std::stod(r2.out));
  EXPECT_EQ(r2.out, "0.126193\n");
}

TEST(Cli, VerifySuites) {
  const auto sym = run("verify --suite symmetry");
  ASSERT_EQ(sym.code, 0);
  EXPECT_NE(sym.out.find("commutant pauli(3): 9"), std::string::npos);
  EXPECT_NE(sym.out.find("commutant octahedral: 2"), std::string::npos);
  EXPECT_NE(sym.out.find("commutant dihedral(2): 3"), std::string::npos);
  EXPECT_EQ(run("verify --suite theorems").code, 0);
  const auto all = run("verify --suite all --format json");
  ASSERT_EQ(all.code, 0);
  const auto j = nlohmann::json::parse(all.out);
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_EQ(j["suites"].size(), 4u);
  EXPECT_EQ(run("verify --suite nonsense").code, 1);
}

TEST(Cli, VerifyHonoursSeedOverride) {
  const auto r = run("verify --suite theorems");
  EXPECT_NE(r.out.find("seed 12648430"), std::string::npos);
  const std::string cmd = "env QKD_SEED=0x2a " + std::string(QKDRATE_BIN) + " verify --suite theorems";
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::array<char, 256> buf{};
  std::string out;
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) out += buf.data();
  EXPECT_EQ(WEXITSTATUS(pclose(pipe)), 0);
  EXPECT_NE(out.find("seed 42"), std::string::npos);
}

TEST(Cli, Commutant) {
  const auto r = run("commutant --group octahedral --compare icosahedral --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["commutant_dimension"], 2);
  EXPECT_TRUE(j["equal"].get<bool>());
  EXPECT_NE(run("commutant --group pauli --d 5").out.find("dimension 25"), std::string::npos);
  EXPECT_EQ(run("commutant --group tetrahedral").code, 1);
}

TEST(Cli, ProtocolFile) {
  const std::string file = std::string(PROTOCOL_DIR) + "/bb84.json";
  const auto fam = nlohmann::json::parse(run("rate --protocol " + file + " --group dihedral --n 2 --q 0.1 --format json").out);
  EXPECT_NEAR(fam["rate"].get<double>(), 0.0620088128214376, 1e-9);
  const auto ev = nlohmann::json::parse(run("rate --protocol " + file + " --u 0.81,0.09,0.09,0.01 --format json").out);
  EXPECT_NEAR(ev["q"].get<double>(), 0.1, 1e-12);
  EXPECT_NEAR(ev["rate"].get<double>(), 0.0620088128214376, 1e-12);
  EXPECT_EQ(run("rate --protocol " + file + " --q 0.1").code, 1);
  EXPECT_EQ(run("rate --protocol /nonexistent.json --group octahedral --q 0.1").code, 1);
}

TEST(Cli, OutFileWritesCsv) {
  const std::string path = ::testing::TempDir() + "qkdrate_out.csv";
  ASSERT_EQ(run("sweep --scheme 2 --d 3 --q-max 0.02 --out " + path).code, 0);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "scheme,d,Q,rate,a,b,c,status");
}
