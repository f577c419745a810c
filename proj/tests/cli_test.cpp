// End-to-end runs of the mechsimp binary.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <string>

#include "mechsimp/rational.hpp"

using json = nlohmann::ordered_json;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + MECHSIMP_CLI + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string sc(const std::string& name) { return std::string(MECHSIMP_SCENARIOS) + "/" + name; }

json machine(const std::string& args, int expected = 0) {
  const auto r = run("--format machine " + args);
  EXPECT_EQ(r.code, expected) << r.out;
  return json::parse(r.out);
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Reproduce, Example1) {
  const auto j = machine("reproduce example1");
  EXPECT_EQ(j["verdict"], "verified");
  EXPECT_EQ(j["quasi_fields"], 4);
  const auto& f = j["families"];
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0]["allocation"], json({"A", "BC", "{}"}));
  EXPECT_EQ(f[0]["payments"], json({"0", "1", "0"}));
  EXPECT_EQ(f[1]["allocation"], json({"AC", "{}", "B"}));
  EXPECT_EQ(f[1]["payments"], json({"3", "0", "0"}));
  for (int i : {2, 3}) {
    EXPECT_EQ(f[i]["allocation"], json({"ABC", "{}", "{}"}));
    EXPECT_EQ(f[i]["revenue"], "3");
  }
}

TEST(Reproduce, Example2) {
  const auto j = machine("reproduce example2");
  EXPECT_EQ(j["expressive"]["allocation"], json({"AD", "B", "C"}));
  EXPECT_EQ(j["expressive"]["revenue"], "1");
  EXPECT_EQ(j["bundled"]["allocation"], json({"{}", "AB", "CD"}));
  EXPECT_EQ(j["bundled"]["revenue"], "0");
  EXPECT_EQ(j["bundled"]["nash"], true);
}

TEST(Reproduce, AppendixC) {
  const auto j = machine("reproduce appendixC");
  EXPECT_EQ(j["vcg_prices"], json({"3", "1", "0"}));
  EXPECT_EQ(j["forced_b2"], "4");
  EXPECT_EQ(j["forced_b3"], "10");
  EXPECT_EQ(j["contradiction"], true);
  EXPECT_EQ(j["grid_matches"], 0);
}

TEST(Reproduce, RevenueGapVcgDefaults) {
  const auto j = machine("reproduce thm1-vcg");
  EXPECT_EQ(j["equilibrium"]["revenue"], "1/10");
  EXPECT_EQ(j["nash"], true);
  EXPECT_EQ(j["regime"], "continuum-exact");
  EXPECT_EQ(j["truthful_vcg_revenue"], "21/20");
}

TEST(Reproduce, RevenueGapGsp) {
  const auto j = machine("reproduce thm1-gsp --r 5 --eps 1/100");
  EXPECT_EQ(j["verdict"], "verified");
  EXPECT_EQ(j["r"], "5");
  EXPECT_EQ(j["eps"], "1/100");
}

TEST(Reproduce, RevenueBound) {
  const auto j = machine("reproduce thm2-bound");
  EXPECT_EQ(j["vcg_revenue"], "4");
  EXPECT_EQ(j["sample_equilibrium"]["payments"], json({"3", "1", "0"}));
  EXPECT_EQ(j["sample_equilibrium"]["nash"], true);
}

TEST(Reproduce, LowRevenueProfile) {
  const auto j = machine("reproduce thm3");
  EXPECT_EQ(j["outcome"]["revenue"], "3/400");
  EXPECT_EQ(j["efficient"], true);
  EXPECT_EQ(j["truthful_vcg_revenue"], "4");
}

TEST(Reproduce, WelfareRatio) {
  const auto j = machine("reproduce prop4");
  EXPECT_EQ(j["welfare"], "2");
  EXPECT_EQ(j["welfare_shifted"], "1");
  EXPECT_EQ(j["bound"], "2");
  EXPECT_EQ(machine("reproduce prop4 --k 8 --m 4")["verdict"], "verified");
}

TEST(Reproduce, NVcgDemo) {
  const auto j = machine("reproduce nvcg-demo");
  EXPECT_EQ(j["outcome"]["allocation"], json({"AD", "B", "C"}));
  EXPECT_EQ(j["outcome"]["payments"], json({"1", "0", "0"}));
  EXPECT_EQ(j["outcome_preserved"], true);
  for (const auto& c : j["nonzero_bids"]) EXPECT_LE(c["after"].get<int>(), 3);
}

TEST(Reproduce, ZeroRevenue) {
  const auto j = machine("reproduce zero-revenue");
  for (const char* k : {"full_vcg", "full_gsp"}) {
    EXPECT_EQ(j[k]["revenue"], "0");
    EXPECT_EQ(j[k]["nash"], true);
  }
}

TEST(Reproduce, UnknownIdIsUsageError) { EXPECT_EQ(run("reproduce thm9").code, 2); }

TEST(Reproduce, FloatOptionIsParseError) { EXPECT_EQ(run("reproduce thm1-vcg --r 0.5").code, 2); }

TEST(Reproduce, TableMarksApproximations) {
  const auto r = run("reproduce thm1-vcg");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("reproduce thm1-vcg: VERIFIED"), std::string::npos);
  EXPECT_NE(r.out.find("1/10  ~0.1"), std::string::npos);
  EXPECT_NE(r.out.find("approximations to 6 significant digits"), std::string::npos);
}

TEST(Check, ZeroRevenueGspNash) {
  const auto j = machine("check --concept nash " + sc("slot-gsp.json") + " " + sc("zero-revenue-bids.json"));
  EXPECT_EQ(j["certificate"], "equilibrium");
  EXPECT_EQ(j["outcome"]["revenue"], "0");
}

TEST(Check, TruthfulVcgNash) {
  const auto j = machine("check --concept nash " + sc("slot-vcg.json") + " " + sc("truthful-bids.json"));
  EXPECT_EQ(j["verdict"], "verified");
  EXPECT_EQ(j["regime"], "continuum-exact");
}

TEST(Check, NashRefutationCarriesWitness) {
  const auto sol = temp_file("overbid.json", R"({"bids": [[3, 3, 3], [3, 3, 3], [0, 0, 0]]})");
  const auto j = machine("check --concept nash " + sc("slot-vcg.json") + " " + sol, 1);
  EXPECT_EQ(j["verdict"], "refuted");
  EXPECT_TRUE(j["witness"].contains("gain"));
}

TEST(Check, SwappedAssignmentIsInefficient) {
  const auto j = machine("check --concept efficient " + sc("slot-vcg.json") + " " + sc("swapped-assignment.json"), 1);
  EXPECT_EQ(j["witness"]["swapped"], json({2, 1}));
}

TEST(Check, EnvyFree) {
  const auto sol = temp_file("vcg-prices.json", R"({"assignment": [1, 2, 3], "payments": ["5/4", "1/4", 0]})");
  EXPECT_EQ(run("check --concept envy-free " + sc("slot-vcg.json") + " " + sol).code, 0);
  EXPECT_EQ(run("check --concept envy-free " + sc("slot-gsp.json") + " " + sc("zero-revenue-bids.json")).code, 1);
}

TEST(Check, ExPost) {
  EXPECT_EQ(run("check --concept expost " + sc("alpha-gsp-expost.json") + " " + sc("two-agent-strategy.json")).code, 0);
  EXPECT_EQ(run("check --concept expost " + sc("alpha-gsp-expost.json") + " " + sc("truthful-strategy.json")).code, 1);
  EXPECT_EQ(run("check --concept expost " + sc("alpha-vcg-expost.json") + " " + sc("truthful-strategy.json")).code, 0);
  const auto j = machine("check --concept expost " + sc("alpha-gsp-expost.json") + " " + sc("truthful-strategy.json"), 1);
  EXPECT_EQ(j["regime"], "grid-relative");
}

TEST(Check, GridConcepts) {
  for (const char* c : {"tight", "outcome-closure"}) {
    EXPECT_EQ(run(std::string("check --concept ") + c + " " + sc("alpha-gsp-grid.json")).code, 0);
    EXPECT_EQ(run(std::string("check --concept ") + c + " " + sc("quasi-field-grid.json")).code, 0);
  }
  const auto bad = temp_file("not-qf.json", R"({"kind": "combinatorial", "items": 3, "mechanism": "sigma-vcg",
    "sigma": ["A", "ABC"], "grid": {"values": [2]}})");
  const auto j = machine("check --concept tight " + bad, 1);
  EXPECT_TRUE(j["witness"].contains("reason"));
}

TEST(Check, Combinatorial) {
  const auto j = machine("check --concept nash " + sc("example2.json") + " " + sc("example2-bundled-bids.json"));
  EXPECT_EQ(j["outcome"]["revenue"], "0");
  EXPECT_EQ(run("check --concept efficient " + sc("example2.json") + " " + sc("example2-bundled-bids.json")).code, 0);
  EXPECT_EQ(run("check --concept expost " + sc("quasi-field-grid.json") + " " + sc("projection-strategy.json")).code, 0);
}

TEST(Check, UsageErrors) {
  EXPECT_EQ(run("check --concept envy-free " + sc("example2.json") + " " + sc("example2-bundled-bids.json")).code, 2);
  EXPECT_EQ(run("check --concept nash " + sc("slot-gsp.json")).code, 2);
  EXPECT_EQ(run("check --concept bogus " + sc("slot-gsp.json")).code, 2);
  const auto r = run("check --concept nash " + sc("float-literal.json") + " " + sc("zero-revenue-bids.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("beta[1]"), std::string::npos);
  const auto broken = temp_file("broken.json", "{\"kind\": ");
  EXPECT_EQ(run("check --concept nash " + broken + " " + sc("zero-revenue-bids.json")).code, 2);
  const auto bad_bid = temp_file("bad-bid.json", R"({"bids": [[3, 0, 0], [0, 1, 0]]})");
  EXPECT_EQ(run("check --concept nash " + sc("slot-gsp.json") + " " + bad_bid).code, 2);
}

TEST(Enumerate, QuasiFields) {
  const auto j = machine("enumerate --what quasi-fields --max-size 4 " + sc("three-items.json"));
  EXPECT_EQ(j["count"], 4);
  EXPECT_EQ(j["families"], json({"{{}, A, BC, ABC}", "{{}, B, AC, ABC}", "{{}, AB, C, ABC}", "{{}, ABC}"}));
  const auto six = temp_file("six.json", R"({"kind": "combinatorial", "items": 6})");
  const auto r = run("enumerate --what quasi-fields " + six);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("cap"), std::string::npos);
}

TEST(Enumerate, EquilibriaRespectBound) {
  const auto j = machine("enumerate --what equilibria --grid-step 1/4 " + sc("gsp-2x2.json"));
  ASSERT_GT(j["count"].get<int>(), 0);
  EXPECT_EQ(j["max_bid"], "1");
  const auto bound = mechsimp::parse_rational(j["revenue_bound"].get<std::string>());
  for (const auto& e : j["equilibria"]) {
    if (e["efficient"] == true) {
      EXPECT_GE(mechsimp::parse_rational(e["revenue"].get<std::string>()), bound);
    }
  }
}

TEST(Enumerate, ZeroStepIsUsageError) {
  EXPECT_EQ(run("enumerate --what equilibria --grid-step 0 " + sc("gsp-2x2.json")).code, 2);
}

TEST(Report, MachineRoundTrips) {
  for (const char* args : {"reproduce example1", "reproduce thm3", "reproduce nvcg-demo"}) {
    const auto r = run(std::string("--format machine ") + args);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.dump(2) + "\n", r.out);
  }
}

TEST(Report, DeterministicAcrossThreadCounts) {
  for (const std::string& args : {"enumerate --what equilibria --grid-step 1/8 " + sc("gsp-2x2.json"),
                                 "check --concept tight " + sc("quasi-field-grid.json"),
                                 std::string("reproduce appendixC")}) {
    const auto a = run("--format machine " + args, "AF_THREADS=1");
    const auto b = run("--format machine " + args, "AF_THREADS=4");
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(Help, ExitsZero) { EXPECT_EQ(run("--help").code, 0); }
