#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "muchan/dynamics.hpp"

using namespace muchan;

namespace {

namespace fs = std::filesystem;

fs::path dir() {
  static const fs::path d = [] {
    fs::path p = fs::temp_directory_path() / "muchan_cli_test";
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string put(const std::string& name, const json& j) {
  const fs::path p = dir() / name;
  std::ofstream(p) << j.dump();
  return p.string();
}

std::string put_text(const std::string& name, const std::string& text) {
  const fs::path p = dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "muchan");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

CMat b3() {
  CMat b = CMat::Zero(3, 3);
  b(0, 1) = -1;
  b(1, 0) = 1;
  b(2, 2) = 1;
  return b;
}

}  // namespace

TEST(Cli, AnalyzeVerdicts) {
  const CliRun u = run({"analyze", "--input", put("ad_u.json", channel_to_json(ad_unitary(random_unitary(2, 1))))});
  ASSERT_EQ(u.code, 0) << u.err;
  const json ju = json::parse(u.out);
  EXPECT_EQ(ju["verdict"], "MixedUnitary");
  EXPECT_EQ(ju["terms"], 1);
  EXPECT_EQ(ju["verify"]["cp"], true);

  const CliRun d = run({"analyze", "--input", put("dep3.json", channel_to_json(depolarizing(3), Repr::Choi))});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(json::parse(d.out)["verdict"], "MixedUnitary");
  EXPECT_EQ(json::parse(d.out)["certificate_grade"], "Analytic");

  const CliRun h = run({"analyze", "--input", put("hw.json", channel_to_json(holevo_werner())), "--fw-iters", "300"});
  ASSERT_EQ(h.code, 0) << h.err;
  const json jh = json::parse(h.out);
  EXPECT_EQ(jh["verdict"], "NotMixedUnitary-Heuristic");
  EXPECT_EQ(jh["certificate_grade"], "Heuristic");
  EXPECT_EQ(jh["peripheral"]["dim"], 1);
  EXPECT_LE(jh["witness"]["value_on_target"].get<double>(), -1e-3);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"analyze", "--input", put_text("broken.json", "{oops")}).code, 2);
  EXPECT_EQ(run({"analyze", "--input", "/nonexistent/x.json"}).code, 2);
  EXPECT_EQ(run({"analyze"}).code, 2);
  EXPECT_EQ(run({"analyze", "--input", put_text("x.json", "{}"), "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"analyze", "--input", put("t.json", channel_to_json(transpose_map(2), Repr::Choi))}).code, 3);
  EXPECT_EQ(run({"index", "--input", put("t2.json", channel_to_json(transpose_map(2), Repr::Superop))}).code, 3);
  const json km = json::parse(R"({"dim": 2, "kind": "gkls", "jumps": [[[0, 1], [0, 0]]]})");
  EXPECT_EQ(run({"evolve", "--input", put("km.json", km)}).code, 3);
}

TEST(Cli, EvolveCsvShowsSignChange) {
  const std::string gen = put("ex.json", json{{"kind", "superop"}, {"matrix", matrix_to_json(example59_generator(b3()).superop())}});
  const CliRun r = run({"evolve", "--input", gen, "--grid", "0:3:16", "--format", "csv", "--fw-iters", "500"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,witness_value,verdict,residual");
  std::vector<double> ts, vs;
  std::vector<std::string> verdicts;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string t, v, verdict;
    std::getline(row, t, ',');
    std::getline(row, v, ',');
    std::getline(row, verdict, ',');
    ts.push_back(std::stod(t));
    vs.push_back(std::stod(v));
    verdicts.push_back(verdict);
  }
  ASSERT_EQ(ts.size(), 16u);
  EXPECT_EQ(ts[0], 0.0);
  EXPECT_NEAR(vs[0], 0.0, 1e-14);
  const double t0 = find_root_t0();
  for (std::size_t i = 1; i < ts.size(); ++i) {
    EXPECT_NEAR(vs[i], closed_form_g(ts[i]), 1e-9);
    if (ts[i] < t0) EXPECT_EQ(verdicts[i], "NotMixedUnitary-Analytic");
  }
}

TEST(Cli, EvolveHermitianJumpGeneratorIsMixedUnitary) {
  const json g = json::parse(R"({"dim": 2, "kind": "gkls", "jumps": [[[0, 1], [1, 0]], [[0.5, 0], [0, -0.5]]]})");
  const CliRun r = run({"evolve", "--input", put("herm.json", g), "--grid", "0.1:4:5:log"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["points"].size(), 5u);
  for (const json& p : j["points"]) EXPECT_EQ(p["verdict"], "MixedUnitary");
  EXPECT_TRUE(j["t0_estimate"].is_null());
}

TEST(Cli, IndexAndWeyl) {
  const CliRun i = run({"index", "--input", put("u3.json", channel_to_json(ad_unitary(random_unitary(3, 2)))), "--nmax",
                     "3"});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_EQ(json::parse(i.out)["index"], 1);

  const CliRun w = run({"weyl", "--input", put("dep3k.json", channel_to_json(depolarizing(3)))});
  ASSERT_EQ(w.code, 0) << w.err;
  const json jw = json::parse(w.out);
  EXPECT_EQ(jw["covariant"], true);
  for (auto it = jw["coefficients"].begin(); it != jw["coefficients"].end(); ++it)
    EXPECT_NEAR(it->get<double>(), 1.0 / 9.0, 1e-12);
  EXPECT_EQ(jw["membership"], "Member");

  const CliRun h = run({"weyl", "--input", put("hw2.json", channel_to_json(holevo_werner()))});
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_EQ(json::parse(h.out)["covariant"], false);
  EXPECT_EQ(json::parse(h.out)["membership"], "NotMember");

  const CliRun g = run({"weyl", "--input", put("wgen.json", json{{"kind", "superop"},
                                                               {"matrix", matrix_to_json((depolarizing(2) - identity_channel(2)).superop())}})});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(json::parse(g.out)["membership"], "Member");
}

TEST(Cli, DecomposeExpectation) {
  const CliRun a = run({"decompose-expectation", "--input", put_text("alg.json", R"({"blocks": [[1, 1], [1, 1], [1, 1]]})")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(json::parse(a.out)["verify"]["cp"], true);
  const CliRun c = run({"decompose-expectation", "--input", put("hw3.json", channel_to_json(holevo_werner()))});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(json::parse(c.out)["peripheral_dim"], 1);
  EXPECT_EQ(json::parse(c.out)["beta_decays"], true);
}

TEST(Cli, OutFileAndDeterminism) {
  const std::string in = put("hwd.json", channel_to_json(holevo_werner()));
  const std::string out1 = (dir() / "r1.json").string(), out2 = (dir() / "r2.json").string();
  ASSERT_EQ(run({"analyze", "--input", in, "--fw-iters", "100", "--seed", "7", "--out", out1}).code, 0);
  ASSERT_EQ(run({"analyze", "--input", in, "--fw-iters", "100", "--seed", "7", "--out", out2}).code, 0);
  EXPECT_FALSE(slurp(out1).empty());
  EXPECT_EQ(slurp(out1), slurp(out2));
}

TEST(Cli, ToolBinaryExitCodesAndOutput) {
  const std::string tool = MUCHAN_TOOL_PATH;
  const std::string in = put("bin_u.json", channel_to_json(ad_unitary(random_unitary(2, 4))));
  const std::string o1 = (dir() / "bin1.json").string(), o2 = (dir() / "bin2.json").string();
  auto sh = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(sh(tool + " analyze --input " + in + " --out " + o1), 0);
  EXPECT_EQ(sh("MUCHAN_THREADS=1 " + tool + " analyze --input " + in + " --out " + o2), 0);
  EXPECT_EQ(slurp(o1), slurp(o2));
  EXPECT_EQ(sh(tool + " analyze --input " + put_text("bin_bad.json", "[")), 2);
  EXPECT_EQ(sh(tool + " analyze --input " + put("bin_t.json", channel_to_json(transpose_map(2), Repr::Choi))), 3);
  EXPECT_EQ(sh(tool + " --help"), 0);
}
