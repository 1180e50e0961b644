#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wwspectra/app.hpp"

using namespace ww;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome run_tool(const std::string& args, const std::string& env = "") {
  const std::string err_path = ::testing::TempDir() + "cli_stderr.txt";
  const std::string cmd = env + " \"" WW_SPECTRA_EXE "\" " + args + " 2>" + err_path;
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) o.out.append(buf, n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  o.err = slurp(err_path);
  return o;
}

Json payload(const Outcome& o) { return Json::parse(o.out).at("payload"); }

}  // namespace

TEST(Cli, ScanFibonacci) {
  const auto o = run_tool("scan --system fibonacci --obs cyl1:a --scales 12..20 --grid 65536 --threshold 0.05");
  ASSERT_EQ(o.status, 0) << o.err;
  const Json env = Json::parse(o.out);
  EXPECT_EQ(env["tool"], "ww-spectra");
  EXPECT_EQ(env["schema"], "ww-spectra/v1/scan");
  EXPECT_EQ(env["config"]["grid"], 1 << 20);  // promoted to cover the top window
  const auto rep = report_from_json<SpectrumReport>(env["payload"]);
  EXPECT_GE(rep.candidates.size(), 3u);
}

TEST(Cli, FolnerSymmetricCsv) {
  const std::string path = ::testing::TempDir() + "folner.csv";
  const auto o = run_tool("folner --kind symmetric --nmax 20 --probe-shifts 1,3 --csv " + path);
  ASSERT_EQ(o.status, 0) << o.err;
  const auto rep = report_from_json<TemperednessReport>(payload(o)["tempered"]);
  EXPECT_EQ(rep.rows.back().ratio, 79.0 / 41.0);
  const std::string text = slurp(path);
  EXPECT_EQ(text.substr(0, text.find('\n')), "n,window_size,union_size,ratio,defect_1,defect_3");
  EXPECT_NE(text.find("\n20,41,79,"), std::string::npos);
}

TEST(Cli, FolnerSquaresDiverge) {
  const auto o = run_tool("folner --kind squares --nmax 20");
  ASSERT_EQ(o.status, 0) << o.err;
  EXPECT_EQ(payload(o)["tempered"]["verdict"], "ratio-diverging");
}

TEST(Cli, OrbitWithTrace) {
  const std::string trace = ::testing::TempDir() + "trace.csv";
  const auto o = run_tool("orbit --system step --obs value --window -3..4 --kind symmetric --scales 4..10:3 --theta 0 --trace-csv " + trace);
  ASSERT_EQ(o.status, 0) << o.err;
  const Json p = payload(o);
  EXPECT_EQ(p["symbols"], "0001111");
  EXPECT_EQ(p["traces"][0]["estimates"][0][0], 17.0 / 33.0);
  EXPECT_EQ(slurp(trace).substr(0, 22), "scale,re,im,abs,delta\n");
}

TEST(Cli, DiffractLatticeComb) {
  const std::string comb = ::testing::TempDir() + "lattice.csv";
  {
    std::ofstream out(comb);
    out << "position,re,im\n";
    for (int t = 0; t < 4096; ++t) out << t << ",1,0\n";
  }
  const std::string eta = ::testing::TempDir() + "eta.csv";
  const auto o = run_tool("diffract --comb " + comb + " --max-lag 64 --eta-csv " + eta);
  ASSERT_EQ(o.status, 0) << o.err;
  const auto rep = report_from_json<DiffractionReport>(payload(o));
  ASSERT_EQ(rep.peaks.size(), 1u);
  EXPECT_NEAR(rep.peaks[0].intensity, 1.0, 1e-12);
  std::istringstream in(slurp(eta));
  std::size_t rows = 0;
  for (std::string l; std::getline(in, l);) ++rows;
  EXPECT_EQ(rows, 2u * 64 + 2);
}

TEST(Cli, CertifyBernoulliExitsTwo) {
  const std::string out = ::testing::TempDir() + "cert.json";
  const auto o = run_tool("certify --system bernoulli:0.5 --eps 0.05 --scales 12..16:2 --core-radius 0 --obs sign:a --out " + out);
  ASSERT_EQ(o.status, 2) << o.err;
  EXPECT_TRUE(o.out.empty());
  const Json env = Json::parse(slurp(out));
  EXPECT_EQ(env["payload"]["verdict"], "refuted");
  EXPECT_GE(env["payload"]["ap_defect"].get<double>(), 0.9);
}

TEST(Cli, ErrorsNameTheFlag) {
  struct Case {
    std::string args;
    std::string flag;
  };
  for (const auto& c : std::vector<Case>{{"scan --system nonsense", "--system"},
                                         {"scan --obs ind:z", "--obs"},
                                         {"scan --scales 12-20", "--scales"},
                                         {"scan --grid abc", "--grid"},
                                         {"scan --kind squares", "--kind"},
                                         {"orbit --window 5..5", "--window"},
                                         {"folner --nmax 20", "--kind"},
                                         {"certify --offsets 1,2 --scales 8..10", "--offsets"},
                                         {"diffract --weights a=x", "--weights"},
                                         {"diffract --comb /nonexistent.csv", "--comb"}}) {
    const auto o = run_tool(c.args);
    EXPECT_EQ(o.status, 1) << c.args;
    EXPECT_NE(o.err.find(c.flag), std::string::npos) << c.args << ": " << o.err;
    EXPECT_EQ(o.err.rfind("ww-spectra: error:", 0), 0u) << o.err;
  }
  EXPECT_EQ(run_tool("").status, 1);
}

TEST(Cli, CoverageErrorsCarryContext) {
  const std::string path = ::testing::TempDir() + "short.txt";
  {
    std::ofstream out(path);
    out << "offset=0\nabab\n";
  }
  const auto o = run_tool("scan --system explicit:" + path + " --scales 4..6");
  EXPECT_EQ(o.status, 1);
  EXPECT_NE(o.err.find("explicit source covers"), std::string::npos) << o.err;
}

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run_tool("--help").status, 0);
  const auto v = run_tool("--version");
  EXPECT_EQ(v.status, 0);
  EXPECT_EQ(v.out, std::string(ww::kVersion) + "\n");
}

TEST(Cli, PayloadIndependentOfThreads) {
  const std::string args = "scan --system rotation --scales 12..16:2 --threshold 0.02";
  const auto one = run_tool(args + " --threads 1");
  const auto four = run_tool(args, "WW_SPECTRA_THREADS=4");
  ASSERT_EQ(one.status, 0);
  ASSERT_EQ(four.status, 0);
  EXPECT_EQ(payload(one).dump(), payload(four).dump());
  EXPECT_EQ(Json::parse(four.out)["config"]["threads"], 4);
}

TEST(Cli, InProcessRun) {
  app::RunConfig c;
  c.command = "folner";
  c.kind = "one-sided";
  c.nmax = 5;
  const auto r = app::run(c);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.envelope["config"]["nmax"], 5);
  EXPECT_EQ(r.envelope["payload"]["defects"][0]["values"][0], 1.0);  // 2 / |[0, 2)|
}
