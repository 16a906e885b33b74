#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run
{
  int code;
  std::string out;
};

// Runs the CLI with stdout and stderr captured together.
Run cli(const std::string & args)
{
  const fs::path log = fs::temp_directory_path() / ("falsify_cli_" + std::to_string(getpid()) + ".log");
  const std::string cmd = std::string("\"") + FALSIFY_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream text;
  text << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text.str()};
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

fs::path scratch(const std::string & name)
{
  const auto p = fs::temp_directory_path() / ("falsify_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, HelpListsEverySubcommand)
{
  const auto r = cli("--help");
  EXPECT_EQ(r.code, 0);
  for (const char * sub : {"falsify", "baseline", "compare", "replay", "report", "bench-opt"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, UnknownScenarioIsUsageError)
{
  const auto r = cli("falsify bogus-id");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("unknown scenario"), std::string::npos) << r.out;
}

TEST(Cli, UnknownFlagIsUsageError)
{
  EXPECT_EQ(cli("falsify ls1-test1 --bogus 3").code, 1);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("compare ls1-test1 --runs 1").code, 1);
}

TEST(Cli, ReplayOfLowerCornerIsCritical)
{
  const auto dir = scratch("replay");
  const auto r = cli("replay ls1-test1 --x 5,30.89 --out " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("critical: yes"), std::string::npos) << r.out;
  const auto csv = slurp(dir / "ls1-test1" / "replay.csv");
  EXPECT_EQ(csv.rfind("t,sv_xf,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 602);

  const auto safe = cli("replay ls1-test1 --x 50,80 --out " + dir.string());
  EXPECT_NE(safe.out.find("critical: no"), std::string::npos) << safe.out;
  EXPECT_EQ(cli("replay ls1-test1 --x 5,abc --out " + dir.string()).code, 1);
  fs::remove_all(dir);
}

TEST(Cli, FalsifyIsReproducibleAndReportable)
{
  const auto a = scratch("a");
  const auto b = scratch("b");
  ASSERT_EQ(cli("falsify ls1-test1 --n-max 8 --seed 4 --out " + a.string()).code, 0);
  ASSERT_EQ(cli("falsify ls1-test1 --n-max 8 --seed 4 --out " + b.string()).code, 0);
  const auto json = fs::path("ls1-test1") / "GLIS" / "4.json";
  const auto text = slurp(a / json);
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(b / json));
  EXPECT_EQ(text.find("wall_time"), std::string::npos);

  const auto out = scratch("report");
  const auto r = cli("report " + a.string() + " --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(out / "ls1-test1" / "GLIS" / "4.svg"));
  for (const auto & d : {a, b, out}) {
    fs::remove_all(d);
  }
}

TEST(Cli, RuntimeErrorsExitTwo)
{
  EXPECT_EQ(cli("report /nonexistent/results").code, 2);
  EXPECT_EQ(cli("replay ls1-test1 --x 10,40 --dt 0.07").code, 2);
}

TEST(Cli, BenchOptRuns)
{
  const auto r = cli("bench-opt --runs 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("quadratic-1d"), std::string::npos) << r.out;
}
