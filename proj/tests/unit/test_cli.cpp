#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "covfield_cli/cli.hpp"

namespace covfield::cli {
namespace {

namespace fs = std::filesystem;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

Table read_table(const fs::path& p) {
  std::ifstream in(p);
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) {
      t.header = split(line);
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("covfield_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int invoke(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, FieldRowCount) {
  ASSERT_EQ(invoke({"field", "--preset", "uniform1d", "--sigma", "0.1", "--grid", "101", "--out", path("f.csv")}), kOk)
      << err_.str();
  const auto t = read_table(path("f.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"x", "y", "value"}));
  EXPECT_EQ(t.rows.size(), 101u * 101u);
  EXPECT_NE(out_.str().find("10201"), std::string::npos);
}

TEST_F(CliTest, SvdDecay) {
  ASSERT_EQ(invoke({"svd", "--equispaced", "500", "--sigma", "0.6", "--k", "50", "--out", path("s.csv")}), kOk)
      << err_.str();
  const auto t = read_table(path("s.csv"));
  ASSERT_EQ(t.rows.size(), 50u);
  double prev = HUGE_VAL;
  for (const auto& row : t.rows) {
    const double v = std::stod(row[1]);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_LE(std::stod(t.rows[49][1]), 1e-10 * std::stod(t.rows[0][1]));
}

TEST_F(CliTest, PrecondTableOneAnalogue) {
  ASSERT_EQ(invoke({"precond", "--gen", "randn", "--n", "1000", "--d", "3", "--seed", "42", "--out", path("t.csv")}), kOk)
      << err_.str();
  const auto t = read_table(path("t.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"method", "iterations", "rel_err", "residual", "fsai_nnz_fraction"}));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[2][0], "geometric-precond-CG");
  EXPECT_LE(std::stoul(t.rows[2][1]), 50u);
}

TEST_F(CliTest, DeterministicWithoutTimestamp) {
  const std::vector<std::vector<std::string>> commands{
      {"field", "--preset", "nonuniform1d", "--sigma", "0.2", "--grid", "21"},
      {"field2d", "--grid", "21"},
      {"bounds", "--condition", "3", "--grid", "101"},
      {"estimate", "--preset", "uniform1d", "--sigma", "0.4", "--grid", "21"},
      {"gp-demo", "--grid", "101"},
      {"svd", "--equispaced", "100", "--sigma", "0.1", "--k", "10"},
      {"lrsp", "--gen", "randn", "--n", "200", "--r0", "20", "--delta-sweep", "1:3:1", "--rank-sweep", "20:60:20"},
      {"precond", "--gen", "randn", "--n", "200", "--maxit", "50"},
      {"gen", "--n", "10", "--d", "2"},
  };
  for (const auto& base : commands) {
    std::vector<std::string> a = base;
    std::vector<std::string> b = base;
    a.insert(a.end(), {"--no-timestamp", "--out", path("a.csv")});
    b.insert(b.end(), {"--no-timestamp", "--out", path("b.csv")});
    ASSERT_EQ(invoke(a), kOk) << base[0] << ": " << err_.str();
    ASSERT_EQ(invoke(b), kOk) << base[0] << ": " << err_.str();
    const auto text = slurp(path("a.csv"));
    EXPECT_EQ(text, slurp(path("b.csv"))) << base[0];
    EXPECT_NE(text.rfind("#", 0), 0u) << base[0];
    const auto t = read_table(path("a.csv"));
    EXPECT_FALSE(t.header.empty());
    EXPECT_FALSE(t.rows.empty());
    for (const auto& row : t.rows) EXPECT_EQ(row.size(), t.header.size()) << base[0];
  }
  if (fs::exists(path("a_ranks.csv"))) EXPECT_EQ(slurp(path("a_ranks.csv")), slurp(path("b_ranks.csv")));
}

TEST_F(CliTest, TimestampLineByDefault) {
  ASSERT_EQ(invoke({"gen", "--n", "3", "--d", "1", "--out", path("g.csv")}), kOk);
  EXPECT_EQ(slurp(path("g.csv")).rfind("# generated ", 0), 0u);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}), kUsageError);
  EXPECT_EQ(invoke({"nonsense"}), kUsageError);
  EXPECT_EQ(invoke({"field", "--sigma", "0.1"}), kUsageError);
  EXPECT_EQ(invoke({"field", "--sigma", "-1", "--out", path("x.csv")}), kUsageError);
  EXPECT_EQ(invoke({"field", "--preset", "cubic", "--out", path("x.csv")}), kUsageError);
  EXPECT_EQ(invoke({"bounds", "--condition", "4", "--out", path("x.csv")}), kUsageError);
  EXPECT_EQ(invoke({"precond", "--gen", "randn", "--r-fraction", "1.5", "--out", path("x.csv")}), kUsageError);
  EXPECT_EQ(invoke({"lrsp", "--gen", "randn", "--delta-sweep", "3:1", "--out", path("x.csv")}), kUsageError);
  EXPECT_FALSE(err_.str().empty());
}

TEST_F(CliTest, RuntimeErrors) {
  {
    std::ofstream bad(path("bad.csv"));
    bad << "x\n0.1\nfoo\n";
  }
  EXPECT_EQ(invoke({"field", "--obs", path("bad.csv"), "--out", path("x.csv")}), kRuntimeError);
  EXPECT_FALSE(err_.str().empty());
  {
    std::ofstream dup(path("dup.csv"));
    dup << "x\n0.1\n0.1\n";
  }
  EXPECT_EQ(invoke({"field", "--obs", path("dup.csv"), "--out", path("x.csv")}), kRuntimeError);
}

}  // namespace
}  // namespace covfield::cli
