#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ado/cli/app.hpp"

namespace fs = std::filesystem;
using namespace ado::cli;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ado-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    setenv(kOutputDirEnv, (dir_ / "out").c_str(), 1);
  }
  void TearDown() override {
    unsetenv(kOutputDirEnv);
    fs::remove_all(dir_);
  }

  int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "ado");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return ado::cli::main(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  int run_config(const std::string& text) {
    out_.str("");
    err_.str("");
    return run_text(text, out_, err_);
  }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::string read(const std::string& name) const {
    std::ifstream f(dir_ / "out" / name);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  }

  static std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      out.push_back(cells);
    }
    return out;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kAbsorberSlab = R"({
  "mode": "solve1d",
  "slab": {
    "tau": [0, 2],
    "albedo": 0.0,
    "quadrature": {"scheme": "gauss", "order": 4},
    "left": {"incidence": {"type": "constant", "value": 1.0}}
  },
  "output": {"tau_points": 9}
})";

}  // namespace

TEST(CsvFormat, SeventeenDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(CsvFormat, TwoColumnParser) {
  std::vector<double> a, b;
  std::string error;
  ASSERT_TRUE(parse_two_column_csv("h,value\n0.1,1\n0.05,2\n", a, b, error)) << error;
  EXPECT_EQ(a, (std::vector<double>{0.1, 0.05}));
  EXPECT_EQ(b, (std::vector<double>{1.0, 2.0}));
  EXPECT_FALSE(parse_two_column_csv("0.1,1\nx,y\n", a, b, error));
}

TEST_F(CliTest, BenchmarkWritesOneRowPerQuadrant) {
  ASSERT_EQ(invoke({"benchmark", "fig7", "--quad", "pntn:8", "--mesh", "2x2"}), kOk) << err_.str();
  const auto r = rows(read("fluxes.csv"));
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR(std::stod(r[1].back()), std::stod(r[2].back()), 1e-12);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "flux-map.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "manifest.json"));
  EXPECT_EQ(out_.str(), read("fluxes.csv"));
}

TEST_F(CliTest, QuadratureTable) {
  ASSERT_EQ(invoke({"quad", "--scheme", "lqn", "--order", "4"}), kOk) << err_.str();
  const auto r = rows(read("quadrature.csv"));
  ASSERT_EQ(r.size(), 12u);
  double w = 0.0;
  for (const auto& row : r) w += std::stod(row.back());
  EXPECT_NEAR(w, 2.0 * M_PI, 1e-12);
  // degrees 0, 2, 4, 6 give 1 + 3 + 6 + 10 monomials
  const auto audit = rows(read("moment-audit.csv"));
  ASSERT_EQ(audit.size(), 20u);
  EXPECT_LT(std::stod(audit[0][3]), 1e-12);
  ASSERT_EQ(invoke({"quad", "--scheme", "gauss", "--order", "3"}), kOk);
  EXPECT_EQ(rows(read("quadrature.csv")).size(), 3u);
}

TEST_F(CliTest, EmptyVacuumProblemGivesZeros) {
  const std::string cfg = R"({"mode": "solve1d", "slab": {"tau": [0, 1], "albedo": 0.5,
    "quadrature": {"scheme": "gauss", "order": 4}}})";
  ASSERT_EQ(run_config(cfg), kOk) << err_.str();
  for (const auto& row : rows(read("density-vs-tau.csv"))) EXPECT_EQ(row[1], "0");
  for (const auto& row : rows(read("intensity.csv"))) EXPECT_EQ(row[2], "0");
}

TEST_F(CliTest, PureAbsorberDensityProfile) {
  ASSERT_EQ(run_config(kAbsorberSlab), kOk) << err_.str();
  const auto r = rows(read("density-vs-tau.csv"));
  ASSERT_EQ(r.size(), 9u);
  for (std::size_t i = 0; i < r.size(); ++i) {
    ASSERT_EQ(r[i].size(), 2u);
    if (i) {
      EXPECT_GT(std::stod(r[i][0]), std::stod(r[i - 1][0]));
      EXPECT_LT(std::stod(r[i][1]), std::stod(r[i - 1][1]));
    }
  }
  EXPECT_EQ(r.back()[0], "2");
}

TEST_F(CliTest, UnknownKeyWritesNothing) {
  const std::string cfg = R"({"mode": "quad", "quadrature": {"scheme": "lqn", "order": 4}, "colour": 1})";
  EXPECT_EQ(run_config(cfg), kUsage);
  EXPECT_NE(err_.str().find("\"error\":\"schema\""), std::string::npos);
  EXPECT_NE(err_.str().find("colour"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, UnknownPlotKind) {
  const std::string cfg = R"({"mode": "quad", "quadrature": {"scheme": "lqn", "order": 4},
    "output": {"plots": ["histogram"]}})";
  EXPECT_EQ(run_config(cfg), kUsage);
  EXPECT_NE(err_.str().find("histogram"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, ManifestReproducesOutputs) {
  ASSERT_EQ(run_config(kAbsorberSlab), kOk);
  const std::string first = read("intensity.csv");
  const std::string manifest = read("manifest.json");
  const auto j = nlohmann::json::parse(manifest);
  EXPECT_EQ(j["manifest"]["mode"], "solve1d");
  EXPECT_EQ(j["manifest"]["outputs"].size(), 2u);
  ASSERT_EQ(run_config(manifest), kOk) << err_.str();
  EXPECT_EQ(read("intensity.csv"), first);
}

TEST_F(CliTest, ConvergenceCurve) {
  const auto path = write("series.csv", "h,value\n0.4,1.16\n0.2,1.04\n0.1,1.01\n0.05,1.0025\n");
  ASSERT_EQ(invoke({"converge", path}), kOk) << err_.str();
  const auto triples = rows(read("convergence.csv"));
  ASSERT_EQ(triples.size(), 2u);
  for (const auto& t : triples) {
    EXPECT_NEAR(std::stod(t[1]), 2.0, 1e-9);
    EXPECT_NEAR(std::stod(t[2]), 1.0, 1e-12);
  }
  EXPECT_EQ(rows(read("convergence-curve.csv")).size(), 4u);
}

TEST_F(CliTest, StalledSeriesIsNumerical) {
  const auto path = write("series.csv", "0.4,1\n0.2,1\n0.1,1\n");
  EXPECT_EQ(invoke({"converge", path}), kNumerical);
  EXPECT_NE(err_.str().find("stalled-convergence"), std::string::npos);
}

TEST_F(CliTest, UnwritableOutputIsIo) {
  std::ofstream(dir_ / "blocker") << "x";
  setenv(kOutputDirEnv, (dir_ / "blocker" / "sub").c_str(), 1);
  EXPECT_EQ(run_config(kAbsorberSlab), kIo);
  EXPECT_NE(err_.str().find("\"error\":\"io\""), std::string::npos);
  EXPECT_EQ(invoke({"run", (dir_ / "missing.json").string()}), kIo);
}

TEST_F(CliTest, OracleSubcommandTracksSolver) {
  const auto path = write("slab.json", kAbsorberSlab);
  ASSERT_EQ(invoke({"run", path}), kOk);
  const auto spectral = rows(read("density-vs-tau.csv"));
  ASSERT_EQ(invoke({"oracle", path}), kOk) << err_.str();
  const auto reference = rows(read("density-vs-tau.csv"));
  ASSERT_EQ(spectral.size(), reference.size());
  for (std::size_t i = 0; i < spectral.size(); ++i)
    EXPECT_NEAR(std::stod(spectral[i][1]), std::stod(reference[i][1]), 1e-6);
}

TEST_F(CliTest, TwoDimensionalRunAndOracle) {
  const auto path = write("box.json", R"({
    "mode": "solve2d",
    "nodal": {
      "x_lines": {"length": 2, "cells": 2},
      "y_lines": [0, 1, 2],
      "materials": [{"sigma_t": 1, "sigma_s": 0.5, "source": 1}],
      "quadrature": {"scheme": "lqn", "order": 4}
    },
    "oracle": {"mesh": [32, 32]}
  })");
  ASSERT_EQ(invoke({"run", path}), kOk) << err_.str();
  const auto nodal = rows(read("flux-map.csv"));
  ASSERT_EQ(nodal.size(), 4u);
  ASSERT_EQ(invoke({"oracle", path}), kOk) << err_.str();
  const auto dd = rows(read("flux-map.csv"));
  for (int r = 0; r < 4; ++r) EXPECT_NEAR(std::stod(nodal[r].back()), std::stod(dd[r].back()), 0.05);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}), kUsage);
  EXPECT_EQ(invoke({"quad", "--order", "x"}), kUsage);
  EXPECT_EQ(invoke({"quad", "--scheme", "lqn", "--order", "3"}), kUsage);
  EXPECT_EQ(invoke({"benchmark", "nope"}), kUsage);
  EXPECT_EQ(invoke({"benchmark", "fig7", "--mesh", "3x2"}), kUsage);
}
