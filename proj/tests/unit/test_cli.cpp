#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aoi/closed_form.hpp"
#include "cli.hpp"

namespace {

using namespace aoi::cli;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aoi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> result;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) result.push_back(line);
  return result;
}

TEST(FormatNumber, TenSignificantDigits) {
  EXPECT_EQ(format_number(5.618033988749895), "5.618033989");
  EXPECT_EQ(format_number(0.25), "0.25");
  EXPECT_EQ(format_number(3.5), "3.5");
  EXPECT_EQ(format_number(1234567.891234), "1234567.891");
}

TEST(FormatNumber, CsvRoundTrips) {
  EXPECT_EQ(format_csv_number(0.25), "0.25");
  EXPECT_EQ(format_csv_number(5.618033988749895), "5.618033988749895");
  EXPECT_EQ(format_csv_number(0.1 + 0.2), "0.30000000000000004");
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(gen);
    const std::string text = format_csv_number(x);
    EXPECT_EQ(std::stod(text), x);
    std::size_t digits = 0;
    for (char ch : text.substr(0, text.find('e'))) digits += (ch >= '0' && ch <= '9');
    EXPECT_GE(digits, 10u) << text;
  }
}

TEST(OpenGrid, RoundedSteps) {
  const auto g = open_grid(0.1);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_EQ(g[2], 0.3);
  EXPECT_EQ(g[8], 0.9);
  EXPECT_EQ(open_grid(0.02).size(), 49u);
}

TEST(CliAge, ClosedFormValues) {
  auto r = run_cli({"age", "--mu", "1", "--loads", "0.25,0.25", "--source", "1"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "5.618033989\n");
  r = run_cli({"age", "--mu", "1", "--loads", "0.5", "--source", "1"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "3.5\n");
}

TEST(CliAge, AllSourcesTable) {
  const auto r = run_cli({"age", "--loads", "0.1,0.2,0.3", "--all"});
  ASSERT_EQ(r.code, kExitOk);
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0], "source,load,delta");
  EXPECT_EQ(l[2], "2,0.2," + format_number(aoi::closed_form::average_age_source(1.0, 0.2, 0.4)));
}

TEST(CliAge, Errors) {
  EXPECT_EQ(run_cli({"age", "--loads", "0.6,0.6"}).code, kExitFailure);
  EXPECT_EQ(run_cli({"age", "--loads", "0.2,0.2", "--source", "3"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"age"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"age", "--loads", "abc"}).code, kExitUsage);
  EXPECT_EQ(run_cli({}).code, kExitUsage);
  EXPECT_EQ(run_cli({"bogus"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}

TEST(CliSolve, Engines) {
  auto r = run_cli({"solve", "--m", "1", "--mu", "1", "--rho-i", "0.5", "--rho-other", "0.5", "--engine", "recursive"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "4.5\n");
  r = run_cli({"solve", "--m", "1", "--mu", "1", "--rho-i", "0.5", "--rho-other", "0.5", "--engine", "generic"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(std::stod(r.out), 4.5);

  for (const char* m : {"3", "12", "25"}) {
    const auto g = run_cli({"solve", "--m", m, "--rho-i", "0.2", "--rho-other", "0.35", "--engine", "generic"});
    const auto c = run_cli({"solve", "--m", m, "--rho-i", "0.2", "--rho-other", "0.35"});
    EXPECT_NEAR(std::stod(g.out), std::stod(c.out), 1e-9);
  }

  r = run_cli({"solve", "--m", "200", "--rho-i", "0.25", "--rho-other", "0.25"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NEAR(std::stod(r.out), 5.618033988749895, 1e-6);
}

TEST(CliSolve, Errors) {
  EXPECT_EQ(run_cli({"solve", "--engine", "generic", "--m", "60", "--rho-i", "0.2"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"solve", "--engine", "fancy", "--m", "6", "--rho-i", "0.2"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"solve", "--m", "0", "--rho-i", "0.2"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"solve", "--m", "4", "--rho-i", "-0.2"}).code, kExitFailure);
}

TEST(CliSim, DeterministicOutputAndCsv) {
  const auto csv = std::filesystem::temp_directory_path() / "aoi_cli_sim_test.csv";
  const std::vector<std::string> args{"sim",  "--mu",   "1", "--lambdas", "0.25,0.25", "--events",
                                      "2e5", "--seed", "7", "--csv",     csv.string()};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("source 1: ", 0), 0u);

  std::ifstream in(csv);
  std::stringstream text;
  text << in.rdbuf();
  const auto l = lines(text.str());
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "source,lambda,mean_age,std_error");
  EXPECT_EQ(l[1].rfind("1,0.25,", 0), 0u);
  std::filesystem::remove(csv);
}

TEST(CliSim, Errors) {
  EXPECT_EQ(run_cli({"sim", "--lambdas", "0.9,0.9"}).code, kExitFailure);
  EXPECT_EQ(run_cli({"sim", "--lambdas", "0.9,0.9", "--buffer", "2", "--events", "2e4"}).code, kExitOk);
  EXPECT_EQ(run_cli({"sim", "--lambdas", "0.2", "--events", "1.5"}).code, kExitUsage);
  EXPECT_EQ(run_cli({"sim", "--lambdas", "0.2", "--events", "100"}).code, kExitFailure);
}

TEST(CliSim, SeedEnvironmentOverride) {
  const std::vector<std::string> base{"sim", "--lambdas", "0.3", "--events", "5e4", "--seed"};
  auto with_seed = [&](const char* seed) {
    auto args = base;
    args.emplace_back(seed);
    return run_cli(args).out;
  };
  ::setenv("AOI_SEED", "99", 1);
  const auto overridden = with_seed("1");
  ::unsetenv("AOI_SEED");
  EXPECT_EQ(overridden, with_seed("99"));
  EXPECT_NE(overridden, with_seed("1"));

  ::setenv("AOI_SEED", "12x", 1);
  EXPECT_EQ(run_cli({"sim", "--lambdas", "0.3", "--events", "5e4"}).code, kExitUsage);
  ::unsetenv("AOI_SEED");
}

TEST(Fig4, RowsAndCsv) {
  Fig4Options opt;
  opt.rho2 = {0.0, 0.25, 0.9};
  opt.rho1_step = 0.25;
  opt.events = 200000;
  opt.threads = 3;
  const auto result = fig4_rows(opt);
  // rho1 grid {0.25, 0.5, 0.75}; rho2 = 0.9 admits none, rho2 = 0.25 drops 0.75.
  EXPECT_EQ(result.omitted, 4u);
  ASSERT_EQ(result.rows.size(), 5u);
  EXPECT_EQ(result.rows[0].rho2, 0.0);
  EXPECT_DOUBLE_EQ(result.rows[0].delta1_closed, aoi::closed_form::single_source_age(1.0, 0.25));
  EXPECT_EQ(result.rows[3].rho1, 0.25);
  EXPECT_EQ(result.rows[3].rho2, 0.25);
  EXPECT_NEAR(result.rows[3].delta1_closed, 5.618033988749895, 1e-12);

  opt.threads = 1;
  const auto serial = fig4_rows(opt);
  for (std::size_t r = 0; r < serial.rows.size(); ++r) {
    EXPECT_EQ(serial.rows[r].delta1_sim, result.rows[r].delta1_sim);
  }

  std::ostringstream os;
  write_fig4_csv(os, result.rows);
  EXPECT_EQ(lines(os.str())[0], "rho1,rho2,delta1_closed,delta1_sim,delta1_sim_se");
}

TEST(Fig4, CommandReportsOmittedPoints) {
  const auto r = run_cli({"fig4", "--rho2", "0.5", "--rho1-step", "0.2", "--events", "2e4", "--threads", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 3u);  // header + rho1 in {0.2, 0.4}
  EXPECT_EQ(l[0], "rho1,rho2,delta1_closed,delta1_sim,delta1_sim_se");
  EXPECT_NE(r.err.find("omitted 2 infeasible grid points"), std::string::npos);
}

TEST(Contour, SymmetryAndMinimum) {
  ContourOptions opt;
  const auto rows = contour_rows(opt);
  ASSERT_EQ(rows.size(), 49u * 9u);

  double best_sum = INFINITY;
  double best_rho = 0.0;
  for (const auto& row : rows) {
    if (row.rho1 == row.rho2) {
      EXPECT_DOUBLE_EQ(row.delta1, row.delta2);
      if (row.sum < best_sum) {
        best_sum = row.sum;
        best_rho = row.rho1 + row.rho2;
      }
    }
  }
  EXPECT_GE(best_rho, 0.55);
  EXPECT_LE(best_rho, 0.65);

  // Splits s and 1 - s at the same total swap the two sources.
  ContourOptions pair;
  pair.rho_total = {0.6};
  pair.split = {0.3, 0.7};
  const auto swapped = contour_rows(pair);
  EXPECT_EQ(swapped[0].rho1, swapped[1].rho2);
  EXPECT_EQ(swapped[0].delta1, swapped[1].delta2);
  EXPECT_EQ(swapped[0].delta2, swapped[1].delta1);
}

TEST(Contour, CommandOutput) {
  auto r = run_cli({"contour", "--rho-total", "0.6", "--split", "0.5"});
  ASSERT_EQ(r.code, kExitOk);
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0], "rho1,rho2,delta1,delta2,sum");
  EXPECT_EQ(l[1].rfind("0.3,0.3,", 0), 0u);
  EXPECT_EQ(run_cli({"contour", "--rho-total", "1.2"}).code, kExitUsage);
}

}  // namespace
