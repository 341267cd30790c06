// Copyright 2026 The splitglm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <unistd.h>
#include <sstream>

#include <gtest/gtest.h>

#include "splitglm/cli/commands.h"
#include "splitglm/cli/csv.h"
#include "splitglm/cli/exit_codes.h"
#include "splitglm/cli/synthetic.h"
#include "splitglm/core/full_fit.h"
#include "splitglm/error.h"
#include "splitglm/transport/crypto.h"
#include "test_util.h"

namespace splitglm::cli {
namespace {

namespace fs = std::filesystem;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

CsvTable Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseCsv(in);
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("splitglm_cli_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

TEST(Csv, QuotedFields) {
  const CsvTable t = Parse("a,\"b,c\",d\n1,\"he said \"\"hi\"\"\",3\n\n");
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.header[1], "b,c");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(t.ColumnIndex("d"), 2u);
  EXPECT_EQ(CodeOf([&] { t.ColumnIndex("zz"); }), ErrorCode::kUnknownColumn);
}

TEST(Csv, ParseNumber) {
  EXPECT_EQ(ParseNumber("1.5"), 1.5);
  EXPECT_EQ(ParseNumber(" -2e3 "), -2000.0);
  EXPECT_FALSE(ParseNumber("abc").has_value());
  EXPECT_FALSE(ParseNumber("1.5x").has_value());
  EXPECT_FALSE(ParseNumber("").has_value());
}

TEST(Ingest, CategoricalBecomesIndicators) {
  const CsvTable t = Parse(
      "y,color,size\n1,red,1\n2,blue,2\n3,green,3\n4,red,5\n5,blue,4\n");
  IngestOptions o;
  o.target_column = "y";
  const Ingested d = IngestCsv(t, o);
  ASSERT_EQ(d.block.cols(), 3);
  EXPECT_EQ(d.block.column_names()[0], "color=green");
  EXPECT_EQ(d.block.column_names()[1], "color=red");
  EXPECT_EQ(d.block.column_names()[2], "size");
  // Centered indicators: row 0 is red.
  EXPECT_NEAR(d.block.values()(0, 1), 1.0 - 0.4, 1e-15);
  EXPECT_NEAR(d.block.values()(0, 0), -0.2, 1e-15);
  EXPECT_NEAR(d.y.values().mean(), 0.0, 1e-15);
}

TEST(Ingest, ConstantColumnNamed) {
  const CsvTable t = Parse("y,flat,x\n1,7,1\n0,7,2\n1,7,4\n");
  IngestOptions o;
  o.target_column = "y";
  o.standardize = true;
  try {
    IngestCsv(t, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstantColumn);
    EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
  }
}

TEST(Ingest, RoundTripWithinTolerance) {
  std::mt19937_64 rng(1);
  const Matrix raw = testing::RandomNormal(40, 3, rng) * 10.0;
  std::ostringstream csv;
  csv.precision(17);
  csv << "a,b,c,y\n";
  for (int i = 0; i < 40; ++i) {
    csv << raw(i, 0) << ',' << raw(i, 1) << ',' << raw(i, 2) << ',' << i % 3 << '\n';
  }
  IngestOptions o;
  o.target_column = "y";
  const Ingested d = IngestCsv(Parse(csv.str()), o);
  std::ostringstream out;
  WriteBlockCsv(out, d.block);
  std::istringstream back_in(out.str());
  const CsvTable back = ParseCsv(back_in);
  ASSERT_EQ(back.header, (std::vector<std::string>{"a", "b", "c"}));
  const Matrix centered = testing::Centered(raw);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(*ParseNumber(back.rows[i][j]), centered(i, j), 1e-12);
    }
  }
}

TEST(Ingest, MissingValueReportsRowAndColumn) {
  const CsvTable t = Parse("y,x1,x2\n1,2,3\n2,,4\n3,5,6\n");
  IngestOptions o;
  o.target_column = "y";
  try {
    IngestCsv(t, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingValue);
    const std::string what = e.what();
    EXPECT_NE(what.find("x1"), std::string::npos) << what;
    EXPECT_NE(what.find("2"), std::string::npos) << what;
  }
  EXPECT_EQ(CodeOf([&] { IngestCsv(Parse("y,x\n1,2\nNA,3\n"), o); }),
            ErrorCode::kMissingValue);
}

TEST(Ingest, UnknownColumnAndEmptyData) {
  IngestOptions o;
  o.target_column = "nope";
  EXPECT_EQ(CodeOf([&] { IngestCsv(Parse("y,x\n1,2\n2,3\n"), o); }),
            ErrorCode::kUnknownColumn);
  o.target_column = "y";
  o.feature_columns = {"x", "w"};
  EXPECT_EQ(CodeOf([&] { IngestCsv(Parse("y,x\n1,2\n2,3\n"), o); }),
            ErrorCode::kUnknownColumn);
  o.feature_columns.clear();
  EXPECT_EQ(CodeOf([&] { IngestCsv(Parse("y,x\n"), o); }), ErrorCode::kEmptyData);
}

TEST(Ingest, BinomialTargetAndIntercept) {
  const CsvTable t = Parse("y,x\n1,2\n0,3\n1,5\n0,1\n");
  IngestOptions o;
  o.target_column = "y";
  o.family = FamilySpec::Binomial();
  o.add_intercept = true;
  const Ingested d = IngestCsv(t, o);
  EXPECT_TRUE(d.block.has_intercept());
  EXPECT_EQ(d.y.values()(0), 1.0);  // not centered
  EXPECT_ANY_THROW(IngestCsv(Parse("y,x\n2,1\n0,3\n"), o));
}

TEST(Synthetic, MomentsAndSplit) {
  SyntheticSpec spec;
  spec.n = 20000;
  spec.p = 4;
  spec.covariance = 0.5;
  const SyntheticData d = GenerateSynthetic(spec);
  const Matrix cov = d.x.transpose() * d.x / (spec.n - 1);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(cov(i, i), 1.0, 0.05);
    for (int j = 0; j < i; ++j) EXPECT_NEAR(cov(i, j), 0.5, 0.05);
  }
  EXPECT_NEAR((d.x * d.beta).squaredNorm() / spec.n, 1.0, 0.05);
  const PartySplit s = SplitBetweenParties(d, FamilySpec::Gaussian());
  EXPECT_EQ(s.initiator.cols(), 2);
  EXPECT_EQ(s.responder.column_names()[0], "x3");
  spec.p = 5;
  spec.family = FamilySpec::Binomial();
  const PartySplit b = SplitBetweenParties(GenerateSynthetic(spec), FamilySpec::Binomial());
  EXPECT_EQ(b.initiator.cols(), 4);  // intercept + 3
  EXPECT_TRUE(b.initiator.has_intercept());
}

SimulateOptions SmallSimulation() {
  SimulateOptions o;
  o.n = 500;
  o.p = 10;
  return o;
}

TEST(Simulate, SameSeedSameReport) {
  auto render = [] {
    std::ostringstream out;
    WriteSimulationCsv(out, RunSimulation(SmallSimulation()));
    return out.str();
  };
  const std::string a = render();
  EXPECT_EQ(a, render());
  EXPECT_NE(a.find("initiator,x1,"), std::string::npos);
}

TEST(Simulate, MatchesOracle) {
  for (const char* fam : {"gaussian", "binomial", "poisson"}) {
    SimulateOptions o = SmallSimulation();
    o.family = fam;
    const SimulationReport r = RunSimulation(o);
    EXPECT_TRUE(r.initiator.converged) << fam;
    EXPECT_LT(r.MaxAbsCoefficientDiff(), 1e-6) << fam;
    for (const auto& row : r.rows) {
      EXPECT_NEAR(row.std_error / row.oracle_std_error, 1.0, 1e-3) << fam << row.name;
    }
  }
}

TEST(Simulate, MoreCovarianceMoreIterations) {
  SimulateOptions lo = SmallSimulation(), hi = SmallSimulation();
  lo.covariance = 0.1;
  hi.covariance = 0.5;
  int lo_total = 0, hi_total = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    lo.session.seed = hi.session.seed = seed;
    lo_total += RunSimulation(lo).initiator.iterations;
    hi_total += RunSimulation(hi).initiator.iterations;
  }
  EXPECT_GT(hi_total, lo_total);
}

TEST(Simulate, OnePartyHoldingEverything) {
  SimulateOptions o = SmallSimulation();
  o.initiator_features = 10;
  const SimulationReport r = RunSimulation(o);
  EXPECT_EQ(r.initiator.active_sweeps, 1);
  EXPECT_LT(r.MaxAbsCoefficientDiff(), 1e-10);
}

TEST(Simulate, CsvInputWithColumnSplit) {
  TempDir dir;
  SyntheticSpec spec;
  spec.n = 300;
  spec.p = 3;
  spec.seed = 5;
  const SyntheticData data = GenerateSynthetic(spec);
  {
    std::ofstream f(dir / "data.csv");
    WriteSyntheticCsv(f, data);
  }
  SimulateOptions o;
  o.data_path = dir / "data.csv";
  o.target_column = "y";
  o.initiator_columns = {"x2"};
  o.trace_export_dir = dir / "trace";
  const SimulationReport r = RunSimulation(o);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].name, "x2");
  EXPECT_LT(r.MaxAbsCoefficientDiff(), 1e-6);
  EXPECT_TRUE(fs::exists(dir / "trace/responder/received_predictions.csv"));

  // The responder holds the initiator's last prediction; with the final
  // one-feature coefficient it recovers that feature exactly.
  WriteFile(dir / "victim.csv", "coefficient,estimate\nx2," +
                                    [&] {
                                      std::ostringstream s;
                                      s.precision(17);
                                      s << r.rows[0].estimate;
                                      return s.str();
                                    }());
  {
    std::ofstream f(dir / "truth.csv");
    WriteMatrixCsv(f, data.x.col(1), {"x2"});
  }
  AttackTraceOptions a;
  a.trace_dir = dir / "trace/responder";
  a.coefficients_path = dir / "victim.csv";
  a.truth_path = dir / "truth.csv";
  const AttackTraceResult res = RunAttackOnTrace(a);
  ASSERT_TRUE(res.revealed_fraction.has_value());
  EXPECT_NEAR(*res.revealed_fraction, 1.0, 1e-10);
}

TEST(Trace, ExportImportRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(6);
  protocol::IterationTrace t;
  t.sent_predictions = testing::RandomNormal(20, 4, rng);
  t.received_residual_inputs = testing::RandomNormal(20, 4, rng);
  t.received_predictions = testing::RandomNormal(20, 4, rng);
  t.weights_final = testing::RandomNormal(20, rng).cwiseAbs();
  ExportTrace(dir / "t", t);
  const protocol::IterationTrace back = ImportTrace(dir / "t");
  EXPECT_EQ(back.sent_predictions, t.sent_predictions);
  EXPECT_EQ(back.received_residual_inputs, t.received_residual_inputs);
  EXPECT_EQ(back.received_predictions, t.received_predictions);
  EXPECT_EQ(back.weights_final, t.weights_final);
  EXPECT_EQ(CodeOf([&] { ImportTrace(dir / "missing"); }), ErrorCode::kIoError);
}

TEST(Benchmark, ReplicationRowSanity) {
  SessionOptions s;
  const BenchmarkRow row = RunBenchmarkReplication("gaussian", 500, 10, 0.1, 0, 1, s);
  EXPECT_TRUE(row.converged);
  EXPECT_LT(row.max_abs_coef_diff, 1e-6);
  EXPECT_EQ(row.rel_se_bias.size(), 10u);
  EXPECT_EQ(row.se_failures, 0);
  EXPECT_NEAR(row.frac_se_within_3pct, 1.0, 1e-12);
  EXPECT_NE(ReplicationSeed(1, "gaussian", 10, 0.1, 0), ReplicationSeed(1, "gaussian", 10, 0.1, 1));
  std::ostringstream out;
  WriteBenchmarkHeader(out);
  WriteBenchmarkRow(out, row);
  std::istringstream in(out.str());
  const CsvTable t = ParseCsv(in);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].size(), t.header.size());
  EXPECT_EQ(t.rows[0][t.ColumnIndex("family")], "gaussian");
}

TEST(Benchmark, StreamsOneRowPerCondition) {
  BenchmarkOptions o;
  o.families = {"gaussian"};
  o.ps = {4};
  o.covariances = {0.1, 0.5};
  o.n = 200;
  o.replications = 2;
  std::ostringstream out;
  RunBenchmark(o, out);
  std::istringstream in(out.str());
  EXPECT_EQ(ParseCsv(in).rows.size(), 4u);
}

TEST(Psk, EnvOrFileExactlyOne) {
  TempDir dir;
  const std::string hex(64, '1');
  WriteFile(dir / "key", hex + "\n");
  ::setenv("SPLITGLM_TEST_PSK", hex.c_str(), 1);
  PartyOptions o;
  o.psk_env = "SPLITGLM_TEST_PSK";
  transport::Key want;
  want.fill(0x11);
  EXPECT_EQ(LoadPsk(o), want);
  o.psk_file = dir / "key";
  EXPECT_ANY_THROW(LoadPsk(o));
  o.psk_env.clear();
  EXPECT_EQ(LoadPsk(o), want);
  o.psk_file.clear();
  EXPECT_ANY_THROW(LoadPsk(o));
  o.psk_env = "SPLITGLM_TEST_PSK_UNSET";
  EXPECT_ANY_THROW(LoadPsk(o));
}

TEST(Fit, CsvMatchesDirectFit) {
  TempDir dir;
  SyntheticSpec spec;
  spec.family = FamilySpec::Binomial();
  spec.n = 400;
  spec.p = 3;
  const SyntheticData data = GenerateSynthetic(spec);
  {
    std::ofstream f(dir / "d.csv");
    WriteSyntheticCsv(f, data);
  }
  FitOptions o;
  o.data_path = dir / "d.csv";
  o.target_column = "y";
  o.family = "binomial";
  const FitRun run = RunFit(o);
  ASSERT_EQ(run.column_names.front(), kInterceptName);
  Matrix x(400, 4);
  x << Vector::Ones(400), data.x;
  const FullFit direct = FitFullGlm(x, TargetVector(data.y, FamilySpec::Binomial()),
                                    FamilySpec::Binomial());
  EXPECT_LT((run.fit.coefficients - direct.coefficients).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ExitCodes, ExhaustiveAndDistinct) {
  std::set<int> seen;
  const int last = static_cast<int>(ErrorCode::kIoError);
  for (int i = 0; i <= last; ++i) {
    const int exit = ExitCodeFor(static_cast<ErrorCode>(i));
    EXPECT_NE(exit, kExitInternal) << ErrorCodeName(static_cast<ErrorCode>(i));
    EXPECT_TRUE(seen.insert(exit).second) << exit;
  }
  EXPECT_EQ(seen.size(), kExitCodes.size());
  for (int reserved : {kExitOk, kExitInternal, kExitUsage, kExitNotConverged}) {
    EXPECT_EQ(seen.count(reserved), 0u);
  }
  EXPECT_EQ(ExitCodeFor(ErrorCode::kDigestMismatch), 16);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kAuthFailure), 19);
}

}  // namespace
}  // namespace splitglm::cli
