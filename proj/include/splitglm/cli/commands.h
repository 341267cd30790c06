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

#ifndef SPLITGLM_CLI_COMMANDS_H_
#define SPLITGLM_CLI_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "splitglm/attack/reconstruction.h"
#include "splitglm/cli/csv.h"
#include "splitglm/cli/synthetic.h"
#include "splitglm/core/full_fit.h"
#include "splitglm/protocol/session.h"

namespace splitglm::cli {

struct SessionOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  std::optional<int> min_iterations;
  double noise_sd = 0.0;
  std::uint64_t seed = 1;
  bool standard_errors = true;
};

protocol::SessionConfig MakeSessionConfig(const FamilySpec& family,
                                          const SessionOptions& options);

// ---- simulate ----------------------------------------------------------

struct SimulateOptions {
  // Synthetic data unless data_path is set.
  std::string family = "gaussian";
  Eigen::Index n = 1000;
  Eigen::Index p = 10;
  double covariance = 0.1;
  std::optional<Eigen::Index> initiator_features;  // default ceil(p / 2)

  std::string data_path;
  std::string target_column;
  std::vector<std::string> initiator_columns;  // rest go to the responder
  bool standardize = false;

  SessionOptions session;
  std::string trace_export_dir;
};

struct CoefficientRow {
  std::string party;
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double oracle_estimate = 0.0;
  double oracle_std_error = 0.0;
};

struct PartySummary {
  std::string party;
  int iterations = 0;
  bool converged = false;
  int active_sweeps = 0;
  Eigen::Index partner_rank = 0;
  double sigma2 = 0.0;
  std::string se_note;
};

struct SimulationReport {
  std::string family;
  Eigen::Index n = 0;
  std::vector<CoefficientRow> rows;
  PartySummary initiator;
  PartySummary responder;
  double protocol_seconds = 0.0;
  double oracle_seconds = 0.0;

  double MaxAbsCoefficientDiff() const;
};

SimulationReport RunSimulation(const SimulateOptions& options);
// Deterministic given the options: timings are left to the table.
void WriteSimulationCsv(std::ostream& out, const SimulationReport& report);
void WriteSimulationTable(std::ostream& out, const SimulationReport& report);

// ---- benchmark ---------------------------------------------------------

struct BenchmarkOptions {
  std::vector<std::string> families = {"gaussian", "binomial"};
  std::vector<Eigen::Index> ps = {10, 50, 100};
  std::vector<double> covariances = {0.1, 0.5};
  Eigen::Index n = 1000;
  int replications = 100;
  std::uint64_t seed = 1;
  SessionOptions session;
};

struct BenchmarkRow {
  std::string family;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  double covariance = 0.0;
  int replication = 0;
  std::uint64_t data_seed = 0;
  int iterations = 0;
  bool converged = false;
  int active_sweeps = 0;
  double max_abs_coef_diff = 0.0;
  double mean_rel_coef_bias = 0.0;
  double max_rel_coef_bias = 0.0;
  double max_rel_se_bias = 0.0;
  double frac_se_within_3pct = 0.0;
  std::vector<double> rel_se_bias;  // every coefficient of both parties
  int se_failures = 0;
  double protocol_seconds = 0.0;
  double oracle_seconds = 0.0;
};

std::uint64_t ReplicationSeed(std::uint64_t seed, const std::string& family,
                              Eigen::Index p, double covariance,
                              int replication);

BenchmarkRow RunBenchmarkReplication(const std::string& family, Eigen::Index n,
                                     Eigen::Index p, double covariance,
                                     int replication, std::uint64_t seed,
                                     const SessionOptions& session);

// Streams one row per replication and condition as it finishes.
void RunBenchmark(const BenchmarkOptions& options, std::ostream& out);
void WriteBenchmarkHeader(std::ostream& out);
void WriteBenchmarkRow(std::ostream& out, const BenchmarkRow& row);

// ---- serve / connect ---------------------------------------------------

struct PartyOptions {
  std::string data_path;
  std::string target_column;
  std::vector<std::string> feature_columns;
  std::string family = "gaussian";
  bool standardize = false;
  SessionOptions session;
  std::string endpoint;  // listen address (serve) or peer (connect)
  std::string psk_env;
  std::string psk_file;
  std::string output_path;
  std::string summary_path;
  std::string trace_export_dir;
  int connect_timeout_ms = 30000;
};

transport::Key LoadPsk(const PartyOptions& options);

struct PartyRun {
  protocol::PartyOutcome outcome;
  std::vector<std::string> column_names;
};

// serve = responder (listens), connect = initiator (dials and owns the
// intercept for non-Gaussian families).
PartyRun RunServe(const PartyOptions& options, std::ostream& log);
PartyRun RunConnect(const PartyOptions& options, std::ostream& log);

void WriteResultsCsv(std::ostream& out, const PartyRun& run);
void WriteSummaryJson(std::ostream& out, const PartyRun& run,
                      protocol::PartyRole role);
void ExportTrace(const std::string& dir, const protocol::IterationTrace& trace);
protocol::IterationTrace ImportTrace(const std::string& dir);

// ---- attack ------------------------------------------------------------

struct AttackTraceOptions {
  std::string trace_dir;          // the attacker's exported trace
  std::string coefficients_path;  // victim's results CSV (final coefficients)
  std::string truth_path;         // optional victim block CSV for scoring
  std::string output_path;        // reconstructed block CSV
};

struct AttackTraceResult {
  Matrix x_hat;
  std::vector<std::string> column_names;
  std::optional<double> mse;
  std::optional<double> revealed_fraction;
};

AttackTraceResult RunAttackOnTrace(const AttackTraceOptions& options);

// ---- fit / ingest / generate -------------------------------------------

struct FitOptions {
  std::string data_path;
  std::string target_column;
  std::vector<std::string> feature_columns;
  std::string family = "gaussian";
  bool standardize = false;
};

struct FitRun {
  FullFit fit;
  std::vector<std::string> column_names;
};

FitRun RunFit(const FitOptions& options);

// Synthetic data as CSV: x1..xp then y.
void WriteSyntheticCsv(std::ostream& out, const SyntheticData& data);

}  // namespace splitglm::cli

#endif  // SPLITGLM_CLI_COMMANDS_H_
