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

// Command-line front end. Every library error maps to its own exit status;
// see cli/exit_codes.h and the README.

#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "splitglm/attack/reconstruction.h"
#include "splitglm/cli/commands.h"
#include "splitglm/cli/exit_codes.h"
#include "splitglm/error.h"

namespace {

using namespace splitglm;
using namespace splitglm::cli;

void AddSessionOptions(CLI::App* app, SessionOptions& s) {
  app->add_option("--tolerance", s.tolerance, "Convergence tolerance on max |delta beta|")
      ->capture_default_str();
  app->add_option("--max-iterations", s.max_iterations, "Iteration cap")
      ->capture_default_str();
  app->add_option("--min-iterations", s.min_iterations,
                  "Requested iteration floor (default: local columns + 5)");
  app->add_option("--noise-sd", s.noise_sd, "SD of noise added to sent predictions")
      ->capture_default_str();
  app->add_option("--seed", s.seed, "Seed for data generation and noise")
      ->capture_default_str();
  app->add_flag("!--no-se", s.standard_errors, "Skip standard-error recovery");
}

void AddPartyOptions(CLI::App* app, PartyOptions& p, const char* endpoint_flag,
                     const char* endpoint_help) {
  app->add_option("--data", p.data_path, "CSV with this party's columns and the target")
      ->required();
  app->add_option("--target", p.target_column, "Target column name")->required();
  app->add_option("--features", p.feature_columns,
                  "Feature columns (default: all but the target)")
      ->delimiter(',');
  app->add_option("--family", p.family, "gaussian | binomial | poisson")
      ->capture_default_str();
  app->add_flag("--standardize", p.standardize, "Standardize continuous features");
  app->add_option(endpoint_flag, p.endpoint, endpoint_help)->required();
  app->add_option("--psk-env", p.psk_env, "Environment variable holding the hex psk");
  app->add_option("--psk-file", p.psk_file, "File holding the hex psk");
  app->add_option("--output", p.output_path, "Coefficients and SEs (CSV)");
  app->add_option("--summary", p.summary_path, "Session summary (JSON)");
  app->add_option("--trace-export", p.trace_export_dir, "Directory for the iteration trace");
  app->add_option("--timeout-ms", p.connect_timeout_ms, "Connect/accept timeout")
      ->capture_default_str();
  AddSessionOptions(app, p.session);
}

template <typename F>
void WithOutput(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIoError, "cannot write '" + path + "'");
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splitglm: generalized linear models on vertically partitioned data"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::string sim_output;
  auto* simulate = app.add_subcommand("simulate", "Run both parties in-process");
  simulate->add_option("--family", sim.family)->capture_default_str();
  simulate->add_option("--n", sim.n)->capture_default_str();
  simulate->add_option("--p", sim.p)->capture_default_str();
  simulate->add_option("--covariance", sim.covariance)->capture_default_str();
  simulate->add_option("--initiator-features", sim.initiator_features,
                       "Synthetic features given to the initiator (default ceil(p/2))");
  simulate->add_option("--data", sim.data_path, "Use a CSV instead of synthetic data");
  simulate->add_option("--target", sim.target_column);
  simulate->add_option("--initiator-columns", sim.initiator_columns)->delimiter(',');
  simulate->add_flag("--standardize", sim.standardize);
  simulate->add_option("--output", sim_output, "Report CSV");
  simulate->add_option("--trace-export", sim.trace_export_dir);
  AddSessionOptions(simulate, sim.session);

  BenchmarkOptions bench;
  std::string bench_output;
  auto* benchmark = app.add_subcommand("benchmark", "Replicated grid against the oracle");
  benchmark->add_option("--families", bench.families)->delimiter(',')->capture_default_str();
  benchmark->add_option("--ps", bench.ps)->delimiter(',')->capture_default_str();
  benchmark->add_option("--covariances", bench.covariances)->delimiter(',')->capture_default_str();
  benchmark->add_option("--n", bench.n)->capture_default_str();
  benchmark->add_option("--reps", bench.replications)->capture_default_str();
  benchmark->add_option("--output", bench_output, "Long-format CSV (default stdout)");
  AddSessionOptions(benchmark, bench.session);

  PartyOptions serve_opts;
  auto* serve = app.add_subcommand("serve", "Listen and run the responder");
  AddPartyOptions(serve, serve_opts, "--listen", "host:port to listen on");
  PartyOptions connect_opts;
  auto* connect = app.add_subcommand("connect", "Dial a peer and run the initiator");
  AddPartyOptions(connect, connect_opts, "--peer", "host:port of the serving party");

  auto* attack_cmd = app.add_subcommand("attack", "Reconstruction attacks");
  attack_cmd->require_subcommand(1);
  attack::StudySpec study;
  std::vector<Eigen::Index> r_known = {1};
  std::string study_format = "csv";
  std::string study_output;
  auto* study_cmd = attack_cmd->add_subcommand("study", "Monte-Carlo MSE study");
  study_cmd->add_option("--n", study.n)->capture_default_str();
  study_cmd->add_option("--p", study.p)->capture_default_str();
  study_cmd->add_option("--r-known", r_known)->delimiter(',')->capture_default_str();
  study_cmd->add_option("--sigma2", study.sigma2)->capture_default_str();
  study_cmd->add_option("--covariance", study.covariance)->capture_default_str();
  study_cmd->add_option("--reps", study.replications)->capture_default_str();
  study_cmd->add_option("--seed", study.seed)->capture_default_str();
  study_cmd->add_option("--format", study_format)
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
  study_cmd->add_option("--output", study_output);
  AttackTraceOptions trace_opts;
  auto* trace_cmd = attack_cmd->add_subcommand(
      "trace", "Reconstruct a partner block from an exported trace");
  trace_cmd->add_option("--trace", trace_opts.trace_dir)->required();
  trace_cmd->add_option("--coefficients", trace_opts.coefficients_path,
                        "Partner's disclosed results CSV")
      ->required();
  trace_cmd->add_option("--truth", trace_opts.truth_path, "Partner block CSV for scoring");
  trace_cmd->add_option("--output", trace_opts.output_path, "Reconstructed block CSV");

  FitOptions fit_opts;
  std::string fit_output;
  auto* fit = app.add_subcommand("fit", "Full-data oracle fit of one CSV");
  fit->add_option("--data", fit_opts.data_path)->required();
  fit->add_option("--target", fit_opts.target_column)->required();
  fit->add_option("--features", fit_opts.feature_columns)->delimiter(',');
  fit->add_option("--family", fit_opts.family)->capture_default_str();
  fit->add_flag("--standardize", fit_opts.standardize);
  fit->add_option("--output", fit_output);

  IngestOptions ingest_opts;
  std::string ingest_data;
  std::string ingest_family = "gaussian";
  std::string ingest_output;
  auto* ingest = app.add_subcommand("ingest", "Write the preprocessed design block");
  ingest->add_option("--data", ingest_data)->required();
  ingest->add_option("--target", ingest_opts.target_column)->required();
  ingest->add_option("--features", ingest_opts.feature_columns)->delimiter(',');
  ingest->add_option("--family", ingest_family)->capture_default_str();
  ingest->add_flag("--standardize", ingest_opts.standardize);
  ingest->add_flag("--intercept", ingest_opts.add_intercept);
  ingest->add_option("--output", ingest_output);

  SyntheticSpec gen;
  std::string gen_family = "gaussian";
  std::string gen_output;
  auto* generate = app.add_subcommand("generate", "Write a synthetic data set");
  generate->add_option("--family", gen_family)->capture_default_str();
  generate->add_option("--n", gen.n)->capture_default_str();
  generate->add_option("--p", gen.p)->capture_default_str();
  generate->add_option("--covariance", gen.covariance)->capture_default_str();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--output", gen_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) {
      const SimulationReport report = RunSimulation(sim);
      if (!sim_output.empty()) {
        WithOutput(sim_output, [&](std::ostream& o) { WriteSimulationCsv(o, report); });
      }
      WriteSimulationTable(std::cout, report);
      return report.initiator.converged ? kExitOk : kExitNotConverged;
    }
    if (*benchmark) {
      WithOutput(bench_output, [&](std::ostream& o) { RunBenchmark(bench, o); });
      return kExitOk;
    }
    if (*serve || *connect) {
      const bool is_serve = static_cast<bool>(*serve);
      const PartyRun run = is_serve ? RunServe(serve_opts, std::cerr)
                                    : RunConnect(connect_opts, std::cerr);
      const auto& opts = is_serve ? serve_opts : connect_opts;
      if (opts.output_path.empty()) WriteResultsCsv(std::cout, run);
      if (!run.outcome.result.se_note.empty()) {
        std::cerr << "note: " << run.outcome.result.se_note << '\n';
      }
      return run.outcome.result.converged ? kExitOk : kExitNotConverged;
    }
    if (*study_cmd) {
      std::vector<attack::ReconstructionReport> rows;
      for (Eigen::Index r : r_known) {
        attack::StudySpec spec = study;
        spec.r_known = r;
        auto part = attack::RunStudy(spec);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      WithOutput(study_output, [&](std::ostream& o) {
        if (study_format == "csv") {
          attack::WriteReportCsv(o, rows);
        } else {
          attack::WriteReportJsonLines(o, rows);
        }
      });
      return kExitOk;
    }
    if (*trace_cmd) {
      const AttackTraceResult result = RunAttackOnTrace(trace_opts);
      std::cout << "reconstructed " << result.x_hat.rows() << " x "
                << result.x_hat.cols() << " block\n";
      if (result.mse) {
        std::cout << "mse=" << *result.mse
                  << " revealed_fraction=" << *result.revealed_fraction << '\n';
      }
      return kExitOk;
    }
    if (*fit) {
      const FitRun run = RunFit(fit_opts);
      WithOutput(fit_output, [&](std::ostream& o) {
        o << "coefficient,estimate,std_error\n";
        o.precision(17);
        for (std::size_t j = 0; j < run.column_names.size(); ++j) {
          const auto k = static_cast<Eigen::Index>(j);
          o << run.column_names[j] << ',' << run.fit.coefficients[k] << ','
            << run.fit.standard_errors[k] << '\n';
        }
      });
      return run.fit.converged ? kExitOk : kExitNotConverged;
    }
    if (*ingest) {
      ingest_opts.family = FamilySpec::Parse(ingest_family);
      const Ingested data = IngestCsv(ingest_data, ingest_opts);
      WithOutput(ingest_output, [&](std::ostream& o) { WriteBlockCsv(o, data.block); });
      return kExitOk;
    }
    if (*generate) {
      gen.family = FamilySpec::Parse(gen_family);
      const SyntheticData data = GenerateSynthetic(gen);
      WithOutput(gen_output, [&](std::ostream& o) { WriteSyntheticCsv(o, data); });
      return kExitOk;
    }
  } catch (const splitglm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
