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

#include "splitglm/cli/commands.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "splitglm/error.h"
#include "splitglm/transport/link.h"

namespace splitglm::cli {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

transport::SessionId SessionIdFromSeed(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5e551011d5eedULL);
  transport::SessionId id{};
  for (auto& b : id) b = static_cast<std::uint8_t>(rng());
  return id;
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIoError, "cannot write '" + path + "'");
  return out;
}

std::vector<std::string> RoundHeader(Eigen::Index rounds) {
  std::vector<std::string> header;
  for (Eigen::Index r = 1; r <= rounds; ++r) header.push_back("r" + std::to_string(r));
  return header;
}

DesignBlock EmptyBlock(Eigen::Index n) {
  return DesignBlock(Matrix(n, 0), {}, true, Vector());
}

// Relative SE bias per coefficient; NaN when the protocol SE is missing.
double RelativeBias(double estimate, double oracle) {
  return estimate / oracle - 1.0;
}

void WritePartySummary(std::ostream& out, const PartySummary& s) {
  out << "  " << std::left << std::setw(10) << s.party << std::right
      << " iterations=" << s.iterations
      << " converged=" << (s.converged ? "yes" : "no")
      << " active_sweeps=" << s.active_sweeps
      << " partner_rank=" << s.partner_rank;
  if (!s.se_note.empty()) out << "\n             note: " << s.se_note;
  out << '\n';
}

PartySummary Summarize(const std::string& party, const protocol::FitResult& r) {
  return {party,           r.iterations_used,        r.converged,
          r.active_sweeps, r.estimated_partner_rank, r.sigma2,
          r.se_note};
}

}  // namespace

protocol::SessionConfig MakeSessionConfig(const FamilySpec& family,
                                          const SessionOptions& options) {
  protocol::SessionConfig cfg;
  cfg.family = family;
  cfg.tolerance = options.tolerance;
  cfg.max_iterations = options.max_iterations;
  cfg.min_iterations = options.min_iterations;
  cfg.noise_sd = options.noise_sd;
  cfg.noise_seed = options.seed;
  cfg.compute_standard_errors = options.standard_errors;
  cfg.Validate();
  return cfg;
}

// ---- simulate ----------------------------------------------------------

double SimulationReport::MaxAbsCoefficientDiff() const {
  double worst = 0.0;
  for (const auto& row : rows) {
    worst = std::max(worst, std::abs(row.estimate - row.oracle_estimate));
  }
  return worst;
}

SimulationReport RunSimulation(const SimulateOptions& options) {
  const FamilySpec family = FamilySpec::Parse(options.family);
  std::optional<DesignBlock> a;
  std::optional<DesignBlock> b;
  std::optional<TargetVector> y;

  if (!options.data_path.empty()) {
    if (options.initiator_columns.empty()) {
      Fail(ErrorCode::kInvalidArgument,
           "simulate on a CSV needs the initiator's columns");
    }
    const CsvTable table = ReadCsv(options.data_path);
    std::set<std::string> mine(options.initiator_columns.begin(),
                               options.initiator_columns.end());
    std::vector<std::string> theirs;
    for (const auto& name : table.header) {
      if (name != options.target_column && !mine.count(name)) {
        theirs.push_back(name);
      }
    }
    IngestOptions in;
    in.target_column = options.target_column;
    in.family = family;
    in.standardize = options.standardize;
    in.feature_columns = options.initiator_columns;
    in.add_intercept = !family.is_gaussian();
    Ingested left = IngestCsv(table, in);
    a = std::move(left.block);
    y = std::move(left.y);
    if (theirs.empty()) {
      b = EmptyBlock(a->rows());
    } else {
      in.feature_columns = theirs;
      in.add_intercept = false;
      b = IngestCsv(table, in).block;
    }
  } else {
    SyntheticSpec spec;
    spec.family = family;
    spec.n = options.n;
    spec.p = options.p;
    spec.covariance = options.covariance;
    spec.seed = options.session.seed;
    const SyntheticData data = GenerateSynthetic(spec);
    const Eigen::Index split =
        options.initiator_features.value_or((options.p + 1) / 2);
    PartySplit parts = SplitBetweenParties(data, family, split);
    a = std::move(parts.initiator);
    b = std::move(parts.responder);
    y = std::move(parts.y);
  }

  protocol::SessionConfig cfg_a = MakeSessionConfig(family, options.session);
  protocol::SessionConfig cfg_b = cfg_a;
  cfg_a.session_id = SessionIdFromSeed(options.session.seed);
  cfg_b.session_id = cfg_a.session_id;
  cfg_b.noise_seed = options.session.seed + 0x9e3779b97f4a7c15ULL;

  const protocol::TwoPartyOutcome outcome =
      protocol::SimulateTwoParty(*a, *b, *y, cfg_a, cfg_b);
  const auto oracle_start = Clock::now();
  const FullFit oracle = FitFullGlm(std::vector<DesignBlock>{*a, *b}, *y, family);

  SimulationReport report;
  report.family = std::string(family.name());
  report.n = y->size();
  report.oracle_seconds = Seconds(oracle_start);
  report.protocol_seconds = outcome.wall_seconds;
  report.initiator = Summarize("initiator", outcome.initiator.result);
  report.responder = Summarize("responder", outcome.responder.result);

  Eigen::Index offset = 0;
  for (const auto& [party, block, result] :
       {std::tuple{"initiator", &*a, &outcome.initiator.result},
        std::tuple{"responder", &*b, &outcome.responder.result}}) {
    for (Eigen::Index j = 0; j < block->cols(); ++j) {
      report.rows.push_back({party, block->column_names()[static_cast<std::size_t>(j)],
                             result->local_coefficients[j],
                             result->local_standard_errors[j],
                             oracle.coefficients[offset + j],
                             oracle.standard_errors[offset + j]});
    }
    offset += block->cols();
  }

  if (!options.trace_export_dir.empty()) {
    ExportTrace(options.trace_export_dir + "/initiator", outcome.initiator.trace);
    ExportTrace(options.trace_export_dir + "/responder", outcome.responder.trace);
  }
  return report;
}

void WriteSimulationCsv(std::ostream& out, const SimulationReport& report) {
  out << "party,coefficient,estimate,std_error,oracle_estimate,oracle_std_error,"
         "abs_diff,rel_se_bias,iterations,converged,active_sweeps\n";
  out << std::setprecision(17);
  for (const auto& row : report.rows) {
    const PartySummary& s =
        row.party == "initiator" ? report.initiator : report.responder;
    out << row.party << ',' << row.name << ',' << row.estimate << ','
        << row.std_error << ',' << row.oracle_estimate << ','
        << row.oracle_std_error << ','
        << std::abs(row.estimate - row.oracle_estimate) << ','
        << RelativeBias(row.std_error, row.oracle_std_error) << ','
        << s.iterations << ',' << (s.converged ? 1 : 0) << ','
        << s.active_sweeps << '\n';
  }
}

void WriteSimulationTable(std::ostream& out, const SimulationReport& report) {
  out << "family=" << report.family << " N=" << report.n << '\n';
  WritePartySummary(out, report.initiator);
  WritePartySummary(out, report.responder);
  out << std::fixed << std::setprecision(3) << "  protocol " << report.protocol_seconds
      << " s, oracle " << report.oracle_seconds << " s\n\n";
  out << std::left << std::setw(10) << "party" << std::setw(16) << "coefficient"
      << std::right << std::setw(13) << "estimate" << std::setw(13) << "oracle"
      << std::setw(11) << "abs diff" << std::setw(11) << "se" << std::setw(11)
      << "oracle se" << std::setw(10) << "se bias" << '\n';
  for (const auto& row : report.rows) {
    out << std::left << std::setw(10) << row.party << std::setw(16) << row.name
        << std::right << std::setprecision(6) << std::fixed << std::setw(13)
        << row.estimate << std::setw(13) << row.oracle_estimate
        << std::scientific << std::setprecision(2) << std::setw(11)
        << std::abs(row.estimate - row.oracle_estimate) << std::fixed
        << std::setprecision(5) << std::setw(11) << row.std_error
        << std::setw(11) << row.oracle_std_error << std::setprecision(2)
        << std::setw(9) << 100.0 * RelativeBias(row.std_error, row.oracle_std_error)
        << "%\n";
  }
  out << std::defaultfloat;
}

// ---- benchmark ---------------------------------------------------------

std::uint64_t ReplicationSeed(std::uint64_t seed, const std::string& family,
                              Eigen::Index p, double covariance,
                              int replication) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(family.empty() ? 0 : family[0]),
                    static_cast<std::uint32_t>(p),
                    static_cast<std::uint32_t>(std::lround(covariance * 1e6)),
                    static_cast<std::uint32_t>(replication)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

BenchmarkRow RunBenchmarkReplication(const std::string& family_name,
                                     Eigen::Index n, Eigen::Index p,
                                     double covariance, int replication,
                                     std::uint64_t seed,
                                     const SessionOptions& session) {
  const FamilySpec family = FamilySpec::Parse(family_name);
  BenchmarkRow row;
  row.family = std::string(family.name());
  row.n = n;
  row.p = p;
  row.covariance = covariance;
  row.replication = replication;
  row.data_seed = ReplicationSeed(seed, row.family, p, covariance, replication);

  SyntheticSpec spec{family, n, p, covariance, row.data_seed};
  const PartySplit parts = SplitBetweenParties(GenerateSynthetic(spec), family);
  SessionOptions opts = session;
  opts.seed = row.data_seed;
  protocol::SessionConfig cfg = MakeSessionConfig(family, opts);
  cfg.session_id = SessionIdFromSeed(row.data_seed);

  const protocol::TwoPartyOutcome outcome = protocol::SimulateTwoParty(
      parts.initiator, parts.responder, parts.y, cfg, cfg);
  const auto oracle_start = Clock::now();
  const FullFit oracle = FitFullGlm(
      std::vector<DesignBlock>{parts.initiator, parts.responder}, parts.y, family);
  row.oracle_seconds = Seconds(oracle_start);
  row.protocol_seconds = outcome.wall_seconds;
  row.iterations = outcome.initiator.result.iterations_used;
  row.converged = outcome.initiator.result.converged;
  row.active_sweeps = outcome.initiator.result.active_sweeps;

  Vector est(oracle.coefficients.size());
  Vector se(oracle.coefficients.size());
  est << outcome.initiator.result.local_coefficients,
      outcome.responder.result.local_coefficients;
  se << outcome.initiator.result.local_standard_errors,
      outcome.responder.result.local_standard_errors;

  double bias_sum = 0.0;
  int within = 0;
  for (Eigen::Index j = 0; j < est.size(); ++j) {
    const double diff = est[j] - oracle.coefficients[j];
    row.max_abs_coef_diff = std::max(row.max_abs_coef_diff, std::abs(diff));
    const double rel = diff / std::abs(oracle.coefficients[j]);
    bias_sum += rel;
    row.max_rel_coef_bias = std::max(row.max_rel_coef_bias, std::abs(rel));
    const double se_bias = RelativeBias(se[j], oracle.standard_errors[j]);
    row.rel_se_bias.push_back(se_bias);
    if (std::isnan(se_bias)) {
      ++row.se_failures;
      row.max_rel_se_bias = std::numeric_limits<double>::quiet_NaN();
    } else {
      if (!std::isnan(row.max_rel_se_bias)) {
        row.max_rel_se_bias = std::max(row.max_rel_se_bias, std::abs(se_bias));
      }
      if (std::abs(se_bias) <= 0.03) ++within;
    }
  }
  row.mean_rel_coef_bias = bias_sum / static_cast<double>(est.size());
  row.frac_se_within_3pct = static_cast<double>(within) / static_cast<double>(est.size());
  return row;
}

void WriteBenchmarkHeader(std::ostream& out) {
  out << "family,n,p,covariance,replication,data_seed,iterations,converged,"
         "active_sweeps,max_abs_coef_diff,mean_rel_coef_bias,max_rel_coef_bias,"
         "max_rel_se_bias,frac_se_within_3pct,se_failures,protocol_seconds,"
         "oracle_seconds\n";
}

void WriteBenchmarkRow(std::ostream& out, const BenchmarkRow& r) {
  out << std::setprecision(10) << r.family << ',' << r.n << ',' << r.p << ','
      << r.covariance << ',' << r.replication << ',' << r.data_seed << ','
      << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << r.active_sweeps
      << ',' << r.max_abs_coef_diff << ',' << r.mean_rel_coef_bias << ','
      << r.max_rel_coef_bias << ',' << r.max_rel_se_bias << ','
      << r.frac_se_within_3pct << ',' << r.se_failures << ','
      << r.protocol_seconds << ',' << r.oracle_seconds << '\n';
}

void RunBenchmark(const BenchmarkOptions& options, std::ostream& out) {
  if (options.replications < 1 || options.families.empty() ||
      options.ps.empty() || options.covariances.empty()) {
    Fail(ErrorCode::kInvalidArgument, "empty benchmark grid");
  }
  WriteBenchmarkHeader(out);
  for (const auto& family : options.families) {
    for (Eigen::Index p : options.ps) {
      for (double covariance : options.covariances) {
        for (int rep = 0; rep < options.replications; ++rep) {
          WriteBenchmarkRow(out, RunBenchmarkReplication(
                                     family, options.n, p, covariance, rep,
                                     options.seed, options.session));
          out.flush();
        }
      }
    }
  }
}

// ---- serve / connect ---------------------------------------------------

transport::Key LoadPsk(const PartyOptions& options) {
  if (options.psk_env.empty() == options.psk_file.empty()) {
    Fail(ErrorCode::kInvalidArgument,
         "give exactly one of --psk-env or --psk-file");
  }
  if (!options.psk_env.empty()) {
    const char* value = std::getenv(options.psk_env.c_str());
    if (value == nullptr) {
      Fail(ErrorCode::kInvalidArgument,
           "environment variable " + options.psk_env + " is not set");
    }
    return transport::ParseHexKey(value);
  }
  std::ifstream in(options.psk_file);
  if (!in) Fail(ErrorCode::kIoError, "cannot read '" + options.psk_file + "'");
  std::stringstream text;
  text << in.rdbuf();
  return transport::ParseHexKey(text.str());
}

namespace {

Ingested IngestParty(const PartyOptions& options, bool initiator) {
  const FamilySpec family = FamilySpec::Parse(options.family);
  IngestOptions in;
  in.target_column = options.target_column;
  in.feature_columns = options.feature_columns;
  in.family = family;
  in.standardize = options.standardize;
  in.add_intercept = initiator && !family.is_gaussian();
  return IngestCsv(options.data_path, in);
}

PartyRun RunRole(const PartyOptions& options, protocol::PartyRole role,
                 std::ostream& log) {
  const bool initiator = role == protocol::PartyRole::kInitiator;
  const Ingested data = IngestParty(options, initiator);
  const transport::Key psk = LoadPsk(options);
  protocol::SessionConfig cfg =
      MakeSessionConfig(data.y.family(), options.session);
  const transport::Endpoint endpoint = transport::ParseEndpoint(options.endpoint);
  const auto timeout = std::chrono::milliseconds(options.connect_timeout_ms);

  log << "warning: make sure no feature is entered by both parties\n";
  std::unique_ptr<transport::SecureChannel> channel;
  if (initiator) {
    cfg.session_id = transport::RandomSessionId();
    auto link = transport::TcpConnect(endpoint, cfg.session_id, timeout);
    channel = std::make_unique<transport::SecureChannel>(
        std::move(link), psk, cfg.session_id, role);
  } else {
    transport::TcpListener listener(endpoint);
    log << "listening on " << endpoint.host << ':' << listener.port() << std::endl;
    auto [link, session_id] = listener.Accept(timeout);
    cfg.session_id = session_id;
    channel = std::make_unique<transport::SecureChannel>(std::move(link), psk,
                                                         session_id, role);
  }

  PartyRun run;
  run.column_names = data.block.column_names();
  run.outcome = protocol::RunParty(data.block, data.y, cfg, role, *channel);
  channel->Close();

  if (!options.output_path.empty()) {
    std::ofstream out = OpenOutput(options.output_path);
    WriteResultsCsv(out, run);
  }
  if (!options.summary_path.empty()) {
    std::ofstream out = OpenOutput(options.summary_path);
    WriteSummaryJson(out, run, role);
  }
  if (!options.trace_export_dir.empty()) {
    ExportTrace(options.trace_export_dir, run.outcome.trace);
  }
  return run;
}

}  // namespace

PartyRun RunServe(const PartyOptions& options, std::ostream& log) {
  return RunRole(options, protocol::PartyRole::kResponder, log);
}

PartyRun RunConnect(const PartyOptions& options, std::ostream& log) {
  return RunRole(options, protocol::PartyRole::kInitiator, log);
}

void WriteResultsCsv(std::ostream& out, const PartyRun& run) {
  const auto& r = run.outcome.result;
  out << "coefficient,estimate,std_error\n" << std::setprecision(17);
  for (std::size_t j = 0; j < run.column_names.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    out << run.column_names[j] << ',' << r.local_coefficients[k] << ','
        << r.local_standard_errors[k] << '\n';
  }
}

void WriteSummaryJson(std::ostream& out, const PartyRun& run,
                      protocol::PartyRole role) {
  const auto& r = run.outcome.result;
  auto finite_or_null = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json j = {
      {"role", role == protocol::PartyRole::kInitiator ? "initiator" : "responder"},
      {"family", std::string(r.agreed.family.name())},
      {"n", r.agreed.n},
      {"tolerance", r.agreed.tolerance},
      {"min_iterations", r.agreed.min_iterations},
      {"max_iterations", r.agreed.max_iterations},
      {"iterations", r.iterations_used},
      {"converged", r.converged},
      {"active_sweeps", r.active_sweeps},
      {"own_delta", finite_or_null(r.own_delta)},
      {"partner_delta", finite_or_null(r.partner_delta)},
      {"estimated_partner_rank", r.estimated_partner_rank},
      {"sigma2", finite_or_null(r.sigma2)},
      {"se_note", r.se_note},
  };
  out << j.dump(2) << '\n';
}

void ExportTrace(const std::string& dir, const protocol::IterationTrace& trace) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIoError, "cannot create '" + dir + "': " + ec.message());
  const auto header = RoundHeader(trace.rounds());
  for (const auto& [name, m] :
       {std::pair{"sent_predictions.csv", &trace.sent_predictions},
        std::pair{"received_residual_inputs.csv", &trace.received_residual_inputs},
        std::pair{"received_predictions.csv", &trace.received_predictions}}) {
    std::ofstream out = OpenOutput(dir + "/" + name);
    WriteMatrixCsv(out, *m, header);
  }
  std::ofstream out = OpenOutput(dir + "/weights_final.csv");
  WriteMatrixCsv(out, trace.weights_final, {"weight"});
}

protocol::IterationTrace ImportTrace(const std::string& dir) {
  protocol::IterationTrace trace;
  trace.sent_predictions = ReadMatrixCsv(dir + "/sent_predictions.csv");
  trace.received_residual_inputs =
      ReadMatrixCsv(dir + "/received_residual_inputs.csv");
  trace.received_predictions = ReadMatrixCsv(dir + "/received_predictions.csv");
  const Matrix w = ReadMatrixCsv(dir + "/weights_final.csv");
  trace.weights_final = w.col(0);
  trace.Validate();
  return trace;
}

// ---- attack ------------------------------------------------------------

AttackTraceResult RunAttackOnTrace(const AttackTraceOptions& options) {
  const protocol::IterationTrace trace = ImportTrace(options.trace_dir);
  const CsvTable coefs = ReadCsv(options.coefficients_path);
  const std::size_t name_col = coefs.ColumnIndex("coefficient");
  const std::size_t value_col = coefs.ColumnIndex("estimate");

  AttackTraceResult result;
  attack::AdversaryView view;
  view.received_predictions = trace.received_predictions;
  view.known_coefficients.resize(static_cast<Eigen::Index>(coefs.rows.size()),
                                 coefs.rows.empty() ? 0 : 1);
  for (std::size_t i = 0; i < coefs.rows.size(); ++i) {
    const auto v = ParseNumber(coefs.rows[i][value_col]);
    if (!v) Fail(ErrorCode::kIoError, "non-numeric coefficient estimate");
    view.known_coefficients(static_cast<Eigen::Index>(i), 0) = *v;
    result.column_names.push_back(coefs.rows[i][name_col]);
  }
  if (view.known_coefficients.cols() > 0) {
    view.known_rounds.push_back(trace.rounds() - 1);
  }
  result.x_hat = attack::Reconstruct(view);

  if (!options.truth_path.empty()) {
    const Matrix truth = ReadMatrixCsv(options.truth_path);
    result.mse = attack::Mse(truth, result.x_hat);
    result.revealed_fraction = attack::RevealedFraction(truth, result.x_hat);
  }
  if (!options.output_path.empty()) {
    std::ofstream out = OpenOutput(options.output_path);
    WriteMatrixCsv(out, result.x_hat, result.column_names);
  }
  return result;
}

// ---- fit / generate ----------------------------------------------------

FitRun RunFit(const FitOptions& options) {
  const FamilySpec family = FamilySpec::Parse(options.family);
  IngestOptions in;
  in.target_column = options.target_column;
  in.feature_columns = options.feature_columns;
  in.family = family;
  in.standardize = options.standardize;
  in.add_intercept = !family.is_gaussian();
  const Ingested data = IngestCsv(options.data_path, in);
  return {FitFullGlm(data.block.values(), data.y, family),
          data.block.column_names()};
}

void WriteSyntheticCsv(std::ostream& out, const SyntheticData& data) {
  std::vector<std::string> header = DefaultColumnNames(data.x.cols());
  header.push_back("y");
  Matrix all(data.x.rows(), data.x.cols() + 1);
  all << data.x, data.y;
  WriteMatrixCsv(out, all, header);
}

}  // namespace splitglm::cli
