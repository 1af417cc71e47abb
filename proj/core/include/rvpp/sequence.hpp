#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvpp/domain.hpp"
#include "rvpp/formulation.hpp"
#include "rvpp/solve.hpp"

namespace rvpp {

class SequenceError : public std::runtime_error {
 public:
  explicit SequenceError(const std::string& message) : std::runtime_error(message) {}
};

// A session reached the solver but did not come back with a verified optimum
// (infeasible, unbounded, iteration limit, or a failed independent check).
// Callers distinguishing bad inputs from solver trouble catch this first.
class SolveFailure : public SequenceError {
 public:
  using SequenceError::SequenceError;
};

ReferenceSolveOptions make_solve_options(const SolverConfig& solver);

// One cleared market session.
struct SessionResult {
  std::string session;
  SessionKind kind = SessionKind::dam_srm;
  int idm_index = 0;
  BuildMode mode = BuildMode::proposed;
  double objective = 0.0;
  ObjectiveBreakdown breakdown;
  double solve_seconds = 0.0;
  long iterations = 0;

  std::vector<double> p_trade;       // own cleared trade; zero before the session start
  std::vector<double> r_up, r_down;  // cleared reserve totals; empty without an SRM leg
  std::map<std::string, std::vector<double>> unit_p;
  std::map<std::string, std::vector<double>> unit_r_up, unit_r_down;
  std::map<std::string, std::vector<double>> stu_p_sf, stu_q, stu_e;
  std::map<std::string, int> profile_choice;  // committed by day-ahead sessions

  Solution solution;  // raw solver output, model variable space
};

// Fraction of a cleared bid the market accepts; 1.0 commits bids in full.
struct AcceptancePolicy {
  double trade_fraction = 1.0;
  double reserve_fraction = 1.0;
};

struct SequenceOptions {
  BuildMode mode = BuildMode::proposed;
  std::map<std::string, AcceptancePolicy> acceptance;  // session name -> policy
};

struct SequenceResult {
  std::vector<SessionResult> sessions;
  StarredResults positions;  // cumulative cleared positions after the last session
  double total_objective() const;
};

// Build and solve one session against the positions cleared so far. A config
// with a network section solves the network-constrained model. Throws
// SolveFailure when the session does not clear to optimality or its solution
// fails the independent feasibility check.
SessionResult run_session(const CaseConfig& cfg, const std::string& session,
                          const StarredResults& starred, BuildMode mode);

// Fold a cleared session into the cumulative positions. The full solved
// dispatch becomes the freezing baseline of later sessions; the policy scales
// only the traded positions.
void commit_session(StarredResults& starred, const SessionResult& result,
                    const AcceptancePolicy& policy = {});

// Clear the config's whole session pipeline in order. Requires the pipeline
// to open with the day-ahead session and every generation unit to carry an
// explicit forecast update for each later session.
SequenceResult chain_sessions(const CaseConfig& cfg, const SequenceOptions& opts = {});

// Chain report as one JSON document. All numeric leaves are rounded to six
// significant digits so reruns produce byte-identical files; wall-clock moves
// to the caller's manifest, never into report data.
std::string sequence_to_json(const CaseConfig& cfg, const SequenceResult& seq);

// One cleared session as a standalone JSON document, same conventions.
std::string session_report_json(const SessionResult& result);

// Per-session dispatch table: `t,p_trade,r_up,r_down` plus one dispatch
// column per unit in config order.
std::string session_csv(const CaseConfig& cfg, const SessionResult& result);

// Writes sequence.json plus session_<name>.csv per session under out_dir
// (created when missing).
void write_sequence_reports(const CaseConfig& cfg, const SequenceResult& seq,
                            const std::string& out_dir);

}  // namespace rvpp
