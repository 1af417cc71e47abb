#pragma once

#include <map>
#include <string>
#include <vector>

#include "rvpp/domain.hpp"
#include "rvpp/model_ir.hpp"

namespace rvpp {

// proposed: asymmetric bands, global budgets with worst-period selection;
// deterministic: every budget forced to zero;
// baseline23: per-period fractional unit budgets with even reduction and
// symmetric price deviations around the mean.
enum class BuildMode { proposed, deterministic, baseline23 };

std::string to_string(BuildMode mode);

// Values cleared by earlier sessions, treated as parameters downstream.
struct StarredResults {
  std::vector<double> p_da;                              // cleared trade per period
  std::map<std::string, std::vector<double>> unit_p_da;  // unit id -> dispatch
  std::map<std::string, int> profile_choice;             // demand id -> profile index
  std::vector<double> r_up, r_down;                      // cleared reserve totals
  std::map<int, std::vector<double>> p_id;               // intraday index -> trade

  // Complete dispatch of the most recent session; a later session with a
  // shorter trading window freezes every period before its start to these.
  struct Latest {
    std::map<std::string, std::vector<double>> unit_p;  // incl. demand consumption
    std::map<std::string, std::vector<double>> unit_r_up, unit_r_down;
    std::map<std::string, std::vector<double>> stu_p_sf, stu_q;
  } latest;

  bool has_dam() const { return !p_da.empty(); }
  bool has_reserve() const { return !r_up.empty(); }
};

// Variable id per period (index t-1); -1 where the role does not exist.
struct SeriesVars {
  std::vector<int> at;
  int operator[](int t) const { return at[static_cast<size_t>(t - 1)]; }  // t 1-based
  bool empty() const { return at.empty(); }
};

struct UnitVarRefs {
  SeriesVars p, r_up, r_down;
};

struct StuVarRefs {
  SeriesVars p, r_up, r_down, p_sf, q, e;
};

struct DemandVarRefs {
  std::vector<int> u;  // one binary per candidate profile
  SeriesVars p, r_up, r_down;
};

// Handle for recomputing one stream's income reduction from a solution.
struct PriceStreamRefs {
  std::string name;  // da, sr_up, sr_down or id
  double gamma = 0.0;
  int first_period = 1;  // eta[i], y[i] belong to period first_period + i
  int v = -1;
  std::vector<int> eta, y;
};

struct ObjectiveBreakdown {
  double median_income = 0.0;
  double operating_cost = 0.0;
  double profile_cost = 0.0;
  std::map<std::string, double> price_reduction;  // stream name -> gamma*v + sum eta
  double total() const;                           // income - costs - reductions
};

struct SessionModelBundle {
  ModelIR model;
  std::string session_name;
  SessionKind kind = SessionKind::dam_srm;
  int idm_index = 0;
  TimeGrid grid;
  BuildMode mode = BuildMode::proposed;

  SeriesVars p_trade;          // this session's energy trade (day-ahead or intraday)
  SeriesVars r_up, r_down;     // reserve totals (sessions that still trade reserve)
  std::map<std::string, UnitVarRefs> ndres;
  std::map<std::string, StuVarRefs> stu;
  std::map<std::string, DemandVarRefs> demand;
  std::map<std::string, int> robust_window_start;  // group id -> first period (1-based)
  std::vector<PriceStreamRefs> price_streams;

  // objective = income - operating cost - profile cost - price reductions
  LinExpr income_expr, op_cost_expr, profile_cost_expr;

  ObjectiveBreakdown decompose(const std::vector<double>& values) const;
};

// Robust price block for one traded quantity (worst-case income reduction
// under a budgeted number of adverse price periods). quantity[i] trades in
// period first_period + i. signed_quantity adds the buying-side link (ratio
// neg_dev/pos_dev); energy_quantity scales the link by delta_t (energy is
// priced per MWh, reserve capacity per MW). Appends -gamma*v - sum(eta) to
// the model objective and registers the stream on the bundle.
void add_price_robust_terms(SessionModelBundle& bundle, const std::string& stream,
                            const std::vector<int>& quantity, int first_period,
                            const ForecastBand& band, double gamma, bool signed_quantity,
                            bool energy_quantity);

// Assemble the complete MILP for one session. cfg must be validated; starred
// carries everything cleared by earlier sessions (empty for the first).
SessionModelBundle build_session_model(const CaseConfig& cfg, const std::string& session_name,
                                       const StarredResults& starred, BuildMode mode);

// Per-period symmetric comparison model (even energy reduction, mean prices).
SessionModelBundle build_baseline23_model(const CaseConfig& cfg, const std::string& session_name,
                                          const StarredResults& starred);

// Swap the aggregate supply-demand balance rows for per-bus DC flow balances.
// Must run after build_session_model (it rewrites the balance rows in place).
void build_network_extension(SessionModelBundle& bundle, const CaseConfig& cfg,
                             const NetworkSpec& net);

class FormulationError : public std::runtime_error {
 public:
  explicit FormulationError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace rvpp
