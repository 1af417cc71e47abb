#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvpp {

// Time axis of one market session: T periods of delta_t hours; session_start
// is the first period (1-based) the session may still trade.
struct TimeGrid {
  int period_count = 0;
  double delta_t = 1.0;
  int session_start = 1;
};

// Asymmetric forecast interval per period: [median - neg_dev, median + pos_dev].
struct ForecastBand {
  std::vector<double> median;
  std::vector<double> pos_dev;
  std::vector<double> neg_dev;
  int periods() const { return static_cast<int>(median.size()); }
  bool empty() const { return median.empty(); }
};

struct NdResUnit {
  std::string id;
  double p_min = 0.0;
  double p_max = 0.0;
  double op_cost = 0.0;       // per MWh
  double sr_ramp_up = 0.0;    // MW per minute
  double sr_ramp_down = 0.0;  // MW per minute
  ForecastBand forecast;      // available production, MW
  std::map<std::string, ForecastBand> forecast_updates;  // session name -> band

  const ForecastBand& band_for(const std::string& session) const {
    auto it = forecast_updates.find(session);
    return it == forecast_updates.end() ? forecast : it->second;
  }
};

struct StuUnit {
  std::string id;
  double p_min = 0.0;
  double p_max = 0.0;  // electric power block limit, MW
  double op_cost = 0.0;
  double storage_capacity = 0.0;  // thermal MWh
  double initial_storage = 0.0;
  double pb_efficiency = 1.0;     // thermal -> electric fraction
  double sr_ramp_up = 0.0;
  double sr_ramp_down = 0.0;
  ForecastBand solar_field_forecast;  // thermal MW
  std::map<std::string, ForecastBand> forecast_updates;

  const ForecastBand& band_for(const std::string& session) const {
    auto it = forecast_updates.find(session);
    return it == forecast_updates.end() ? solar_field_forecast : it->second;
  }
};

struct DemandProfile {
  double cost = 0.0;  // one-off cost of committing to this profile
  ForecastBand band;  // median consumption plus upward deviation, MW
};

struct FlexDemandUnit {
  std::string id;
  std::vector<DemandProfile> profiles;
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;    // MW per hour
  double ramp_down = 0.0;
  double sr_ramp_up = 0.0;  // MW per minute
  double sr_ramp_down = 0.0;
  std::vector<double> flex_up;    // per-period fraction of scheduled load
  std::vector<double> flex_down;
  double min_daily_energy = 0.0;  // MWh over the horizon
};

enum class SessionKind { dam_srm, srm_idm1, idm_k };

std::string to_string(SessionKind kind);

struct MarketSessionSpec {
  std::string name;
  SessionKind kind = SessionKind::dam_srm;
  int idm_index = 0;  // k of an IDM_K session; SRM_IDM1 trades IDM#1
  TimeGrid grid;
  ForecastBand lambda_da;       // energy price, DAM sessions
  ForecastBand lambda_sr_up;    // capacity price per MW, sessions with SRM
  ForecastBand lambda_sr_down;
  ForecastBand lambda_id;       // energy price, sessions with an IDM leg
  std::vector<double> rho;      // required down/up reserve ratio per period
  double kappa = 0.0;           // reserve share of total generation capacity
  double sr_action_time = 15.0; // minutes the reserve must be sustainable

  bool has_dam() const { return kind == SessionKind::dam_srm; }
  bool has_srm() const { return kind != SessionKind::idm_k; }
  bool has_idm() const { return kind != SessionKind::dam_srm; }
};

struct PriceBudgets {
  double da = 0.0;
  double sr_up = 0.0;
  double sr_down = 0.0;
  double id = 0.0;
};

struct BudgetSet {
  PriceBudgets price;
  std::map<std::string, double> unit;  // unit id -> integer budget
};

struct NetworkBus {
  std::string id;
  bool main_subregion = false;  // buses where the traded power physically enters
};

struct NetworkLine {
  std::string from;
  std::string to;
  double reactance = 0.0;
  double capacity = 0.0;
};

struct NetworkSpec {
  std::vector<NetworkBus> buses;
  std::vector<NetworkLine> lines;
  std::string reference_bus;
  std::map<std::string, std::string> unit_bus;  // unit id -> bus id
};

struct SolverConfig {
  int combination_cap = 64;
  long max_iterations = 200000;
  double feas_tol = 1e-6;
  double pivot_tol = 1e-9;
  double big_m = 0.0;    // <= 0 selects the per-group default
  double epsilon = 0.0;  // <= 0 selects the per-group default
};

// Inputs of the per-period symmetric comparison model: fractional budgets in
// [0,1] per unit and period, and optional mean-price overrides per session
// and stream (otherwise mean = median + (pos_dev - neg_dev) / 2).
struct Baseline23Config {
  std::map<std::string, std::vector<double>> gamma_per_period;
  std::map<std::string, std::map<std::string, std::vector<double>>> mean_prices;
};

struct CaseConfig {
  std::vector<NdResUnit> ndres;
  std::vector<StuUnit> stu;
  std::vector<FlexDemandUnit> demands;
  std::vector<MarketSessionSpec> sessions;  // pipeline order
  std::map<std::string, BudgetSet> budgets; // session name -> budgets
  std::optional<NetworkSpec> network;
  SolverConfig solver;
  Baseline23Config baseline23;

  const MarketSessionSpec* find_session(const std::string& name) const;
  BudgetSet budgets_for(const std::string& session) const;
  double total_generation_capacity() const;  // sum of ND-RES and STU p_max
  double total_demand_capacity() const;      // sum of demand p_max
};

// Error raised by configuration loading; `path()` names the offending field
// as a dotted config path, or file:line for CSV and JSON syntax trouble.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Parse a config file (JSON; series inline or as CSV files with header
// `t,median,pos_dev,neg_dev`, t 1-based, resolved relative to the config).
CaseConfig load_case(const std::string& path);

struct ValidationFinding {
  bool error = false;  // blocking when true, advisory otherwise
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool ok() const {
    for (const auto& f : findings)
      if (f.error) return false;
    return true;
  }
  std::string to_string() const;
};

// Semantic validation. Clamps oversized budgets in place (unit budgets to the
// positive-deviation period count of their session window, price budgets to
// the period count), reporting each clamp as a warning; a clamped config
// re-validates without new findings.
ValidationReport validate_case(CaseConfig& cfg);

// Periods t >= first_period (1-based) with strictly positive deviation.
int positive_deviation_count(const std::vector<double>& dev, int first_period = 1);

}  // namespace rvpp
