#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvpp/domain.hpp"
#include "rvpp/sequence.hpp"

namespace rvpp {

class AssessmentError : public std::runtime_error {
 public:
  explicit AssessmentError(const std::string& message) : std::runtime_error(message) {}
};

// How band realizations are drawn. three_point picks the band edges and the
// median with the configured probabilities; weibull draws a shape-k variate
// whose [1%, 99%] quantile range is mapped affinely onto the band and clamped.
enum class ScenarioDistribution { three_point, weibull };

struct ScenarioGenSpec {
  int count = 1000;
  std::uint64_t seed = 1;
  ScenarioDistribution distribution = ScenarioDistribution::three_point;
  double p_low = 1.0 / 3.0;  // three_point branch probabilities, must sum to 1
  double p_mid = 1.0 / 3.0;
  double p_high = 1.0 / 3.0;
  double weibull_shape = 2.0;
};

// One realization per sampled band, keyed like the generating band set.
struct Scenario {
  std::map<std::string, std::vector<double>> series;
};

// Band keys: "unit.<id>" is the availability of an ND-RES unit (solar field
// thermal output for a storage unit) under its most recent forecast,
// "demand.<id>.<k>" the load of profile k, "price.<session>.<stream>" a price
// stream. Draws are deterministic in (spec.seed, spec.count): one uniform per
// band and period, bands in key order, periods ascending.
struct ScenarioSet {
  std::map<std::string, ForecastBand> bands;
  std::vector<Scenario> draws;
  int periods = 0;

  // every draw lies inside its generating band
  bool contained(double tol = 1e-9) const;
};

ScenarioSet generate_scenarios(const CaseConfig& cfg, const ScenarioGenSpec& spec);

struct AssessmentOptions {
  double imbalance_penalty = 1000.0;  // currency per MWh of worst-state imbalance
};

// Averages are plain sums in draw order divided by the count, so results are
// bit-for-bit reproducible for a fixed scenario set.
struct AssessmentResult {
  std::vector<double> profit;   // per scenario: income - operating cost - profile cost
  std::vector<double> penalty;  // per scenario: imbalance penalty cost
  double average_profit = 0.0;
  double average_penalty = 0.0;
  double net_average() const { return average_profit - average_penalty; }
};

// Re-dispatches the fleet for every scenario with the committed positions
// fixed and prices realized. Per period, one nonnegative slack absorbs the
// worst imbalance across the three activation states and is charged the
// penalty; the recourse dispatch minimizes operating cost plus penalties.
// Throws AssessmentError when a recourse model cannot be solved at all.
AssessmentResult out_of_sample_evaluate(const CaseConfig& cfg, const StarredResults& positions,
                                        const ScenarioSet& scenarios,
                                        const AssessmentOptions& opts = {});

enum class SweepDimension { energy, price, price_energy };

struct SweepSpec {
  SweepDimension which = SweepDimension::energy;
  std::vector<double> grid;  // budget values, ascending; energy budgets integral
  BuildMode mode = BuildMode::proposed;
};

struct SweepPoint {
  double budget = 0.0;
  double objective = 0.0;
  ObjectiveBreakdown breakdown;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  bool monotone = true;  // objective non-increasing along the grid
};

// Re-solves the pipeline's first session with every unit budget (energy),
// every traded price budget (price), or both (price_energy) set to each grid
// value; budgets are clamped exactly as validation clamps them, so curves
// saturate once a budget covers every deviating period. Aborts on any
// non-optimal solve.
SweepResult sweep_budgets(const CaseConfig& cfg, const SweepSpec& spec);

// Scheduled power that the forecast band cannot guarantee: per period,
// max(0, sourced - (median - neg_dev)) summed over generation units, where
// sourced is unit production (solar-field heat for storage units).
struct InfeasibilityProfile {
  std::vector<double> per_period;
  double total() const;
  double worst_sum(int k) const;  // sum of the k largest periods
};

InfeasibilityProfile possible_infeasibility(const CaseConfig& cfg, const SessionResult& result);

// Plot tables. assessment_csv: `scenario,profit,penalty`; sweep_csv:
// `budget,objective`; histogram_csv: `bin_lo,bin_hi,count` with
// Freedman-Diaconis bin widths.
std::string assessment_csv(const AssessmentResult& result);
std::string sweep_csv(const SweepResult& result);
std::string histogram_csv(const std::vector<double>& values);

}  // namespace rvpp
