#pragma once

#include <string>
#include <vector>

#include "rvpp/model_ir.hpp"

namespace rvpp {

struct RobustGroupRefs {
  std::vector<int> chi, y, eta;
  int v = -1;
};

// Shared defaults for the linearization constants: big_m must dominate every
// v + eta value (2 * max deviation + 1 suffices), epsilon only has to separate
// eta from zero on active periods (scaled so it stays below any real gap).
double default_big_m(const std::vector<double>& deviations);
double default_epsilon(const std::vector<double>& deviations);

// Worst-case machinery for a production-side band: adds the chi/y/v/eta
// variables, the activation rows, and the budget row, and registers the group
// on the model. The caller owns the cap rows that consume y (production caps
// carry +y on their left side). big_m/epsilon <= 0 selects the defaults.
RobustGroupRefs add_production_robust_group(ModelIR& model, const std::string& id,
                                            const std::vector<double>& deviations,
                                            double budget, double big_m = 0.0,
                                            double epsilon = 0.0);

// Demand-side variant: deviations depend on which profile selector is chosen,
// so the bound rows couple y and v/eta to the selected profile's deviation.
// The caller owns the scheduling row that consumes y (consumption = profile
// median + y).
RobustGroupRefs add_demand_robust_group(ModelIR& model, const std::string& id,
                                        const std::vector<int>& profile_vars,
                                        const std::vector<std::vector<double>>& profile_deviations,
                                        double budget, double big_m = 0.0,
                                        double epsilon = 0.0);

}  // namespace rvpp
