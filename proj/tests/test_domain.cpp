#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rvpp/domain.hpp"

using namespace rvpp;
namespace fs = std::filesystem;

namespace {

std::string write_file(const std::string& name, const std::string& content) {
  fs::create_directories("domain_tmp");
  const std::string path = "domain_tmp/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

const char* kMinimalConfig = R"({
  "sessions": [
    {"name": "DAM", "kind": "DAM_SRM", "periods": 2,
     "prices": {"da": {"series": [
       {"t": 1, "median": 50, "pos_dev": 5, "neg_dev": 5},
       {"t": 2, "median": 60, "pos_dev": 6, "neg_dev": 6}]}}}
  ],
  "fleet": {"ndres": [
    {"id": "w1", "p_max": 10, "op_cost": 2,
     "forecast": {"series": [
       {"t": 1, "median": 8, "neg_dev": 3},
       {"t": 2, "median": 6, "neg_dev": 2}]}}
  ]},
  "budgets": {"DAM": {"price": {"da": 1}, "units": {"w1": 1}}}
})";

CaseConfig load_minimal() {
  return load_case(write_file("minimal.json", kMinimalConfig));
}

std::string case_study_path() { return std::string(RVPP_DATA_DIR) + "/case_study.json"; }

// Single place asserting a load failure and inspecting the error path.
template <typename Fn>
ConfigError capture_error(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError("", "");
}

int count_errors(const ValidationReport& r) {
  int n = 0;
  for (const auto& f : r.findings) n += f.error ? 1 : 0;
  return n;
}

int count_warnings(const ValidationReport& r) {
  return static_cast<int>(r.findings.size()) - count_errors(r);
}

bool has_finding(const ValidationReport& r, bool error, const std::string& path_part) {
  for (const auto& f : r.findings)
    if (f.error == error && f.path.find(path_part) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal inline config loads with defaults filled in") {
  CaseConfig cfg = load_minimal();
  REQUIRE(cfg.sessions.size() == 1);
  const auto& s = cfg.sessions[0];
  CHECK(s.name == "DAM");
  CHECK(s.kind == SessionKind::dam_srm);
  CHECK(s.grid.period_count == 2);
  CHECK(s.grid.delta_t == 1.0);
  CHECK(s.grid.session_start == 1);
  CHECK(s.kappa == 0.0);
  CHECK(s.sr_action_time == 15.0);
  REQUIRE(s.rho.size() == 2);
  CHECK(s.rho[0] == 1.0);
  // reserve price streams default to zero bands when omitted
  REQUIRE(s.lambda_sr_up.periods() == 2);
  CHECK(s.lambda_sr_up.median[0] == 0.0);
  CHECK(s.lambda_da.median[1] == 60.0);
  CHECK(s.lambda_da.neg_dev[0] == 5.0);

  REQUIRE(cfg.ndres.size() == 1);
  const auto& u = cfg.ndres[0];
  CHECK(u.p_min == 0.0);
  CHECK(u.p_max == 10.0);
  CHECK(u.forecast.median[0] == 8.0);
  CHECK(u.forecast.pos_dev[0] == 0.0);  // omitted -> 0
  CHECK(u.forecast.neg_dev[1] == 2.0);
  CHECK(&u.band_for("DAM") == &u.forecast);

  CHECK(cfg.budgets_for("DAM").price.da == 1.0);
  CHECK(cfg.budgets_for("DAM").unit.at("w1") == 1.0);
  CHECK(cfg.budgets_for("nope").price.da == 0.0);

  ValidationReport report = validate_case(cfg);
  CHECK(report.ok());
  CHECK(report.findings.empty());
}

TEST_CASE("case study fixture loads and validates cleanly") {
  CaseConfig cfg = load_case(case_study_path());
  REQUIRE(cfg.sessions.size() == 3);
  CHECK(cfg.sessions[0].kind == SessionKind::dam_srm);
  CHECK(cfg.sessions[1].kind == SessionKind::srm_idm1);
  CHECK(cfg.sessions[1].idm_index == 1);
  CHECK(cfg.sessions[2].kind == SessionKind::idm_k);
  CHECK(cfg.sessions[2].idm_index == 4);
  CHECK(cfg.sessions[2].grid.session_start == 13);
  for (const auto& s : cfg.sessions) CHECK(s.grid.period_count == 24);

  REQUIRE(cfg.ndres.size() == 2);
  REQUIRE(cfg.stu.size() == 1);
  REQUIRE(cfg.demands.size() == 1);
  CHECK(cfg.total_generation_capacity() == 150.0);
  CHECK(cfg.total_demand_capacity() == 30.0);
  CHECK(cfg.stu[0].pb_efficiency == 0.4);
  CHECK(cfg.stu[0].storage_capacity == 1100.0);
  REQUIRE(cfg.demands[0].profiles.size() == 3);
  CHECK(cfg.demands[0].min_daily_energy == 360.0);
  CHECK(cfg.demands[0].flex_up == std::vector<double>(24, 0.1));

  // updated forecasts narrow the band but keep the median
  const auto& wind = cfg.ndres[0];
  const auto& updated = wind.band_for("IDM4");
  CHECK(&updated != &wind.forecast);
  CHECK(updated.median == wind.forecast.median);
  CHECK(updated.neg_dev[0] == doctest::Approx(0.4 * wind.forecast.neg_dev[0]));

  // ten daylight periods carry a positive solar deviation
  CHECK(positive_deviation_count(cfg.ndres[1].forecast.neg_dev) == 10);
  CHECK(positive_deviation_count(cfg.ndres[0].forecast.neg_dev) == 24);

  ValidationReport report = validate_case(cfg);
  CHECK(report.ok());
  CHECK(report.findings.empty());
}

TEST_CASE("series length mismatch is a load error naming the series") {
  std::string bad = kMinimalConfig;
  // drop the second forecast entry: band length 1 against a 2-period grid
  const std::string needle = ",\n       {\"t\": 2, \"median\": 6, \"neg_dev\": 2}";
  auto pos = bad.find(needle);
  REQUIRE(pos != std::string::npos);
  bad.erase(pos, needle.size());
  auto err = capture_error([&] { load_case(write_file("short_series.json", bad)); });
  CHECK(err.path().find("fleet.ndres[0].forecast") != std::string::npos);
  CHECK(std::string(err.what()).find("1 periods, expected 2") != std::string::npos);
}

TEST_CASE("csv series round trip") {
  write_file("band.csv",
             "t,median,pos_dev,neg_dev\n"
             "1,8.5,1.25,3\n"
             "2,6,0,2\n");
  std::string cfg_json = R"({
    "sessions": [{"name": "DAM", "kind": "DAM_SRM", "periods": 2,
      "prices": {"da": {"csv": "band.csv"}}}],
    "fleet": {"ndres": [{"id": "w1", "p_max": 10, "forecast": {"csv": "band.csv"}}]}
  })";
  CaseConfig cfg = load_case(write_file("csv_cfg.json", cfg_json));
  CHECK(cfg.ndres[0].forecast.median[0] == 8.5);
  CHECK(cfg.ndres[0].forecast.pos_dev[0] == 1.25);
  CHECK(cfg.ndres[0].forecast.neg_dev[1] == 2.0);
  CHECK(cfg.sessions[0].lambda_da.median[1] == 6.0);
}

TEST_CASE("csv format errors carry file and line") {
  auto cfg_with = [&](const std::string& csv_body) {
    write_file("bad.csv", csv_body);
    std::string cfg_json = R"({
      "sessions": [{"name": "DAM", "kind": "DAM_SRM", "periods": 2,
        "prices": {"da": {"csv": "bad.csv"}}}],
      "fleet": {}
    })";
    return write_file("bad_csv_cfg.json", cfg_json);
  };

  SUBCASE("wrong header") {
    auto err = capture_error([&] { load_case(cfg_with("time,median,up,down\n1,1,0,0\n")); });
    CHECK(err.path().find("bad.csv:1") != std::string::npos);
    CHECK(std::string(err.what()).find("t,median,pos_dev,neg_dev") != std::string::npos);
  }
  SUBCASE("wrong period order") {
    auto err = capture_error(
        [&] { load_case(cfg_with("t,median,pos_dev,neg_dev\n1,1,0,0\n3,1,0,0\n")); });
    CHECK(err.path().find("bad.csv:3") != std::string::npos);
    CHECK(std::string(err.what()).find("expected t=2") != std::string::npos);
  }
  SUBCASE("non-numeric field") {
    auto err = capture_error(
        [&] { load_case(cfg_with("t,median,pos_dev,neg_dev\n1,abc,0,0\n")); });
    CHECK(err.path().find("bad.csv:2") != std::string::npos);
    CHECK(std::string(err.what()).find("not a number") != std::string::npos);
  }
  SUBCASE("missing fields") {
    auto err =
        capture_error([&] { load_case(cfg_with("t,median,pos_dev,neg_dev\n1,1,0\n")); });
    CHECK(err.path().find("bad.csv:2") != std::string::npos);
  }
}

TEST_CASE("structural load errors") {
  SUBCASE("unreadable file") {
    auto err = capture_error([&] { load_case("domain_tmp/does_not_exist.json"); });
    CHECK(std::string(err.what()).find("cannot open") != std::string::npos);
  }
  SUBCASE("json syntax error") {
    auto path = write_file("syntax.json", "{ not json");
    auto err = capture_error([&] { load_case(path); });
    CHECK(err.path() == path);
    CHECK(std::string(err.what()).find("JSON parse error") != std::string::npos);
  }
  SUBCASE("missing price stream") {
    std::string cfg = R"({"sessions": [{"name": "A", "kind": "DAM_SRM", "periods": 1,
      "prices": {}}], "fleet": {}})";
    auto err = capture_error([&] { load_case(write_file("noprices.json", cfg)); });
    CHECK(std::string(err.what()).find("missing required price stream 'da'") != std::string::npos);
  }
  SUBCASE("unknown session kind") {
    std::string cfg = R"({"sessions": [{"name": "A", "kind": "SPOT", "periods": 1,
      "prices": {}}], "fleet": {}})";
    auto err = capture_error([&] { load_case(write_file("badkind.json", cfg)); });
    CHECK(err.path().find("sessions[0].kind") != std::string::npos);
    CHECK(std::string(err.what()).find("SPOT") != std::string::npos);
  }
  SUBCASE("duplicate unit ids") {
    std::string cfg = R"({
      "sessions": [{"name": "A", "kind": "DAM_SRM", "periods": 1,
        "prices": {"da": {"series": [{"t": 1, "median": 1}]}}}],
      "fleet": {"ndres": [
        {"id": "u", "p_max": 1, "forecast": {"series": [{"t": 1, "median": 1}]}},
        {"id": "u", "p_max": 1, "forecast": {"series": [{"t": 1, "median": 1}]}}]}
    })";
    auto err = capture_error([&] { load_case(write_file("dupunit.json", cfg)); });
    CHECK(std::string(err.what()).find("duplicate unit id 'u'") != std::string::npos);
  }
  SUBCASE("forecast update for unknown session") {
    std::string cfg = R"({
      "sessions": [{"name": "A", "kind": "DAM_SRM", "periods": 1,
        "prices": {"da": {"series": [{"t": 1, "median": 1}]}}}],
      "fleet": {"ndres": [
        {"id": "u", "p_max": 1, "forecast": {"series": [{"t": 1, "median": 1}]},
         "forecast_updates": {"IDM9": {"series": [{"t": 1, "median": 1}]}}}]}
    })";
    auto err = capture_error([&] { load_case(write_file("badupdate.json", cfg)); });
    CHECK(err.path().find("forecast_updates.IDM9") != std::string::npos);
  }
  SUBCASE("missing required field names the path") {
    std::string cfg = R"({"sessions": [{"name": "A", "kind": "DAM_SRM",
      "prices": {}}], "fleet": {}})";
    auto err = capture_error([&] { load_case(write_file("noperiods.json", cfg)); });
    CHECK(std::string(err.what()).find("'periods'") != std::string::npos);
  }
}

TEST_CASE("reserve share outside [0,1] is a blocking error") {
  CaseConfig cfg = load_case(case_study_path());
  cfg.sessions[0].kappa = 1.2;
  ValidationReport report = validate_case(cfg);
  CHECK(!report.ok());
  CHECK(has_finding(report, true, "kappa"));
}

TEST_CASE("unit budget clamps to the positive-deviation period count") {
  CaseConfig cfg = load_case(case_study_path());
  cfg.budgets["DAM_SRM"].unit["solar"] = 15;  // solar deviates in 10 periods only
  ValidationReport report = validate_case(cfg);
  CHECK(report.ok());
  CHECK(count_warnings(report) == 1);
  CHECK(has_finding(report, false, "budgets.DAM_SRM.units.solar"));
  CHECK(report.findings[0].message.find("clamped to 10") != std::string::npos);
  CHECK(cfg.budgets["DAM_SRM"].unit["solar"] == 10.0);

  // clamping is idempotent: a second pass is silent
  ValidationReport again = validate_case(cfg);
  CHECK(again.findings.empty());
}

TEST_CASE("intraday unit budgets count only the session window") {
  CaseConfig cfg = load_case(case_study_path());
  // IDM4 trades from t=13; the updated solar band deviates at t=13..18 only
  CHECK(positive_deviation_count(cfg.ndres[1].band_for("IDM4").neg_dev, 13) == 6);
  cfg.budgets["IDM4"].unit["solar"] = 9;
  ValidationReport report = validate_case(cfg);
  CHECK(report.ok());
  CHECK(cfg.budgets["IDM4"].unit["solar"] == 6.0);
  CHECK(has_finding(report, false, "budgets.IDM4.units.solar"));
}

TEST_CASE("all-zero deviations with zero budgets validate silently") {
  std::string cfg_json = R"({
    "sessions": [{"name": "DAM", "kind": "DAM_SRM", "periods": 2,
      "prices": {"da": {"series": [{"t": 1, "median": 50}, {"t": 2, "median": 60}]}}}],
    "fleet": {
      "ndres": [{"id": "w1", "p_max": 10,
        "forecast": {"series": [{"t": 1, "median": 8}, {"t": 2, "median": 6}]}}],
      "demands": [{"id": "d1", "p_max": 5, "profiles": [
        {"cost": 0, "band": {"series": [{"t": 1, "median": 3}, {"t": 2, "median": 3}]}}]}]
    },
    "budgets": {"DAM": {"price": {"da": 0}, "units": {"w1": 0, "d1": 0}}}
  })";
  CaseConfig cfg = load_case(write_file("allzero.json", cfg_json));
  ValidationReport report = validate_case(cfg);
  CHECK(report.findings.empty());
}

TEST_CASE("priced buying needs upward price room") {
  // same fleet, but now the day-ahead price budget is positive while the
  // price band has no upper width: with a demand aboard the trade can go
  // negative and the worst buying price would be unbounded
  std::string cfg_json = R"({
    "sessions": [{"name": "DAM", "kind": "DAM_SRM", "periods": 2,
      "prices": {"da": {"series": [{"t": 1, "median": 50, "neg_dev": 5},
                                    {"t": 2, "median": 60, "neg_dev": 5}]}}}],
    "fleet": {
      "ndres": [{"id": "w1", "p_max": 10,
        "forecast": {"series": [{"t": 1, "median": 8}, {"t": 2, "median": 6}]}}],
      "demands": [{"id": "d1", "p_max": 5, "profiles": [
        {"cost": 0, "band": {"series": [{"t": 1, "median": 3}, {"t": 2, "median": 3}]}}]}]
    },
    "budgets": {"DAM": {"price": {"da": 1}}}
  })";
  CaseConfig cfg = load_case(write_file("budge.json", cfg_json));
  ValidationReport report = validate_case(cfg);
  CHECK(!report.ok());
  CHECK(has_finding(report, true, "prices.da"));

  // without the demand the plant can only sell and the config is fine
  cfg.demands.clear();
  ValidationReport no_demand = validate_case(cfg);
  CHECK(no_demand.findings.empty());
}

TEST_CASE("session chain shape is enforced") {
  CaseConfig cfg = load_case(case_study_path());

  SUBCASE("intraday index must increase") {
    cfg.sessions[2].idm_index = 1;
    ValidationReport report = validate_case(cfg);
    CHECK(has_finding(report, true, "IDM4"));
  }
  SUBCASE("first session must be the day-ahead one") {
    std::swap(cfg.sessions[0], cfg.sessions[1]);
    ValidationReport report = validate_case(cfg);
    CHECK(!report.ok());
  }
  SUBCASE("session start must lie inside the horizon") {
    cfg.sessions[2].grid.session_start = 25;
    ValidationReport report = validate_case(cfg);
    CHECK(has_finding(report, true, "session_start"));
  }
  SUBCASE("horizons must match across sessions") {
    cfg.sessions[2].grid.period_count = 23;
    ValidationReport report = validate_case(cfg);
    CHECK(has_finding(report, true, "periods"));
  }
}

TEST_CASE("band and unit invariants") {
  CaseConfig cfg = load_case(case_study_path());

  SUBCASE("production band may not dip below zero") {
    cfg.ndres[0].forecast.neg_dev[3] = cfg.ndres[0].forecast.median[3] + 1.0;
    ValidationReport report = validate_case(cfg);
    CHECK(has_finding(report, true, "ndres[0]"));
    CHECK(report.findings[0].message.find("t=4") != std::string::npos);
  }
  SUBCASE("negative deviation widths are rejected") {
    cfg.stu[0].solar_field_forecast.pos_dev[0] = -1.0;
    ValidationReport report = validate_case(cfg);
    CHECK(has_finding(report, true, "stu[0]"));
  }
  SUBCASE("power block efficiency in (0,1]") {
    cfg.stu[0].pb_efficiency = 1.5;
    CHECK(has_finding(validate_case(cfg), true, "pb_efficiency"));
    cfg.stu[0].pb_efficiency = 0.0;
    CHECK(has_finding(validate_case(cfg), true, "pb_efficiency"));
  }
  SUBCASE("initial storage within capacity") {
    cfg.stu[0].initial_storage = 2000.0;
    CHECK(has_finding(validate_case(cfg), true, "initial_storage"));
  }
  SUBCASE("flexibility fractions in [0,1]") {
    cfg.demands[0].flex_up[5] = 1.5;
    CHECK(has_finding(validate_case(cfg), true, "flex_up"));
  }
  SUBCASE("demand needs at least one profile") {
    cfg.demands[0].profiles.clear();
    CHECK(has_finding(validate_case(cfg), true, "profiles"));
  }
  SUBCASE("reversed power bounds") {
    cfg.ndres[0].p_min = 60.0;
    CHECK(has_finding(validate_case(cfg), true, "ndres[0]"));
  }
}

TEST_CASE("budget bookkeeping") {
  CaseConfig cfg = load_case(case_study_path());

  SUBCASE("unknown session") {
    cfg.budgets["IDM7"] = BudgetSet{};
    CHECK(has_finding(validate_case(cfg), true, "budgets.IDM7"));
  }
  SUBCASE("unknown unit") {
    cfg.budgets["DAM_SRM"].unit["ghost"] = 1;
    CHECK(has_finding(validate_case(cfg), true, "units.ghost"));
  }
  SUBCASE("fractional unit budget") {
    cfg.budgets["DAM_SRM"].unit["wind"] = 1.5;
    ValidationReport report = validate_case(cfg);
    CHECK(has_finding(report, true, "units.wind"));
    CHECK(report.findings[0].message.find("integer") != std::string::npos);
  }
  SUBCASE("negative budgets") {
    cfg.budgets["DAM_SRM"].unit["wind"] = -1;
    cfg.budgets["DAM_SRM"].price.da = -0.5;
    ValidationReport report = validate_case(cfg);
    CHECK(count_errors(report) == 2);
  }
  SUBCASE("price budget clamps to the horizon") {
    cfg.budgets["DAM_SRM"].price.da = 30;
    ValidationReport report = validate_case(cfg);
    CHECK(report.ok());
    CHECK(cfg.budgets["DAM_SRM"].price.da == 24.0);
    CHECK(has_finding(report, false, "price.da"));
    CHECK(validate_case(cfg).findings.empty());
  }
  SUBCASE("demand budgets outside the day-ahead session are flagged") {
    cfg.budgets["SRM_IDM1"].unit["load"] = 1;
    ValidationReport report = validate_case(cfg);
    CHECK(report.ok());
    CHECK(has_finding(report, false, "units.load"));
  }
}

TEST_CASE("demand budget counts periods where every profile deviates") {
  // profile A deviates at t=1,2; profile B at t=2,3: only t=2 is certain
  std::string cfg_json = R"({
    "sessions": [{"name": "DAM", "kind": "DAM_SRM", "periods": 3,
      "prices": {"da": {"series": [{"t": 1, "median": 50, "pos_dev": 1},
                                    {"t": 2, "median": 60, "pos_dev": 1},
                                    {"t": 3, "median": 55, "pos_dev": 1}]}}}],
    "fleet": {"demands": [{"id": "d1", "p_max": 5, "profiles": [
      {"cost": 0, "band": {"series": [{"t": 1, "median": 3, "pos_dev": 1},
                                       {"t": 2, "median": 3, "pos_dev": 1},
                                       {"t": 3, "median": 3}]}},
      {"cost": 1, "band": {"series": [{"t": 1, "median": 4},
                                       {"t": 2, "median": 4, "pos_dev": 1},
                                       {"t": 3, "median": 4, "pos_dev": 1}]}}]}]},
    "budgets": {"DAM": {"units": {"d1": 2}}}
  })";
  CaseConfig cfg = load_case(write_file("dclamp.json", cfg_json));
  ValidationReport report = validate_case(cfg);
  CHECK(report.ok());
  CHECK(cfg.budgets["DAM"].unit["d1"] == 1.0);
  CHECK(has_finding(report, false, "units.d1"));
}

TEST_CASE("network validation") {
  CaseConfig cfg = load_case(case_study_path());
  NetworkSpec net;
  net.buses = {{"b1", true}, {"b2", false}};
  net.lines = {{"b1", "b2", 0.1, 100.0}};
  net.reference_bus = "b1";
  net.unit_bus = {{"wind", "b1"}, {"solar", "b2"}, {"stu", "b1"}, {"load", "b2"}};
  cfg.network = net;

  SUBCASE("well formed network passes") {
    CHECK(validate_case(cfg).findings.empty());
  }
  SUBCASE("reference bus must exist") {
    cfg.network->reference_bus = "b9";
    CHECK(has_finding(validate_case(cfg), true, "reference_bus"));
  }
  SUBCASE("every unit needs a bus") {
    cfg.network->unit_bus.erase("stu");
    ValidationReport report = validate_case(cfg);
    CHECK(has_finding(report, true, "unit_bus"));
    CHECK(report.findings[0].message.find("stu") != std::string::npos);
  }
  SUBCASE("line endpoints and reactance") {
    cfg.network->lines[0].to = "b9";
    cfg.network->lines[0].reactance = 0.0;
    ValidationReport report = validate_case(cfg);
    CHECK(count_errors(report) == 2);
  }
  SUBCASE("a main subregion bus is required") {
    cfg.network->buses[0].main_subregion = false;
    CHECK(has_finding(validate_case(cfg), true, "buses"));
  }
  SUBCASE("mapping an unknown unit") {
    cfg.network->unit_bus["ghost"] = "b1";
    CHECK(has_finding(validate_case(cfg), true, "unit_bus.ghost"));
  }
}

TEST_CASE("per-period comparison budgets are range checked") {
  CaseConfig cfg = load_case(case_study_path());
  SUBCASE("fixture values pass") {
    CHECK(validate_case(cfg).findings.empty());
  }
  SUBCASE("fraction above one") {
    cfg.baseline23.gamma_per_period["wind"][3] = 1.2;
    CHECK(has_finding(validate_case(cfg), true, "gamma_per_period.wind"));
  }
  SUBCASE("unknown unit") {
    cfg.baseline23.gamma_per_period["ghost"] = std::vector<double>(24, 0.1);
    CHECK(has_finding(validate_case(cfg), true, "gamma_per_period.ghost"));
  }
  SUBCASE("unknown mean price stream") {
    cfg.baseline23.mean_prices["DAM_SRM"]["spot"] = std::vector<double>(24, 50.0);
    CHECK(has_finding(validate_case(cfg), true, "mean_prices.DAM_SRM.spot"));
  }
}

TEST_CASE("positive deviation window counting") {
  std::vector<double> dev = {1.0, 0.0, 2.0, 3.0, 0.0};
  CHECK(positive_deviation_count(dev) == 3);
  CHECK(positive_deviation_count(dev, 2) == 2);
  CHECK(positive_deviation_count(dev, 4) == 1);
  CHECK(positive_deviation_count(dev, 6) == 0);
  CHECK(positive_deviation_count({}) == 0);
}

TEST_CASE("validation report rendering") {
  CaseConfig cfg = load_minimal();
  cfg.sessions[0].kappa = -0.5;
  cfg.budgets["DAM"].price.da = 3.0;
  ValidationReport report = validate_case(cfg);
  const std::string text = report.to_string();
  CHECK(text.find("error") != std::string::npos);
  CHECK(text.find("warning") != std::string::npos);
  CHECK(text.find("kappa") != std::string::npos);
}
