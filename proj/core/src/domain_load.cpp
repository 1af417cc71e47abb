#include "rvpp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace rvpp {

std::string to_string(SessionKind kind) {
  switch (kind) {
    case SessionKind::dam_srm: return "DAM_SRM";
    case SessionKind::srm_idm1: return "SRM_IDM1";
    case SessionKind::idm_k: return "IDM_K";
  }
  return "?";
}

const MarketSessionSpec* CaseConfig::find_session(const std::string& name) const {
  for (const auto& s : sessions)
    if (s.name == name) return &s;
  return nullptr;
}

BudgetSet CaseConfig::budgets_for(const std::string& session) const {
  auto it = budgets.find(session);
  return it == budgets.end() ? BudgetSet{} : it->second;
}

double CaseConfig::total_generation_capacity() const {
  double cap = 0.0;
  for (const auto& u : ndres) cap += u.p_max;
  for (const auto& u : stu) cap += u.p_max;
  return cap;
}

double CaseConfig::total_demand_capacity() const {
  double cap = 0.0;
  for (const auto& u : demands) cap += u.p_max;
  return cap;
}

int positive_deviation_count(const std::vector<double>& dev, int first_period) {
  int count = 0;
  for (int t = std::max(first_period, 1); t <= static_cast<int>(dev.size()); ++t)
    if (dev[static_cast<size_t>(t - 1)] > 0.0) ++count;
  return count;
}

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path, msg);
}

std::string idx(const std::string& base, const char* key) { return base + "." + key; }

std::string idx(const std::string& base, const char* key, size_t i) {
  return base + "." + key + "[" + std::to_string(i) + "]";
}

const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const json* j = find(obj, key);
  if (!j) fail(path, std::string("missing required field '") + key + "'");
  return *j;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

double opt_number(const json& obj, const char* key, double fallback, const std::string& path) {
  const json* j = find(obj, key);
  return j ? as_number(*j, idx(path, key)) : fallback;
}

int opt_int(const json& obj, const char* key, int fallback, const std::string& path) {
  const json* j = find(obj, key);
  return j ? as_int(*j, idx(path, key)) : fallback;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  return out;
}

double csv_number(const std::string& field, const std::string& where) {
  try {
    size_t used = 0;
    double v = std::stod(field, &used);
    if (used != field.size()) fail(where, "'" + field + "' is not a number");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(where, "'" + field + "' is not a number");
  }
}

ForecastBand read_band_csv(const std::string& file, const std::string& band_path) {
  std::ifstream in(file);
  if (!in) fail(band_path, "cannot open CSV file '" + file + "'");
  std::string line;
  if (!std::getline(in, line)) fail(file + ":1", "empty CSV file");
  {
    auto fields = split_csv_line(line);
    const std::vector<std::string> expect = {"t", "median", "pos_dev", "neg_dev"};
    if (std::vector<std::string>(fields.begin(), fields.end()) != expect)
      fail(file + ":1", "expected header 't,median,pos_dev,neg_dev'");
  }
  ForecastBand band;
  int lineno = 1;
  int t_expected = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = file + ":" + std::to_string(lineno);
    auto fields = split_csv_line(line);
    if (fields.size() != 4) fail(where, "expected 4 comma-separated fields");
    int t = static_cast<int>(csv_number(fields[0], where));
    if (t != t_expected) fail(where, "expected t=" + std::to_string(t_expected) + ", got " + fields[0]);
    band.median.push_back(csv_number(fields[1], where));
    band.pos_dev.push_back(csv_number(fields[2], where));
    band.neg_dev.push_back(csv_number(fields[3], where));
    ++t_expected;
  }
  return band;
}

// A band is {"series": [{"t":1,"median":..,"pos_dev":..,"neg_dev":..}, ...]}
// or {"csv": "relative/path.csv"}. expect_periods > 0 pins the length.
ForecastBand parse_band(const json& j, const std::string& path, const std::string& dir,
                        int expect_periods) {
  if (!j.is_object()) fail(path, "expected an object with 'series' or 'csv'");
  ForecastBand band;
  if (const json* csv = find(j, "csv")) {
    band = read_band_csv(dir + "/" + as_string(*csv, idx(path, "csv")), path);
  } else if (const json* series = find(j, "series")) {
    if (!series->is_array()) fail(idx(path, "series"), "expected an array");
    int t_expected = 1;
    for (size_t k = 0; k < series->size(); ++k) {
      const json& e = (*series)[k];
      const std::string ep = idx(path, "series", k);
      if (!e.is_object()) fail(ep, "expected an object");
      int t = as_int(require(e, "t", ep), idx(ep, "t"));
      if (t != t_expected) fail(idx(ep, "t"), "expected t=" + std::to_string(t_expected));
      band.median.push_back(as_number(require(e, "median", ep), idx(ep, "median")));
      band.pos_dev.push_back(opt_number(e, "pos_dev", 0.0, ep));
      band.neg_dev.push_back(opt_number(e, "neg_dev", 0.0, ep));
      ++t_expected;
    }
  } else {
    fail(path, "band needs either 'series' or 'csv'");
  }
  if (expect_periods > 0 && band.periods() != expect_periods)
    fail(path, "series has " + std::to_string(band.periods()) + " periods, expected " +
                   std::to_string(expect_periods));
  return band;
}

// Accepts a scalar (replicated) or an array of exactly `periods` numbers.
std::vector<double> expand_series(const json& j, int periods, const std::string& path) {
  if (j.is_number()) return std::vector<double>(static_cast<size_t>(periods), j.get<double>());
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != periods)
      fail(path, "expected " + std::to_string(periods) + " values, got " + std::to_string(j.size()));
    std::vector<double> out;
    out.reserve(j.size());
    for (size_t k = 0; k < j.size(); ++k) out.push_back(as_number(j[k], path + "[" + std::to_string(k) + "]"));
    return out;
  }
  fail(path, "expected a number or an array of numbers");
}

SessionKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "DAM_SRM") return SessionKind::dam_srm;
  if (s == "SRM_IDM1") return SessionKind::srm_idm1;
  if (s == "IDM_K") return SessionKind::idm_k;
  fail(path, "unknown session kind '" + s + "' (expected DAM_SRM, SRM_IDM1 or IDM_K)");
}

MarketSessionSpec parse_session(const json& j, const std::string& path, const std::string& dir) {
  MarketSessionSpec s;
  s.name = as_string(require(j, "name", path), idx(path, "name"));
  s.kind = parse_kind(as_string(require(j, "kind", path), idx(path, "kind")), idx(path, "kind"));
  if (s.kind == SessionKind::idm_k)
    s.idm_index = as_int(require(j, "idm_index", path), idx(path, "idm_index"));
  else if (s.kind == SessionKind::srm_idm1)
    s.idm_index = 1;
  s.grid.period_count = as_int(require(j, "periods", path), idx(path, "periods"));
  if (s.grid.period_count < 1) fail(idx(path, "periods"), "must be at least 1");
  s.grid.delta_t = opt_number(j, "delta_t", 1.0, path);
  s.grid.session_start = opt_int(j, "session_start", 1, path);
  s.kappa = opt_number(j, "kappa", 0.0, path);
  s.sr_action_time = opt_number(j, "sr_action_time", 15.0, path);
  const int T = s.grid.period_count;
  if (const json* rho = find(j, "rho"))
    s.rho = expand_series(*rho, T, idx(path, "rho"));
  else
    s.rho = std::vector<double>(static_cast<size_t>(T), 1.0);

  const json& prices = require(j, "prices", path);
  const std::string pp = idx(path, "prices");
  auto band = [&](const char* key, bool required) {
    const json* b = find(prices, key);
    if (!b) {
      if (required) fail(pp, std::string("missing required price stream '") + key + "'");
      // absent optional reserve stream: zero band
      ForecastBand z;
      z.median.assign(static_cast<size_t>(T), 0.0);
      z.pos_dev.assign(static_cast<size_t>(T), 0.0);
      z.neg_dev.assign(static_cast<size_t>(T), 0.0);
      return z;
    }
    return parse_band(*b, idx(pp, key), dir, T);
  };
  if (s.has_dam()) s.lambda_da = band("da", true);
  if (s.has_srm()) {
    s.lambda_sr_up = band("sr_up", false);
    s.lambda_sr_down = band("sr_down", false);
  }
  if (s.has_idm()) s.lambda_id = band("id", true);
  return s;
}

void parse_forecast_updates(const json& j, const std::string& path, const std::string& dir,
                            const std::vector<MarketSessionSpec>& sessions,
                            std::map<std::string, ForecastBand>& out) {
  if (!j.is_object()) fail(path, "expected an object mapping session name to band");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string ep = path + "." + it.key();
    const MarketSessionSpec* s = nullptr;
    for (const auto& cand : sessions)
      if (cand.name == it.key()) s = &cand;
    if (!s) fail(ep, "references unknown session '" + it.key() + "'");
    out[it.key()] = parse_band(it.value(), ep, dir, s->grid.period_count);
  }
}

NdResUnit parse_ndres(const json& j, const std::string& path, const std::string& dir,
                      const std::vector<MarketSessionSpec>& sessions, int periods) {
  NdResUnit u;
  u.id = as_string(require(j, "id", path), idx(path, "id"));
  u.p_min = opt_number(j, "p_min", 0.0, path);
  u.p_max = as_number(require(j, "p_max", path), idx(path, "p_max"));
  u.op_cost = opt_number(j, "op_cost", 0.0, path);
  u.sr_ramp_up = opt_number(j, "sr_ramp_up", 0.0, path);
  u.sr_ramp_down = opt_number(j, "sr_ramp_down", 0.0, path);
  u.forecast = parse_band(require(j, "forecast", path), idx(path, "forecast"), dir, periods);
  if (const json* upd = find(j, "forecast_updates"))
    parse_forecast_updates(*upd, idx(path, "forecast_updates"), dir, sessions, u.forecast_updates);
  return u;
}

StuUnit parse_stu(const json& j, const std::string& path, const std::string& dir,
                  const std::vector<MarketSessionSpec>& sessions, int periods) {
  StuUnit u;
  u.id = as_string(require(j, "id", path), idx(path, "id"));
  u.p_min = opt_number(j, "p_min", 0.0, path);
  u.p_max = as_number(require(j, "p_max", path), idx(path, "p_max"));
  u.op_cost = opt_number(j, "op_cost", 0.0, path);
  u.storage_capacity = as_number(require(j, "storage_capacity", path), idx(path, "storage_capacity"));
  u.initial_storage = opt_number(j, "initial_storage", 0.0, path);
  u.pb_efficiency = as_number(require(j, "pb_efficiency", path), idx(path, "pb_efficiency"));
  u.sr_ramp_up = opt_number(j, "sr_ramp_up", 0.0, path);
  u.sr_ramp_down = opt_number(j, "sr_ramp_down", 0.0, path);
  u.solar_field_forecast = parse_band(require(j, "solar_field_forecast", path),
                                      idx(path, "solar_field_forecast"), dir, periods);
  if (const json* upd = find(j, "forecast_updates"))
    parse_forecast_updates(*upd, idx(path, "forecast_updates"), dir, sessions, u.forecast_updates);
  return u;
}

FlexDemandUnit parse_demand(const json& j, const std::string& path, const std::string& dir,
                            int periods) {
  FlexDemandUnit u;
  u.id = as_string(require(j, "id", path), idx(path, "id"));
  u.p_min = opt_number(j, "p_min", 0.0, path);
  u.p_max = as_number(require(j, "p_max", path), idx(path, "p_max"));
  u.ramp_up = opt_number(j, "ramp_up", 0.0, path);
  u.ramp_down = opt_number(j, "ramp_down", 0.0, path);
  u.sr_ramp_up = opt_number(j, "sr_ramp_up", 0.0, path);
  u.sr_ramp_down = opt_number(j, "sr_ramp_down", 0.0, path);
  u.min_daily_energy = opt_number(j, "min_daily_energy", 0.0, path);
  if (const json* f = find(j, "flex_up"))
    u.flex_up = expand_series(*f, periods, idx(path, "flex_up"));
  else
    u.flex_up.assign(static_cast<size_t>(periods), 0.0);
  if (const json* f = find(j, "flex_down"))
    u.flex_down = expand_series(*f, periods, idx(path, "flex_down"));
  else
    u.flex_down.assign(static_cast<size_t>(periods), 0.0);
  const json& profiles = require(j, "profiles", path);
  if (!profiles.is_array()) fail(idx(path, "profiles"), "expected an array");
  for (size_t k = 0; k < profiles.size(); ++k) {
    const std::string ep = idx(path, "profiles", k);
    const json& e = profiles[k];
    if (!e.is_object()) fail(ep, "expected an object");
    DemandProfile p;
    p.cost = opt_number(e, "cost", 0.0, ep);
    p.band = parse_band(require(e, "band", ep), idx(ep, "band"), dir, periods);
    u.profiles.push_back(std::move(p));
  }
  return u;
}

BudgetSet parse_budget_set(const json& j, const std::string& path) {
  BudgetSet b;
  if (const json* price = find(j, "price")) {
    const std::string pp = idx(path, "price");
    b.price.da = opt_number(*price, "da", 0.0, pp);
    b.price.sr_up = opt_number(*price, "sr_up", 0.0, pp);
    b.price.sr_down = opt_number(*price, "sr_down", 0.0, pp);
    b.price.id = opt_number(*price, "id", 0.0, pp);
  }
  if (const json* units = find(j, "units")) {
    if (!units->is_object()) fail(idx(path, "units"), "expected an object");
    for (auto it = units->begin(); it != units->end(); ++it)
      b.unit[it.key()] = as_number(it.value(), idx(path, "units") + "." + it.key());
  }
  return b;
}

NetworkSpec parse_network(const json& j, const std::string& path) {
  NetworkSpec n;
  const json& buses = require(j, "buses", path);
  if (!buses.is_array()) fail(idx(path, "buses"), "expected an array");
  for (size_t k = 0; k < buses.size(); ++k) {
    const std::string ep = idx(path, "buses", k);
    NetworkBus b;
    b.id = as_string(require(buses[k], "id", ep), idx(ep, "id"));
    if (const json* m = find(buses[k], "main")) b.main_subregion = as_bool(*m, idx(ep, "main"));
    n.buses.push_back(std::move(b));
  }
  if (const json* lines = find(j, "lines")) {
    if (!lines->is_array()) fail(idx(path, "lines"), "expected an array");
    for (size_t k = 0; k < lines->size(); ++k) {
      const std::string ep = idx(path, "lines", k);
      NetworkLine l;
      l.from = as_string(require((*lines)[k], "from", ep), idx(ep, "from"));
      l.to = as_string(require((*lines)[k], "to", ep), idx(ep, "to"));
      l.reactance = as_number(require((*lines)[k], "reactance", ep), idx(ep, "reactance"));
      l.capacity = as_number(require((*lines)[k], "capacity", ep), idx(ep, "capacity"));
      n.lines.push_back(std::move(l));
    }
  }
  n.reference_bus = as_string(require(j, "reference_bus", path), idx(path, "reference_bus"));
  const json& map = require(j, "unit_bus", path);
  if (!map.is_object()) fail(idx(path, "unit_bus"), "expected an object");
  for (auto it = map.begin(); it != map.end(); ++it)
    n.unit_bus[it.key()] = as_string(it.value(), idx(path, "unit_bus") + "." + it.key());
  return n;
}

}  // namespace

CaseConfig load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("JSON parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError(path, "top level must be a JSON object");
  const size_t slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? std::string(".") : path.substr(0, slash);

  CaseConfig cfg;

  const json& jsessions = require(root, "sessions", "config");
  if (!jsessions.is_array() || jsessions.empty())
    fail("config.sessions", "expected a non-empty array");
  std::set<std::string> session_names;
  for (size_t k = 0; k < jsessions.size(); ++k) {
    auto s = parse_session(jsessions[k], idx("config", "sessions", k), dir);
    if (!session_names.insert(s.name).second)
      fail(idx("config", "sessions", k), "duplicate session name '" + s.name + "'");
    cfg.sessions.push_back(std::move(s));
  }
  const int periods = cfg.sessions.front().grid.period_count;

  const json& fleet = require(root, "fleet", "config");
  std::set<std::string> unit_ids;
  auto claim_id = [&](const std::string& id, const std::string& where) {
    if (!unit_ids.insert(id).second) fail(where, "duplicate unit id '" + id + "'");
  };
  if (const json* arr = find(fleet, "ndres")) {
    if (!arr->is_array()) fail("config.fleet.ndres", "expected an array");
    for (size_t k = 0; k < arr->size(); ++k) {
      auto u = parse_ndres((*arr)[k], idx("config.fleet", "ndres", k), dir, cfg.sessions, periods);
      claim_id(u.id, idx("config.fleet", "ndres", k));
      cfg.ndres.push_back(std::move(u));
    }
  }
  if (const json* arr = find(fleet, "stu")) {
    if (!arr->is_array()) fail("config.fleet.stu", "expected an array");
    for (size_t k = 0; k < arr->size(); ++k) {
      auto u = parse_stu((*arr)[k], idx("config.fleet", "stu", k), dir, cfg.sessions, periods);
      claim_id(u.id, idx("config.fleet", "stu", k));
      cfg.stu.push_back(std::move(u));
    }
  }
  if (const json* arr = find(fleet, "demands")) {
    if (!arr->is_array()) fail("config.fleet.demands", "expected an array");
    for (size_t k = 0; k < arr->size(); ++k) {
      auto u = parse_demand((*arr)[k], idx("config.fleet", "demands", k), dir, periods);
      claim_id(u.id, idx("config.fleet", "demands", k));
      cfg.demands.push_back(std::move(u));
    }
  }

  if (const json* jb = find(root, "budgets")) {
    if (!jb->is_object()) fail("config.budgets", "expected an object");
    for (auto it = jb->begin(); it != jb->end(); ++it)
      cfg.budgets[it.key()] = parse_budget_set(it.value(), "config.budgets." + it.key());
  }

  if (const json* jn = find(root, "network"))
    cfg.network = parse_network(*jn, "config.network");

  if (const json* js = find(root, "solver")) {
    const std::string sp = "config.solver";
    cfg.solver.combination_cap = opt_int(*js, "combination_cap", cfg.solver.combination_cap, sp);
    cfg.solver.max_iterations = opt_int(*js, "max_iterations",
                                        static_cast<int>(cfg.solver.max_iterations), sp);
    cfg.solver.feas_tol = opt_number(*js, "feas_tol", cfg.solver.feas_tol, sp);
    cfg.solver.pivot_tol = opt_number(*js, "pivot_tol", cfg.solver.pivot_tol, sp);
    cfg.solver.big_m = opt_number(*js, "big_m", cfg.solver.big_m, sp);
    cfg.solver.epsilon = opt_number(*js, "epsilon", cfg.solver.epsilon, sp);
  }

  if (const json* jb = find(root, "baseline23")) {
    const std::string bp = "config.baseline23";
    if (const json* g = find(*jb, "gamma_per_period")) {
      if (!g->is_object()) fail(idx(bp, "gamma_per_period"), "expected an object");
      for (auto it = g->begin(); it != g->end(); ++it)
        cfg.baseline23.gamma_per_period[it.key()] =
            expand_series(it.value(), periods, bp + ".gamma_per_period." + it.key());
    }
    if (const json* mp = find(*jb, "mean_prices")) {
      if (!mp->is_object()) fail(bp + ".mean_prices", "expected an object");
      for (auto sit = mp->begin(); sit != mp->end(); ++sit) {
        if (!sit.value().is_object())
          fail(bp + ".mean_prices." + sit.key(), "expected an object of streams");
        for (auto pit = sit.value().begin(); pit != sit.value().end(); ++pit)
          cfg.baseline23.mean_prices[sit.key()][pit.key()] =
              expand_series(pit.value(), periods, bp + ".mean_prices." + sit.key() + "." + pit.key());
      }
    }
  }

  return cfg;
}

}  // namespace rvpp
