#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rvpp/assessment.hpp"
#include "rvpp/domain.hpp"
#include "rvpp/formulation.hpp"
#include "rvpp/mps.hpp"
#include "rvpp/sequence.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rvpp;

namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
  return buf;
}

double j6(double v) { return std::strtod(g6(v).c_str(), nullptr); }

// wall-clock per stage, for the run manifest only: data files never carry time
struct StageClock {
  std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();
  std::map<std::string, double> seconds;
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    seconds[stage] += std::chrono::duration<double>(now - mark).count();
    mark = now;
  }
};

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::string& config_path, json options,
                    std::optional<std::uint64_t> seed, const StageClock& clock) {
  json m;
  m["command"] = command;
  m["config"] = config_path;
  m["options"] = std::move(options);
  if (seed) m["seed"] = *seed;
  m["tool_version"] = RVPP_VERSION;
  json wall;
  for (const auto& [stage, secs] : clock.seconds) wall[stage] = j6(secs);
  m["wall_clock_seconds"] = std::move(wall);
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

// prints findings to stderr; returns false on blocking errors
bool report_validation(CaseConfig& cfg) {
  ValidationReport report = validate_case(cfg);
  for (const auto& f : report.findings)
    std::cerr << (f.error ? "error: " : "warning: ") << f.path << ": " << f.message << "\n";
  return report.ok();
}

BuildMode parse_mode(const std::string& name) {
  if (name == "proposed") return BuildMode::proposed;
  if (name == "deterministic") return BuildMode::deterministic;
  if (name == "baseline23") return BuildMode::baseline23;
  throw CLI::ValidationError("--mode", "unknown mode '" + name + "'");
}

// grid syntax: comma-separated numbers, "a..b" expands inclusively by 1
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t comma = std::min(text.find(',', pos), text.size());
    const std::string token = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (token.empty()) throw std::invalid_argument("empty grid entry");
    const size_t dots = token.find("..");
    if (dots == std::string::npos) {
      size_t used = 0;
      grid.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument("bad grid entry '" + token + "'");
    } else {
      const double lo = std::stod(token.substr(0, dots));
      const double hi = std::stod(token.substr(dots + 2));
      if (hi < lo) throw std::invalid_argument("descending grid range '" + token + "'");
      for (double g = lo; g <= hi + 1e-9; g += 1.0) grid.push_back(g);
    }
    if (comma == text.size()) break;
  }
  return grid;
}

StarredResults positions_from_bids(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path, "cannot open bids file");
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path, "bids file is not valid JSON");
  if (!j.contains("positions") || !j["positions"].contains("p_da"))
    throw ConfigError(path, "bids file has no positions.p_da (expected a sequence report)");
  const json& p = j["positions"];
  StarredResults out;
  out.p_da = p.at("p_da").get<std::vector<double>>();
  if (p.contains("r_up")) {
    out.r_up = p.at("r_up").get<std::vector<double>>();
    out.r_down = p.at("r_down").get<std::vector<double>>();
  }
  if (p.contains("p_id"))
    for (const auto& [k, v] : p.at("p_id").items())
      out.p_id[std::stoi(k)] = v.get<std::vector<double>>();
  if (p.contains("profile_choice"))
    for (const auto& [k, v] : p.at("profile_choice").items()) out.profile_choice[k] = v.get<int>();
  return out;
}

// "<key>=<number>" flag payloads
std::pair<std::string, double> parse_assignment(const std::string& text, const char* flag) {
  const size_t eq = text.find('=');
  size_t used = 0;
  double value = 0.0;
  if (eq != std::string::npos && eq > 0)
    value = std::stod(text.substr(eq + 1), &used);
  if (eq == std::string::npos || eq == 0 || used != text.size() - eq - 1)
    throw CLI::ValidationError(flag, "expected <name>=<number>, got '" + text + "'");
  return {text.substr(0, eq), value};
}

void apply_budget_overrides(CaseConfig& cfg, const std::string& session,
                            const std::vector<std::string>& unit_overrides,
                            const std::vector<std::string>& price_overrides) {
  if (unit_overrides.empty() && price_overrides.empty()) return;
  BudgetSet& b = cfg.budgets[session];
  for (const auto& text : unit_overrides) {
    auto [id, value] = parse_assignment(text, "--gamma-unit");
    b.unit[id] = value;
  }
  for (const auto& text : price_overrides) {
    auto [stream, value] = parse_assignment(text, "--gamma-price");
    if (stream == "da")
      b.price.da = value;
    else if (stream == "sr_up")
      b.price.sr_up = value;
    else if (stream == "sr_down")
      b.price.sr_down = value;
    else if (stream == "id")
      b.price.id = value;
    else
      throw CLI::ValidationError("--gamma-price",
                                 "unknown stream '" + stream + "' (da, sr_up, sr_down, id)");
  }
}

void print_breakdown(const ObjectiveBreakdown& b) {
  std::cout << "  median income " << g6(b.median_income) << ", operating cost "
            << g6(b.operating_cost) << ", profile cost " << g6(b.profile_cost);
  double reduction = 0.0;
  for (const auto& [stream, v] : b.price_reduction) reduction += v;
  std::cout << ", price reduction " << g6(reduction) << "\n";
}

// RVPP_EXTERNAL_SOLVER, when set, names a command taking one MPS path and
// printing a JSON object with a "maximize_equivalent" objective; the result is
// reported and recorded but never gates the run.
void external_cross_check(const fs::path& mps_path, double reference, json& record) {
  const char* cmd = std::getenv("RVPP_EXTERNAL_SOLVER");
  if (!cmd || !*cmd) return;
  const std::string full = std::string(cmd) + " \"" + mps_path.string() + "\"";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) {
    std::cerr << "warning: cannot start external solver '" << cmd << "'\n";
    return;
  }
  std::string out;
  char buf[4096];
  for (size_t n = 0; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  const int rc = pclose(pipe);
  json r = json::parse(out, nullptr, false);
  if (rc != 0 || r.is_discarded() || !r.contains("maximize_equivalent")) {
    std::cerr << "warning: external solver gave no usable answer (exit " << rc << ")\n";
    return;
  }
  const double external = r["maximize_equivalent"].get<double>();
  const double gap = std::abs(external - reference) /
                     std::max(1.0, std::abs(reference));
  std::cout << "external solver objective " << g6(external) << " vs " << g6(reference)
            << " (relative gap " << g6(gap) << ")\n";
  record["command"] = cmd;
  record["status"] = r.value("status", "");
  record["objective"] = j6(external);
  record["relative_gap"] = j6(gap);
}

// ---- subcommands -----------------------------------------------------------

int cmd_validate(const std::string& config_path) {
  CaseConfig cfg = load_case(config_path);
  const bool ok = report_validation(cfg);
  std::cout << "configuration " << (ok ? "ok" : "has blocking errors") << ": "
            << cfg.ndres.size() + cfg.stu.size() << " generation units, " << cfg.demands.size()
            << " demands, " << cfg.sessions.size() << " sessions\n";
  return ok ? 0 : 1;
}

int cmd_bid(const std::string& config_path, const std::string& session, const std::string& mode,
            const std::string& out_dir, bool export_mps_file,
            const std::vector<std::string>& gamma_units,
            const std::vector<std::string>& gamma_prices) {
  StageClock clock;
  CaseConfig cfg = load_case(config_path);
  if (!cfg.find_session(session)) {
    std::cerr << "error: config has no session named '" << session << "'\n";
    return 2;
  }
  apply_budget_overrides(cfg, session, gamma_units, gamma_prices);
  clock.lap("load");

  if (!report_validation(cfg)) return 1;
  clock.lap("validate");

  const BuildMode build_mode = parse_mode(mode);
  fs::create_directories(out_dir);
  json external;
  if (export_mps_file) {
    SessionModelBundle bundle = build_mode == BuildMode::baseline23
                                    ? build_baseline23_model(cfg, session, {})
                                    : build_session_model(cfg, session, {}, build_mode);
    if (cfg.network) build_network_extension(bundle, cfg, *cfg.network);
    write_text(fs::path(out_dir) / "model.mps", export_mps(bundle.model));
    clock.lap("export");
  }

  SessionResult result = run_session(cfg, session, {}, build_mode);
  clock.lap("solve");

  write_text(fs::path(out_dir) / "bid.json", session_report_json(result));
  write_text(fs::path(out_dir) / "bid.csv", session_csv(cfg, result));
  if (export_mps_file)
    external_cross_check(fs::path(out_dir) / "model.mps", result.objective, external);

  json options;
  options["session"] = session;
  options["mode"] = mode;
  options["out"] = out_dir;
  options["export_mps"] = export_mps_file;
  if (!gamma_units.empty()) options["gamma_unit"] = gamma_units;
  if (!gamma_prices.empty()) options["gamma_price"] = gamma_prices;
  if (!external.empty()) options["external_check"] = std::move(external);
  clock.lap("write");
  write_manifest(out_dir, "bid", config_path, std::move(options), std::nullopt, clock);

  std::cout << "session " << session << " cleared: objective " << g6(result.objective) << " in "
            << g6(result.solve_seconds) << " s, " << result.iterations << " iterations\n";
  print_breakdown(result.breakdown);
  std::cout << "wrote " << out_dir << "/bid.json, bid.csv"
            << (export_mps_file ? ", model.mps" : "") << ", manifest.json\n";
  return 0;
}

int cmd_sequence(const std::string& config_path, const std::string& mode,
                 const std::string& out_dir) {
  StageClock clock;
  CaseConfig cfg = load_case(config_path);
  clock.lap("load");
  if (!report_validation(cfg)) return 1;
  clock.lap("validate");

  SequenceOptions opts;
  opts.mode = parse_mode(mode);
  SequenceResult seq = chain_sessions(cfg, opts);
  clock.lap("solve");

  write_sequence_reports(cfg, seq, out_dir);
  json options;
  options["mode"] = mode;
  options["out"] = out_dir;
  clock.lap("write");
  write_manifest(out_dir, "sequence", config_path, std::move(options), std::nullopt, clock);

  for (const auto& r : seq.sessions) {
    std::cout << "session " << r.session << " cleared: objective " << g6(r.objective) << " in "
              << g6(r.solve_seconds) << " s\n";
    print_breakdown(r.breakdown);
  }
  std::cout << "pipeline objective " << g6(seq.total_objective()) << "; wrote " << out_dir
            << "/sequence.json and per-session CSVs\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& which, const std::string& grid,
              const std::string& mode, const std::string& out_dir) {
  StageClock clock;
  SweepSpec spec;
  if (which == "energy")
    spec.which = SweepDimension::energy;
  else if (which == "price")
    spec.which = SweepDimension::price;
  else if (which == "price_energy")
    spec.which = SweepDimension::price_energy;
  else
    throw CLI::ValidationError("--which", "expected energy, price, or price_energy");
  try {
    spec.grid = parse_grid(grid);
  } catch (const std::exception& e) {
    std::cerr << "error: --grid: " << e.what() << "\n";
    return 2;
  }
  if (spec.grid.empty()) {
    std::cerr << "error: --grid is empty\n";
    return 2;
  }
  if (spec.which != SweepDimension::price)
    for (double g : spec.grid)
      if (std::abs(g - std::round(g)) > 1e-9) {
        std::cerr << "error: --grid: unit budgets must be integers, got " << g6(g) << "\n";
        return 2;
      }
  spec.mode = parse_mode(mode);

  CaseConfig cfg = load_case(config_path);
  clock.lap("load");
  if (!report_validation(cfg)) return 1;
  clock.lap("validate");

  SweepResult result = sweep_budgets(cfg, spec);
  clock.lap("solve");

  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "sweep.csv", sweep_csv(result));
  json detail;
  detail["which"] = which;
  detail["mode"] = mode;
  detail["monotone"] = result.monotone;
  detail["points"] = json::array();
  for (const auto& p : result.points) {
    json reduction;
    for (const auto& [stream, v] : p.breakdown.price_reduction) reduction[stream] = j6(v);
    detail["points"].push_back({{"budget", j6(p.budget)},
                                {"objective", j6(p.objective)},
                                {"median_income", j6(p.breakdown.median_income)},
                                {"operating_cost", j6(p.breakdown.operating_cost)},
                                {"profile_cost", j6(p.breakdown.profile_cost)},
                                {"price_reduction", std::move(reduction)}});
  }
  write_text(fs::path(out_dir) / "sweep.json", detail.dump(2) + "\n");

  json options;
  options["which"] = which;
  options["grid"] = grid;
  options["mode"] = mode;
  options["out"] = out_dir;
  clock.lap("write");
  write_manifest(out_dir, "sweep", config_path, std::move(options), std::nullopt, clock);

  std::cout << result.points.size() << " solves over the " << which << " budget grid; objective "
            << g6(result.points.front().objective) << " -> "
            << g6(result.points.back().objective)
            << (result.monotone ? " (non-increasing)" : " (NOT monotone)") << "; wrote "
            << out_dir << "/sweep.csv\n";
  return 0;
}

int cmd_assess(const std::string& config_path, const std::string& bids_path, int n,
               const std::string& generator, std::uint64_t seed, double penalty,
               const std::string& mode, const std::string& out_dir) {
  StageClock clock;
  if (n <= 0) {
    std::cerr << "error: --n must be positive\n";
    return 2;
  }
  ScenarioGenSpec spec;
  spec.count = n;
  spec.seed = seed;
  if (generator == "three_point")
    spec.distribution = ScenarioDistribution::three_point;
  else if (generator == "weibull")
    spec.distribution = ScenarioDistribution::weibull;
  else
    throw CLI::ValidationError("--generator", "expected three_point or weibull");

  CaseConfig cfg = load_case(config_path);
  clock.lap("load");
  if (!report_validation(cfg)) return 1;
  clock.lap("validate");

  StarredResults positions;
  if (!bids_path.empty()) {
    positions = positions_from_bids(bids_path);
  } else {
    SequenceOptions opts;
    opts.mode = parse_mode(mode);
    positions = chain_sessions(cfg, opts).positions;
  }
  clock.lap("bids");

  ScenarioSet scenarios = generate_scenarios(cfg, spec);
  clock.lap("scenarios");

  AssessmentOptions opts;
  opts.imbalance_penalty = penalty;
  AssessmentResult result = out_of_sample_evaluate(cfg, positions, scenarios, opts);
  clock.lap("evaluate");

  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "assessment.csv", assessment_csv(result));
  write_text(fs::path(out_dir) / "profit_histogram.csv", histogram_csv(result.profit));
  write_text(fs::path(out_dir) / "penalty_histogram.csv", histogram_csv(result.penalty));
  json summary;
  summary["scenarios"] = n;
  summary["generator"] = generator;
  summary["seed"] = seed;
  summary["penalty_price"] = j6(penalty);
  summary["bids"] = bids_path.empty() ? json("computed from config") : json(bids_path);
  summary["average_profit"] = j6(result.average_profit);
  summary["average_penalty"] = j6(result.average_penalty);
  summary["net_average"] = j6(result.net_average());
  write_text(fs::path(out_dir) / "assessment.json", summary.dump(2) + "\n");

  json options;
  options["bids"] = bids_path;
  options["n"] = n;
  options["generator"] = generator;
  options["Z"] = j6(penalty);
  options["mode"] = mode;
  options["out"] = out_dir;
  clock.lap("write");
  write_manifest(out_dir, "assess", config_path, std::move(options), seed, clock);

  std::cout << n << " scenarios (" << generator << ", seed " << seed << "): average profit "
            << g6(result.average_profit) << ", average penalty " << g6(result.average_penalty)
            << ", net " << g6(result.net_average()) << "; wrote " << out_dir
            << "/assessment.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust market bids for a renewable-only virtual power plant"};
  app.set_version_flag("--version", RVPP_VERSION);
  app.require_subcommand(1);
  app.footer("exit codes: 0 ok, 1 validation or input error, 2 usage or parse error, "
             "3 solver failure");

  std::string config_path, session, out_dir, grid, which;
  std::string mode = "proposed";
  std::string bids_path, generator = "three_point";
  bool export_mps_file = false;
  std::vector<std::string> gamma_units, gamma_prices;
  int n = 100;
  std::uint64_t seed = 1;
  double penalty = 1000.0;

  CLI::App* validate = app.add_subcommand("validate", "check a config and report findings");
  validate->add_option("config", config_path, "case config JSON")->required();

  CLI::App* bid = app.add_subcommand("bid", "solve one market session and write the bid");
  bid->add_option("config", config_path, "case config JSON")->required();
  bid->add_option("--session", session, "session name from the config")->required();
  bid->add_option("--mode", mode, "proposed, deterministic, or baseline23");
  bid->add_option("--out", out_dir, "output directory")->required();
  bid->add_flag("--export-mps", export_mps_file, "also write the model as MPS");
  bid->add_option("--gamma-unit", gamma_units, "override a unit budget, <unit>=<gamma>");
  bid->add_option("--gamma-price", gamma_prices, "override a price budget, <stream>=<gamma>");

  CLI::App* sequence = app.add_subcommand("sequence", "clear the whole session pipeline");
  sequence->add_option("config", config_path, "case config JSON")->required();
  sequence->add_option("--mode", mode, "proposed, deterministic, or baseline23");
  sequence->add_option("--out", out_dir, "output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "re-solve the first session over a budget grid");
  sweep->add_option("config", config_path, "case config JSON")->required();
  sweep->add_option("--which", which, "energy, price, or price_energy")->required();
  sweep->add_option("--grid", grid, "budgets, e.g. 0,1,2 or 0..24")->required();
  sweep->add_option("--mode", mode, "proposed or baseline23");
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI::App* assess = app.add_subcommand("assess", "out-of-sample Monte Carlo evaluation");
  assess->add_option("config", config_path, "case config JSON")->required();
  assess->add_option("--bids", bids_path, "sequence report to take positions from "
                                          "(default: clear the pipeline first)");
  assess->add_option("--n", n, "number of scenarios");
  assess->add_option("--generator", generator, "three_point or weibull");
  assess->add_option("--seed", seed, "scenario seed");
  assess->add_option("--Z", penalty, "imbalance penalty price per MWh");
  assess->add_option("--mode", mode, "pipeline mode when --bids is absent");
  assess->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(config_path);
    if (app.got_subcommand(bid))
      return cmd_bid(config_path, session, mode, out_dir, export_mps_file, gamma_units,
                     gamma_prices);
    if (app.got_subcommand(sequence)) return cmd_sequence(config_path, mode, out_dir);
    if (app.got_subcommand(sweep)) return cmd_sweep(config_path, which, grid, mode, out_dir);
    if (app.got_subcommand(assess))
      return cmd_assess(config_path, bids_path, n, generator, seed, penalty, mode, out_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SolveFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
