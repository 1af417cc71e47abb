#include "rvpp/sequence.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"
#include "rvpp/verify.hpp"

namespace rvpp {

namespace {

std::vector<double> series_values(const SeriesVars& s, const Solution& sol) {
  std::vector<double> out;
  out.reserve(s.at.size());
  for (int v : s.at) out.push_back(v >= 0 ? sol.values[static_cast<size_t>(v)] : 0.0);
  return out;
}

std::vector<double> scaled(std::vector<double> v, double fraction) {
  if (fraction != 1.0)
    for (double& x : v) x *= fraction;
  return v;
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
  return buf;
}

// Reports round every numeric leaf to six significant digits so reruns emit
// byte-identical files.
double j6(double v) { return std::strtod(g6(v).c_str(), nullptr); }

nlohmann::json jarr(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(j6(x));
  return a;
}

nlohmann::json session_json(const SessionResult& r) {
  nlohmann::json s;
  s["name"] = r.session;
  s["kind"] = to_string(r.kind);
  if (r.kind == SessionKind::idm_k) s["idm_index"] = r.idm_index;
  s["mode"] = to_string(r.mode);
  s["objective"] = j6(r.objective);
  nlohmann::json reduction;
  for (const auto& [stream, v] : r.breakdown.price_reduction) reduction[stream] = j6(v);
  s["breakdown"] = {{"median_income", j6(r.breakdown.median_income)},
                    {"operating_cost", j6(r.breakdown.operating_cost)},
                    {"profile_cost", j6(r.breakdown.profile_cost)},
                    {"price_reduction", std::move(reduction)}};
  s["iterations"] = r.iterations;
  s["p_trade"] = jarr(r.p_trade);
  if (!r.r_up.empty()) s["r_up"] = jarr(r.r_up);
  if (!r.r_down.empty()) s["r_down"] = jarr(r.r_down);
  if (!r.profile_choice.empty()) s["profile_choice"] = r.profile_choice;
  nlohmann::json units;
  for (const auto& [id, p] : r.unit_p) {
    nlohmann::json u;
    u["p"] = jarr(p);
    if (auto it = r.unit_r_up.find(id); it != r.unit_r_up.end()) u["r_up"] = jarr(it->second);
    if (auto it = r.unit_r_down.find(id); it != r.unit_r_down.end())
      u["r_down"] = jarr(it->second);
    if (auto it = r.stu_p_sf.find(id); it != r.stu_p_sf.end()) u["p_sf"] = jarr(it->second);
    if (auto it = r.stu_q.find(id); it != r.stu_q.end()) u["q"] = jarr(it->second);
    if (auto it = r.stu_e.find(id); it != r.stu_e.end()) u["e"] = jarr(it->second);
    units[id] = std::move(u);
  }
  s["units"] = std::move(units);
  return s;
}

}  // namespace

ReferenceSolveOptions make_solve_options(const SolverConfig& solver) {
  ReferenceSolveOptions opts;
  opts.combination_cap = solver.combination_cap;
  opts.simplex.max_iterations = solver.max_iterations;
  opts.simplex.feas_tol = solver.feas_tol;
  opts.simplex.pivot_tol = solver.pivot_tol;
  return opts;
}

double SequenceResult::total_objective() const {
  double s = 0.0;
  for (const auto& r : sessions) s += r.objective;
  return s;
}

SessionResult run_session(const CaseConfig& cfg, const std::string& session,
                          const StarredResults& starred, BuildMode mode) {
  SessionModelBundle bundle = mode == BuildMode::baseline23
                                  ? build_baseline23_model(cfg, session, starred)
                                  : build_session_model(cfg, session, starred, mode);
  if (cfg.network) build_network_extension(bundle, cfg, *cfg.network);

  const auto t0 = std::chrono::steady_clock::now();
  Solution sol;
  try {
    sol = solve_reference(bundle.model, make_solve_options(cfg.solver));
  } catch (const std::exception& e) {
    throw SolveFailure("session '" + session + "': " + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (sol.status != SolveStatus::optimal) {
    std::string msg =
        "session '" + session + "' did not clear: solver status " + to_string(sol.status);
    if (sol.status == SolveStatus::infeasible)
      msg += "; the committed positions cannot be balanced against this session's forecasts";
    throw SolveFailure(msg);
  }
  VerifyReport vr = verify_solution(bundle.model, sol);
  if (!vr.ok())
    throw SolveFailure("session '" + session + "' solution failed the independent check:\n" +
                       vr.to_string());

  SessionResult out;
  out.session = bundle.session_name;
  out.kind = bundle.kind;
  out.idm_index = bundle.idm_index;
  out.mode = mode;
  out.objective = sol.objective;
  out.breakdown = bundle.decompose(sol.values);
  out.solve_seconds = secs;
  out.iterations = sol.iterations;

  out.p_trade = series_values(bundle.p_trade, sol);
  if (!bundle.r_up.empty()) out.r_up = series_values(bundle.r_up, sol);
  if (!bundle.r_down.empty()) out.r_down = series_values(bundle.r_down, sol);
  for (const auto& [id, refs] : bundle.ndres) {
    out.unit_p[id] = series_values(refs.p, sol);
    if (!refs.r_up.empty()) out.unit_r_up[id] = series_values(refs.r_up, sol);
    if (!refs.r_down.empty()) out.unit_r_down[id] = series_values(refs.r_down, sol);
  }
  for (const auto& [id, refs] : bundle.stu) {
    out.unit_p[id] = series_values(refs.p, sol);
    if (!refs.r_up.empty()) out.unit_r_up[id] = series_values(refs.r_up, sol);
    if (!refs.r_down.empty()) out.unit_r_down[id] = series_values(refs.r_down, sol);
    out.stu_p_sf[id] = series_values(refs.p_sf, sol);
    out.stu_q[id] = series_values(refs.q, sol);
    out.stu_e[id] = series_values(refs.e, sol);
  }
  for (const auto& [id, refs] : bundle.demand) {
    out.unit_p[id] = series_values(refs.p, sol);
    if (!refs.r_up.empty()) out.unit_r_up[id] = series_values(refs.r_up, sol);
    if (!refs.r_down.empty()) out.unit_r_down[id] = series_values(refs.r_down, sol);
    int chosen = 0;
    for (size_t k = 0; k < refs.u.size(); ++k)
      if (sol.values[static_cast<size_t>(refs.u[k])] > 0.5) chosen = static_cast<int>(k);
    out.profile_choice[id] = chosen;
  }
  out.solution = std::move(sol);
  return out;
}

void commit_session(StarredResults& starred, const SessionResult& result,
                    const AcceptancePolicy& policy) {
  switch (result.kind) {
    case SessionKind::dam_srm:
      starred.p_da = scaled(result.p_trade, policy.trade_fraction);
      starred.unit_p_da = result.unit_p;
      starred.profile_choice = result.profile_choice;
      break;
    case SessionKind::srm_idm1:
      starred.r_up = scaled(result.r_up, policy.reserve_fraction);
      starred.r_down = scaled(result.r_down, policy.reserve_fraction);
      starred.p_id[1] = scaled(result.p_trade, policy.trade_fraction);
      break;
    case SessionKind::idm_k:
      starred.p_id[result.idm_index] = scaled(result.p_trade, policy.trade_fraction);
      break;
  }
  starred.latest.unit_p = result.unit_p;
  starred.latest.unit_r_up = result.unit_r_up;
  starred.latest.unit_r_down = result.unit_r_down;
  starred.latest.stu_p_sf = result.stu_p_sf;
  starred.latest.stu_q = result.stu_q;
}

SequenceResult chain_sessions(const CaseConfig& cfg, const SequenceOptions& opts) {
  if (cfg.sessions.empty()) throw SequenceError("config has no market sessions");

  int last_idm = 0;
  for (size_t i = 0; i < cfg.sessions.size(); ++i) {
    const MarketSessionSpec& s = cfg.sessions[i];
    if ((s.kind == SessionKind::dam_srm) != (i == 0))
      throw SequenceError("session pipeline must open with the day-ahead session and not revisit "
                          "it (offending session '" + s.name + "')");
    if (s.kind == SessionKind::srm_idm1) {
      if (i != 1)
        throw SequenceError("the reserve adjustment session must directly follow the day-ahead "
                            "session (offending session '" + s.name + "')");
      last_idm = 1;
    }
    if (s.kind == SessionKind::idm_k) {
      if (s.idm_index <= last_idm)
        throw SequenceError("intraday sessions must carry strictly increasing market numbers "
                            "(offending session '" + s.name + "')");
      last_idm = s.idm_index;
    }
  }

  // A later session re-dispatching on stale day-ahead forecasts is almost
  // always a config mistake, so explicit updates are required.
  for (size_t i = 1; i < cfg.sessions.size(); ++i) {
    const std::string& name = cfg.sessions[i].name;
    for (const auto& u : cfg.ndres)
      if (!u.forecast_updates.count(name))
        throw SequenceError("unit '" + u.id + "' has no forecast update for session '" + name +
                            "'");
    for (const auto& u : cfg.stu)
      if (!u.forecast_updates.count(name))
        throw SequenceError("unit '" + u.id + "' has no forecast update for session '" + name +
                            "'");
  }

  SequenceResult out;
  for (const auto& ses : cfg.sessions) {
    SessionResult result = run_session(cfg, ses.name, out.positions, opts.mode);
    auto it = opts.acceptance.find(ses.name);
    commit_session(out.positions, result,
                   it == opts.acceptance.end() ? AcceptancePolicy{} : it->second);
    out.sessions.push_back(std::move(result));
  }

  // Reserve becomes firm when the adjustment session clears it; a pipeline
  // without one keeps the day-ahead clearing as the final position.
  if (out.positions.r_up.empty() && !out.sessions.front().r_up.empty()) {
    const SessionResult& dam = out.sessions.front();
    auto it = opts.acceptance.find(dam.session);
    const double f = it == opts.acceptance.end() ? 1.0 : it->second.reserve_fraction;
    out.positions.r_up = scaled(dam.r_up, f);
    out.positions.r_down = scaled(dam.r_down, f);
  }
  return out;
}

std::string sequence_to_json(const CaseConfig& cfg, const SequenceResult& seq) {
  nlohmann::json j;
  j["pipeline"] = nlohmann::json::array();
  for (const auto& s : cfg.sessions) j["pipeline"].push_back(s.name);
  j["total_objective"] = j6(seq.total_objective());
  j["sessions"] = nlohmann::json::array();
  for (const auto& r : seq.sessions) j["sessions"].push_back(session_json(r));

  nlohmann::json pos;
  pos["p_da"] = jarr(seq.positions.p_da);
  if (!seq.positions.r_up.empty()) {
    pos["r_up"] = jarr(seq.positions.r_up);
    pos["r_down"] = jarr(seq.positions.r_down);
  }
  nlohmann::json p_id;
  for (const auto& [k, v] : seq.positions.p_id) p_id[std::to_string(k)] = jarr(v);
  pos["p_id"] = std::move(p_id);
  if (!seq.positions.profile_choice.empty()) pos["profile_choice"] = seq.positions.profile_choice;
  j["positions"] = std::move(pos);

  return j.dump(2) + "\n";
}

std::string session_report_json(const SessionResult& result) {
  return session_json(result).dump(2) + "\n";
}

std::string session_csv(const CaseConfig& cfg, const SessionResult& result) {
  std::vector<std::string> unit_ids;
  for (const auto& u : cfg.ndres) unit_ids.push_back(u.id);
  for (const auto& u : cfg.stu) unit_ids.push_back(u.id);
  for (const auto& d : cfg.demands) unit_ids.push_back(d.id);

  std::string out = "t,p_trade,r_up,r_down";
  for (const auto& id : unit_ids) out += "," + id + ".p";
  out += "\n";

  const size_t T = result.p_trade.size();
  for (size_t t = 0; t < T; ++t) {
    out += std::to_string(t + 1);
    out += "," + g6(result.p_trade[t]);
    out += "," + g6(t < result.r_up.size() ? result.r_up[t] : 0.0);
    out += "," + g6(t < result.r_down.size() ? result.r_down[t] : 0.0);
    for (const auto& id : unit_ids) {
      auto it = result.unit_p.find(id);
      out += "," + g6(it != result.unit_p.end() && t < it->second.size() ? it->second[t] : 0.0);
    }
    out += "\n";
  }
  return out;
}

void write_sequence_reports(const CaseConfig& cfg, const SequenceResult& seq,
                            const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "sequence.json");
    if (!f) throw SequenceError("cannot write to '" + out_dir + "'");
    f << sequence_to_json(cfg, seq);
  }
  for (const auto& r : seq.sessions) {
    std::ofstream f(fs::path(out_dir) / ("session_" + r.session + ".csv"));
    if (!f) throw SequenceError("cannot write to '" + out_dir + "'");
    f << session_csv(cfg, r);
  }
}

}  // namespace rvpp
