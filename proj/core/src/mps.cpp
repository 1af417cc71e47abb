#include "rvpp/mps.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

namespace rvpp {
namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

void field_line(std::string& out, const std::string& f1, const std::string& f2,
                const std::string& f3 = "", const std::string& f4 = "",
                const std::string& f5 = "", const std::string& f6 = "") {
  std::string line = " " + f1;
  auto pad_to = [&](size_t col) {
    while (line.size() < col) line.push_back(' ');
  };
  pad_to(4);
  line += f2;
  if (!f3.empty()) { pad_to(14); line += f3; }
  if (!f4.empty()) { pad_to(24); line += f4; }
  if (!f5.empty()) { pad_to(39); line += f5; }
  if (!f6.empty()) { pad_to(49); line += f6; }
  out += line + "\n";
}

}  // namespace

std::string export_mps(const ModelIR& model) {
  const int n = static_cast<int>(model.vars.size());
  const int m = static_cast<int>(model.cons.size());

  std::string out;
  out += "* Minimization form: objective coefficients are the negated\n";
  out += "* maximize-form coefficients; an external minimum equals the\n";
  out += "* negated maximum of the source model. The OBJ row RHS entry\n";
  out += "* carries the maximize-form objective constant.\n";
  out += "* Columns X1..Xn follow source declaration order; rows are R1..Rm.\n";
  out += "NAME          " + (model.name.empty() ? std::string("RVPP") : model.name) + "\n";

  out += "ROWS\n";
  field_line(out, "N", "OBJ");
  for (int i = 0; i < m; ++i) {
    const char* s = model.cons[i].sense == Sense::le   ? "L"
                    : model.cons[i].sense == Sense::ge ? "G"
                                                       : "E";
    field_line(out, s, "R" + std::to_string(i + 1));
  }

  // per-column consolidated entries, in declaration order
  std::vector<std::map<int, double>> col_rows(n);
  for (int i = 0; i < m; ++i)
    for (const auto& t : model.cons[i].expr.terms)
      if (t.coef != 0.0) col_rows[t.var][i] += t.coef;
  std::vector<double> obj(n, 0.0);
  for (const auto& t : model.objective.terms) obj[t.var] += t.coef;

  out += "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < n; ++j) {
    const bool is_int = model.vars[j].kind == VarKind::binary;
    if (is_int != in_int) {
      ++marker;
      field_line(out, "", "M" + std::to_string(marker), "'MARKER'", "",
                 is_int ? "'INTORG'" : "'INTEND'");
      in_int = is_int;
    }
    const std::string name = "X" + std::to_string(j + 1);
    std::vector<std::pair<std::string, double>> entries;
    if (obj[j] != 0.0) entries.push_back({"OBJ", -obj[j]});
    for (const auto& [row, coef] : col_rows[j])
      entries.push_back({"R" + std::to_string(row + 1), coef});
    if (entries.empty()) entries.push_back({"OBJ", 0.0});
    for (size_t e = 0; e < entries.size(); e += 2) {
      if (e + 1 < entries.size())
        field_line(out, "", name, entries[e].first, num(entries[e].second),
                   entries[e + 1].first, num(entries[e + 1].second));
      else
        field_line(out, "", name, entries[e].first, num(entries[e].second));
    }
  }
  if (in_int) {
    ++marker;
    field_line(out, "", "M" + std::to_string(marker), "'MARKER'", "", "'INTEND'");
  }

  out += "RHS\n";
  if (model.objective_constant != 0.0)
    field_line(out, "", "RHS", "OBJ", num(model.objective_constant));
  for (int i = 0; i < m; ++i)
    if (model.cons[i].rhs != 0.0)
      field_line(out, "", "RHS", "R" + std::to_string(i + 1), num(model.cons[i].rhs));

  out += "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    const auto& v = model.vars[j];
    const std::string name = "X" + std::to_string(j + 1);
    if (v.kind == VarKind::binary) {
      field_line(out, "BV", "BND", name);
      continue;
    }
    const bool lo_fin = std::isfinite(v.lb), up_fin = std::isfinite(v.ub);
    if (lo_fin && up_fin && v.lb == v.ub) {
      field_line(out, "FX", "BND", name, num(v.lb));
    } else if (!lo_fin && !up_fin) {
      field_line(out, "FR", "BND", name);
    } else {
      if (!lo_fin)
        field_line(out, "MI", "BND", name);
      else if (v.lb != 0.0 || (up_fin && v.ub < 0.0))
        field_line(out, "LO", "BND", name, num(v.lb));
      if (up_fin) field_line(out, "UP", "BND", name, num(v.ub));
    }
  }
  out += "ENDATA\n";
  return out;
}

}  // namespace rvpp
