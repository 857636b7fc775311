#include "crex/powergrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include "crex/io.hpp"
#include "crex/qp.hpp"

namespace crex {

int CaseData::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

struct Row {
  std::vector<double> values;
  int line = 0;
};

double parse_number(const std::string& tok, const std::string& section, int line) {
  if (tok == "Inf" || tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-Inf" || tok == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("non-numeric value '" + tok + "' in " + section, section, line);
  }
  if (used != tok.size() || std::isnan(v)) {
    throw ParseError("non-numeric value '" + tok + "' in " + section, section, line);
  }
  return v;
}

void split_rows(const std::string& chunk, int line, const std::string& section,
                std::vector<Row>& rows) {
  std::string cur;
  auto flush = [&] {
    std::istringstream in(cur);
    std::string tok;
    Row r;
    r.line = line;
    while (in >> tok) r.values.push_back(parse_number(tok, section, line));
    if (!r.values.empty()) rows.push_back(std::move(r));
    cur.clear();
  };
  for (char ch : chunk) {
    if (ch == ';') {
      flush();
    } else {
      cur.push_back(ch == ',' || ch == '\t' ? ' ' : ch);
    }
  }
  flush();
}

void check_width(const std::vector<Row>& rows, const std::string& section, std::size_t min_cols) {
  if (rows.empty()) return;
  const std::size_t width = rows.front().values.size();
  for (const Row& r : rows) {
    if (r.values.size() != width || r.values.size() < min_cols) {
      throw ParseError("row in mpc." + section + " has " + std::to_string(r.values.size()) +
                           " columns, expected " + std::to_string(std::max(width, min_cols)),
                       section, r.line);
    }
  }
}

}  // namespace

CaseData parse_matpower_case(const std::string& text) {
  std::map<std::string, std::vector<Row>> matrices;
  std::map<std::string, double> scalars;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::string open;
  static const std::regex assign(R"(^\s*mpc\.(\w+)\s*=\s*(.*)$)");
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw.substr(0, raw.find('%'));
    if (!open.empty()) {
      const auto close = s.find(']');
      split_rows(s.substr(0, close), line, open, matrices[open]);
      if (close != std::string::npos) open.clear();
      continue;
    }
    std::smatch m;
    if (!std::regex_match(s, m, assign)) continue;
    const std::string name = m[1];
    std::string rest = m[2];
    const auto lb = rest.find('[');
    if (lb != std::string::npos) {
      matrices[name];
      rest = rest.substr(lb + 1);
      const auto close = rest.find(']');
      split_rows(rest.substr(0, close), line, name, matrices[name]);
      if (close == std::string::npos) open = name;
    } else if (name == "baseMVA") {
      std::string v = rest.substr(0, rest.find(';'));
      v.erase(std::remove_if(v.begin(), v.end(), ::isspace), v.end());
      scalars[name] = parse_number(v, name, line);
    }
  }
  if (!open.empty()) throw ParseError("unterminated matrix mpc." + open, open, line);
  for (const char* sec : {"bus", "branch", "gen", "gencost"}) {
    if (!matrices.count(sec)) throw ParseError(std::string("missing section mpc.") + sec, sec, 0);
  }

  CaseData c;
  if (scalars.count("baseMVA")) c.baseMVA = scalars["baseMVA"];
  if (!(c.baseMVA > 0.0)) throw ParseError("baseMVA must be positive", "baseMVA", 0);

  check_width(matrices["bus"], "bus", 13);
  for (const Row& r : matrices["bus"]) {
    Bus b{static_cast<int>(r.values[0]), static_cast<int>(r.values[1]), r.values[2]};
    if (c.bus_index(b.id) >= 0) {
      throw ParseError("duplicate bus id " + std::to_string(b.id), "bus", r.line);
    }
    c.buses.push_back(b);
  }
  check_width(matrices["branch"], "branch", 11);
  for (const Row& r : matrices["branch"]) {
    if (r.values[10] == 0.0) continue;
    Branch br{static_cast<int>(r.values[0]), static_cast<int>(r.values[1]), r.values[3],
              r.values[5]};
    if (c.bus_index(br.from) < 0 || c.bus_index(br.to) < 0) {
      throw ParseError("branch references an unknown bus", "branch", r.line);
    }
    c.branches.push_back(br);
  }
  check_width(matrices["gen"], "gen", 10);
  const auto& gencost = matrices["gencost"];
  if (gencost.size() != matrices["gen"].size()) {
    throw ParseError("mpc.gencost needs one row per generator", "gencost",
                     gencost.empty() ? 0 : gencost.front().line);
  }
  for (std::size_t i = 0; i < matrices["gen"].size(); ++i) {
    const Row& r = matrices["gen"][i];
    const Row& cr = gencost[i];
    if (cr.values.size() < 4 || cr.values[0] != 2.0) {
      throw ParseError("only polynomial gencost rows are supported", "gencost", cr.line);
    }
    const int ncoef = static_cast<int>(cr.values[3]);
    if (ncoef < 1 || ncoef > 3 || static_cast<int>(cr.values.size()) != 4 + ncoef) {
      throw ParseError("gencost row has " + std::to_string(cr.values.size()) +
                           " columns, expected " + std::to_string(4 + std::max(ncoef, 0)),
                       "gencost", cr.line);
    }
    if (r.values[7] <= 0.0) continue;
    Generator g{static_cast<int>(r.values[0]), r.values[9], r.values[8]};
    if (c.bus_index(g.bus) < 0) throw ParseError("generator at an unknown bus", "gen", r.line);
    GenCost cost;
    const double* coef = cr.values.data() + 4;
    if (ncoef == 3) cost = {coef[0], coef[1], coef[2]};
    if (ncoef == 2) cost = {0.0, coef[0], coef[1]};
    if (ncoef == 1) cost = {0.0, 0.0, coef[0]};
    if (cost.c2 < 0.0) throw ParseError("negative quadratic cost", "gencost", cr.line);
    c.gens.push_back(g);
    c.costs.push_back(cost);
  }
  return c;
}

CaseData load_matpower_case(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path, "file", 0);
  std::stringstream ss;
  ss << f.rdbuf();
  CaseData c = parse_matpower_case(ss.str());
  c.name = std::filesystem::path(path).stem().string();
  return c;
}

std::string write_matpower_case(const CaseData& c) {
  std::ostringstream o;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  o << "function mpc = " << (c.name.empty() ? "case" : c.name) << "\n";
  o << "mpc.version = '2';\n";
  o << "mpc.baseMVA = " << num(c.baseMVA) << ";\n\n";
  o << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  o << "mpc.bus = [\n";
  for (const Bus& b : c.buses) {
    o << "\t" << b.id << "\t" << b.type << "\t" << num(b.Pd)
      << "\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;\n";
  }
  o << "];\n\n";
  o << "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
  o << "mpc.gen = [\n";
  for (const Generator& g : c.gens) {
    o << "\t" << g.bus << "\t0\t0\t0\t0\t1\t" << num(c.baseMVA) << "\t1\t" << num(g.Pmax) << "\t"
      << num(g.Pmin) << ";\n";
  }
  o << "];\n\n";
  o << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
  o << "mpc.branch = [\n";
  for (const Branch& br : c.branches) {
    o << "\t" << br.from << "\t" << br.to << "\t0\t" << num(br.x) << "\t0\t" << num(br.rateA)
      << "\t0\t0\t0\t0\t1\t-360\t360;\n";
  }
  o << "];\n\n";
  o << "%\t2\tstartup\tshutdown\tn\tc(n-1)\t...\tc0\n";
  o << "mpc.gencost = [\n";
  for (const GenCost& k : c.costs) {
    o << "\t2\t0\t0\t3\t" << num(k.c2) << "\t" << num(k.c1) << "\t" << num(k.c0) << ";\n";
  }
  o << "];\n";
  return o.str();
}

DcMatrices build_dc_matrices(const CaseData& c) {
  const int n = static_cast<int>(c.buses.size());
  DcMatrices m;
  m.B = Eigen::MatrixXd::Zero(n, n);
  m.H = Eigen::MatrixXd::Zero(static_cast<int>(c.branches.size()), n);
  for (std::size_t r = 0; r < c.branches.size(); ++r) {
    const Branch& br = c.branches[r];
    if (!(br.x > 0.0)) throw ModelError("branch reactance must be positive");
    const int k = c.bus_index(br.from);
    const int l = c.bus_index(br.to);
    const double b = 1.0 / br.x;
    m.B(k, k) += b;
    m.B(l, l) += b;
    m.B(k, l) -= b;
    m.B(l, k) -= b;
    m.H(r, k) = b;
    m.H(r, l) = -b;
  }
  return m;
}

int MultiAreaSystem::num_buses() const {
  int n = 0;
  for (const auto& a : areas) n += static_cast<int>(a.buses.size());
  return n;
}

int MultiAreaSystem::global_index(const BusRef& r) const {
  int off = 0;
  for (int a = 0; a < r.area; ++a) off += static_cast<int>(areas[a].buses.size());
  return off + areas[r.area].bus_index(r.bus);
}

int MultiAreaSystem::boundary_index(const BusRef& r) const {
  const auto it = std::find(boundary.begin(), boundary.end(), r);
  return it == boundary.end() ? -1 : static_cast<int>(it - boundary.begin());
}

MultiAreaSystem stitch_areas(std::vector<CaseData> cases, std::vector<TieLine> ties,
                             BusRef reference, double default_capacity, double scaling) {
  if (cases.empty()) throw ModelError("no areas");
  MultiAreaSystem s;
  s.baseMVA = cases.front().baseMVA;
  for (const auto& c : cases) {
    if (c.baseMVA != s.baseMVA) throw ModelError("areas use different baseMVA");
  }
  auto check = [&](const BusRef& r, const char* what) {
    if (r.area < 0 || r.area >= static_cast<int>(cases.size()) ||
        cases[r.area].bus_index(r.bus) < 0) {
      throw ModelError(std::string(what) + " references a missing bus (area " +
                       std::to_string(r.area) + ", bus " + std::to_string(r.bus) + ")");
    }
  };
  check(reference, "reference");
  std::set<std::pair<int, int>> bnd;
  for (auto& t : ties) {
    check(t.from, "tie line");
    check(t.to, "tie line");
    if (t.from.area == t.to.area) throw ModelError("tie line inside one area");
    if (!(t.x > 0.0)) throw ModelError("tie line reactance must be positive");
    if (t.capacity <= 0.0) t.capacity = default_capacity;
    bnd.insert({t.from.area, cases[t.from.area].bus_index(t.from.bus)});
    bnd.insert({t.to.area, cases[t.to.area].bus_index(t.to.bus)});
  }
  for (const auto& [area, pos] : bnd) {
    const int id = cases[area].buses[pos].id;
    for (const auto& g : cases[area].gens) {
      if (g.bus == id) {
        throw ModelError("generator on boundary bus " + std::to_string(id) + " of area " +
                         std::to_string(area));
      }
    }
    s.boundary.push_back({area, id});
  }
  for (auto& c : cases) {
    for (auto& br : c.branches) {
      if (br.rateA <= 0.0) br.rateA = default_capacity;
    }
  }
  s.areas = std::move(cases);
  s.ties = std::move(ties);
  s.reference = reference;
  s.default_capacity = default_capacity;
  s.scaling = scaling;
  return s;
}

MultiAreaSystem single_area_system(const CaseData& c) {
  if (c.buses.empty()) throw ModelError("case has no buses");
  BusRef ref{0, c.buses.front().id};
  for (const auto& b : c.buses) {
    if (b.type == 3) {
      ref.bus = b.id;
      break;
    }
  }
  MultiAreaSystem s = stitch_areas({c}, {}, ref);
  s.name = c.name;
  return s;
}

MultiAreaSystem load_system(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path, "file", 0);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what(), "json", 0);
  }
  const auto dir = std::filesystem::path(path).parent_path();
  try {
    std::vector<CaseData> cases;
    for (const auto& a : j.at("areas")) cases.push_back(load_matpower_case((dir / a.get<std::string>()).string()));
    std::vector<TieLine> ties;
    for (const auto& t : j.value("tie_lines", Json::array())) {
      TieLine tl;
      tl.from = {t.at("from_area").get<int>(), t.at("from_bus").get<int>()};
      tl.to = {t.at("to_area").get<int>(), t.at("to_bus").get<int>()};
      tl.x = t.at("x").get<double>();
      tl.capacity = t.value("capacity", 0.0);
      ties.push_back(tl);
    }
    const BusRef ref{j.at("reference").at("area").get<int>(),
                     j.at("reference").at("bus").get<int>()};
    double cap = 800.0;
    if (j.contains("defaults")) cap = j["defaults"].value("capacity_mw", 800.0);
    MultiAreaSystem s = stitch_areas(std::move(cases), std::move(ties), ref, cap,
                                     j.value("scaling", 0.01));
    s.name = j.value("name", std::filesystem::path(path).stem().string());
    return s;
  } catch (const Json::exception& e) {
    throw ParseError(e.what(), "json", 0);
  }
}

DcMatrices build_dc_matrices(const MultiAreaSystem& s) {
  const int n = s.num_buses();
  int rows = static_cast<int>(s.ties.size());
  for (const auto& a : s.areas) rows += static_cast<int>(a.branches.size());
  DcMatrices m;
  m.B = Eigen::MatrixXd::Zero(n, n);
  m.H = Eigen::MatrixXd::Zero(rows, n);
  int r = 0;
  auto add = [&](int k, int l, double x) {
    if (!(x > 0.0)) throw ModelError("branch reactance must be positive");
    const double b = 1.0 / x;
    m.B(k, k) += b;
    m.B(l, l) += b;
    m.B(k, l) -= b;
    m.B(l, k) -= b;
    m.H(r, k) = b;
    m.H(r, l) = -b;
    ++r;
  };
  for (int a = 0; a < static_cast<int>(s.areas.size()); ++a) {
    for (const auto& br : s.areas[a].branches) {
      add(s.global_index({a, br.from}), s.global_index({a, br.to}), br.x);
    }
  }
  for (const auto& t : s.ties) add(s.global_index(t.from), s.global_index(t.to), t.x);
  return m;
}

std::vector<Agent> SystemCompilation::agents() const {
  std::vector<Agent> out;
  for (const auto& a : areas) out.push_back(a.agent);
  return out;
}

namespace {

// Affine expression in (g, theta).
struct Expr {
  Eigen::RowVectorXd g;
  Eigen::RowVectorXd th;
  double c = 0.0;
};

void clean(Eigen::RowVectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) < 1e-13) v(i) = 0.0;
  }
}

struct RowSink {
  std::vector<Eigen::RowVectorXd> A, C;
  std::vector<double> b;
  // e.g + e.th theta + e.c <= rhs
  void le(Expr e, double rhs) {
    clean(e.g);
    clean(e.th);
    A.push_back(e.g);
    C.push_back(-e.th);
    b.push_back(rhs - e.c);
  }
  void eq(const Expr& e, double rhs) {
    le(e, rhs);
    le({-e.g, -e.th, -e.c}, -rhs);
  }
};

}  // namespace

SystemCompilation compile_agents(const MultiAreaSystem& s) {
  const int d = static_cast<int>(s.boundary.size());
  const double base = s.baseMVA;
  const double sc = s.scaling;
  const DcMatrices global = build_dc_matrices(s);
  SystemCompilation out;
  out.scaling = sc;

  for (int a = 0; a < static_cast<int>(s.areas.size()); ++a) {
    const CaseData& c = s.areas[a];
    const int nb = static_cast<int>(c.buses.size());
    const int ng = static_cast<int>(c.gens.size());
    if (ng == 0) throw ModelError("area " + std::to_string(a) + " has no generators");
    std::vector<int> param_of(nb, -1);
    std::vector<int> internal;
    for (int k = 0; k < nb; ++k) {
      param_of[k] = s.boundary_index({a, c.buses[k].id});
      if (param_of[k] < 0) internal.push_back(k);
    }
    const int ni = static_cast<int>(internal.size());
    if (ni == 0) throw ModelError("area " + std::to_string(a) + " has no internal buses");
    std::vector<int> pos_internal(nb, -1);
    for (int i = 0; i < ni; ++i) pos_internal[internal[i]] = i;

    const DcMatrices local = build_dc_matrices(c);
    Eigen::MatrixXd B_II(ni, ni), E = Eigen::MatrixXd::Zero(ni, ng), B_Ib = Eigen::MatrixXd::Zero(ni, d);
    Eigen::VectorXd d_I(ni);
    for (int i = 0; i < ni; ++i) {
      for (int j = 0; j < ni; ++j) B_II(i, j) = local.B(internal[i], internal[j]);
      for (int k = 0; k < nb; ++k) {
        if (param_of[k] >= 0) B_Ib(i, param_of[k]) += local.B(internal[i], k) * sc;
      }
      d_I(i) = c.buses[internal[i]].Pd / base;
    }
    for (int g = 0; g < ng; ++g) E(pos_internal[c.bus_index(c.gens[g].bus)], g) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B_II);
    if (!lu.isInvertible()) {
      throw ModelError("area " + std::to_string(a) + " has internal buses cut off from its boundary");
    }

    AreaCompilation comp;
    comp.area = a;
    comp.internal = internal;
    for (int g = 0; g < ng; ++g) comp.gens.push_back(g);
    comp.angle_g = lu.solve(E);
    comp.angle_theta = -lu.solve(B_Ib);
    comp.angle_0 = -lu.solve(d_I);

    auto angle = [&](int area, int k) {
      Expr e{Eigen::RowVectorXd::Zero(ng), Eigen::RowVectorXd::Zero(d), 0.0};
      const int p = s.boundary_index({area, s.areas[area].buses[k].id});
      if (p >= 0) {
        e.th(p) = sc;
      } else {
        const int i = pos_internal[k];
        e.g = comp.angle_g.row(i);
        e.th = comp.angle_theta.row(i);
        e.c = comp.angle_0(i);
      }
      return e;
    };

    RowSink rows;
    // Boundary bus balance, owned by this area.
    int offset = 0;
    for (int b = 0; b < a; ++b) offset += static_cast<int>(s.areas[b].buses.size());
    for (int k = 0; k < nb; ++k) {
      if (param_of[k] < 0) continue;
      Expr e{Eigen::RowVectorXd::Zero(ng), Eigen::RowVectorXd::Zero(d), 0.0};
      const int gk = offset + k;
      for (int l = 0; l < global.B.cols(); ++l) {
        const double w = global.B(gk, l);
        if (w == 0.0) continue;
        int area = 0, pos = l;
        while (pos >= static_cast<int>(s.areas[area].buses.size())) {
          pos -= static_cast<int>(s.areas[area].buses.size());
          ++area;
        }
        const Expr al = angle(area, pos);
        e.g += w * al.g;
        e.th += w * al.th;
        e.c += w * al.c;
      }
      rows.eq(e, -c.buses[k].Pd / base);
    }
    if (s.reference.area == a && param_of[c.bus_index(s.reference.bus)] < 0) {
      rows.eq(angle(a, c.bus_index(s.reference.bus)), 0.0);
    }
    for (const Branch& br : c.branches) {
      const Expr f = angle(a, c.bus_index(br.from));
      const Expr t = angle(a, c.bus_index(br.to));
      const double y = 1.0 / br.x;
      const Expr flow{y * (f.g - t.g), y * (f.th - t.th), y * (f.c - t.c)};
      const double cap = br.rateA / base;
      rows.le(flow, cap);
      rows.le({-flow.g, -flow.th, -flow.c}, cap);
    }
    for (int g = 0; g < ng; ++g) {
      Expr e{Eigen::RowVectorXd::Zero(ng), Eigen::RowVectorXd::Zero(d), 0.0};
      e.g(g) = 1.0;
      rows.le(e, c.gens[g].Pmax / base);
      if (c.gens[g].Pmin > 0.0) rows.le({-e.g, e.th, 0.0}, -c.gens[g].Pmin / base);
    }

    MpQP p;
    const int m = static_cast<int>(rows.b.size());
    p.H = Eigen::MatrixXd::Zero(ng, ng);
    p.f.resize(ng);
    for (int g = 0; g < ng; ++g) {
      p.H(g, g) = 2.0 * c.costs[g].c2 * base * base;
      p.f(g) = c.costs[g].c1 * base;
      comp.constant_cost += c.costs[g].c0;
    }
    p.A.resize(m, ng);
    p.C.resize(m, d);
    p.b.resize(m);
    for (int r = 0; r < m; ++r) {
      p.A.row(r) = rows.A[r];
      p.C.row(r) = rows.C[r];
      p.b(r) = rows.b[r];
    }
    p.signs.assign(ng, VarSign::Nonneg);
    comp.agent = {c.name.empty() ? "area" + std::to_string(a) : c.name, p};
    out.areas.push_back(std::move(comp));
  }

  out.Theta = HPolyhedron::whole_space(d);
  const double pi = std::numbers::pi;
  for (const TieLine& t : s.ties) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
    row(s.boundary_index(t.from)) = sc / t.x;
    row(s.boundary_index(t.to)) = -sc / t.x;
    out.Theta.add_row(row, t.capacity / base);
    out.Theta.add_row(-row, t.capacity / base);
  }
  for (int j = 0; j < d; ++j) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
    row(j) = sc;
    out.Theta.add_row(row, pi);
    out.Theta.add_row(-row, pi);
  }
  const int ref = s.boundary_index(s.reference);
  if (ref >= 0) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(d);
    row(ref) = sc;
    out.Theta.add_row(row, 0.0, true);
  }
  return out;
}

DispatchSolution centralized_solve(const MultiAreaSystem& s) {
  const double base = s.baseMVA;
  const int nb = s.num_buses();
  int ng = 0;
  for (const auto& a : s.areas) ng += static_cast<int>(a.gens.size());
  const int n = ng + nb;
  const DcMatrices dc = build_dc_matrices(s);

  ConvexQp qp;
  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.f = Eigen::VectorXd::Zero(n);
  qp.A_in.resize(0, n);
  qp.b_in.resize(0);
  qp.A_eq.resize(0, n);
  qp.b_eq.resize(0);
  qp.signs.assign(n, VarSign::Free);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nb, ng);
  Eigen::VectorXd load(nb);
  int gi = 0;
  for (int a = 0; a < static_cast<int>(s.areas.size()); ++a) {
    const CaseData& c = s.areas[a];
    for (std::size_t g = 0; g < c.gens.size(); ++g, ++gi) {
      qp.signs[gi] = VarSign::Nonneg;
      qp.H(gi, gi) = 2.0 * c.costs[g].c2 * base * base;
      qp.f(gi) = c.costs[g].c1 * base;
      E(s.global_index({a, c.gens[g].bus}), gi) = 1.0;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row(gi) = 1.0;
      qp.add_inequality(row, c.gens[g].Pmax / base);
      if (c.gens[g].Pmin > 0.0) qp.add_inequality(-row, -c.gens[g].Pmin / base);
    }
    for (const auto& b : c.buses) load(s.global_index({a, b.id})) = b.Pd / base;
  }
  for (int k = 0; k < nb; ++k) {
    Eigen::RowVectorXd row(n);
    row << -E.row(k), dc.B.row(k);
    qp.add_equality(row, -load(k));
  }
  std::vector<double> caps;
  for (const auto& a : s.areas) {
    for (const auto& br : a.branches) caps.push_back(br.rateA / base);
  }
  for (const auto& t : s.ties) caps.push_back(t.capacity / base);
  for (int r = 0; r < dc.H.rows(); ++r) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row.tail(nb) = dc.H.row(r);
    qp.add_inequality(row, caps[r]);
    qp.add_inequality(-row, caps[r]);
  }
  for (const BusRef& b : s.boundary) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(ng + s.global_index(b)) = 1.0;
    qp.add_inequality(row, std::numbers::pi);
    qp.add_inequality(-row, std::numbers::pi);
  }
  {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(ng + s.global_index(s.reference)) = 1.0;
    qp.add_equality(row, 0.0);
  }
  const QpResult r = solve_qp(qp);
  DispatchSolution out;
  out.J = r.objective;
  out.g = r.x.head(ng) * base;
  out.delta = r.x.tail(nb);
  out.theta.resize(static_cast<int>(s.boundary.size()));
  for (std::size_t j = 0; j < s.boundary.size(); ++j) {
    out.theta(j) = out.delta(s.global_index(s.boundary[j])) / s.scaling;
  }
  return out;
}

DispatchSolution centralized_solve(const CaseData& c) {
  return centralized_solve(single_area_system(c));
}

DispatchSolution assemble_dispatch(const MultiAreaSystem& s, const SystemCompilation& comp,
                                   const Eigen::VectorXd& theta) {
  DispatchSolution out;
  out.theta = theta;
  out.delta = Eigen::VectorXd::Zero(s.num_buses());
  std::vector<double> g_all;
  int offset = 0;
  for (std::size_t a = 0; a < comp.areas.size(); ++a) {
    const AreaCompilation& ac = comp.areas[a];
    const QpResult r = solve_qp(ac.agent.problem.at(theta));
    out.J += r.objective;
    for (int i = 0; i < r.x.size(); ++i) g_all.push_back(r.x(i) * s.baseMVA);
    const Eigen::VectorXd ang = ac.angle_g * r.x + ac.angle_theta * theta + ac.angle_0;
    for (std::size_t i = 0; i < ac.internal.size(); ++i) out.delta(offset + ac.internal[i]) = ang(i);
    offset += static_cast<int>(s.areas[a].buses.size());
  }
  for (std::size_t j = 0; j < s.boundary.size(); ++j) {
    out.delta(s.global_index(s.boundary[j])) = s.scaling * theta(j);
  }
  out.g = Eigen::Map<Eigen::VectorXd>(g_all.data(), static_cast<int>(g_all.size()));
  return out;
}

}  // namespace crex
