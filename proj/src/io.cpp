#include "crex/io.hpp"

#include <fstream>
#include <sstream>

namespace crex {

Json to_json(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field + " must be an array of rows", field, 0);
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd M(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ParseError(field + " row " + std::to_string(i) + " has the wrong length",
                       field, static_cast<int>(i));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) {
        throw ParseError(field + " holds a non-numeric entry", field, static_cast<int>(i));
      }
      M(i, c) = j[i][c].get<double>();
    }
  }
  return M;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field + " must be an array", field, 0);
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(field + " holds a non-numeric entry", field, static_cast<int>(i));
    }
    v(i) = j[i].get<double>();
  }
  return v;
}

MpQP problem_from_json(const Json& j) {
  for (const char* key : {"H", "f", "A", "b", "C", "signs"}) {
    if (!j.contains(key)) throw ParseError(std::string("missing field ") + key, key, 0);
  }
  MpQP p;
  p.f = vector_from_json(j["f"], "f");
  const int n = static_cast<int>(p.f.size());
  p.H = matrix_from_json(j["H"], "H");
  if (p.H.size() == 0) p.H = Eigen::MatrixXd::Zero(n, n);
  p.b = vector_from_json(j["b"], "b");
  const int m = static_cast<int>(p.b.size());
  p.A = matrix_from_json(j["A"], "A");
  if (m == 0) p.A.resize(0, n);
  int d = j.contains("d") ? j["d"].get<int>() : -1;
  p.C = matrix_from_json(j["C"], "C");
  if (m == 0) {
    if (d < 0) throw ParseError("d is required when there are no rows", "d", 0);
    p.C.resize(0, d);
  } else if (d >= 0 && p.C.cols() != d) {
    throw ParseError("C has the wrong number of columns", "C", 0);
  }
  if (!j["signs"].is_array()) throw ParseError("signs must be an array", "signs", 0);
  for (const Json& s : j["signs"]) {
    const std::string v = s.is_string() ? s.get<std::string>() : "";
    if (v == "free") {
      p.signs.push_back(VarSign::Free);
    } else if (v == "nonneg") {
      p.signs.push_back(VarSign::Nonneg);
    } else {
      throw ParseError("sign must be \"free\" or \"nonneg\"", "signs", 0);
    }
  }
  try {
    p.validate();
  } catch (const DimensionError& e) {
    throw ParseError(e.what(), "problem", 0);
  }
  return p;
}

Json problem_to_json(const MpQP& p) {
  Json j;
  j["H"] = to_json(p.H);
  j["f"] = to_json(p.f);
  j["A"] = to_json(p.A);
  j["b"] = to_json(p.b);
  j["C"] = to_json(p.C);
  j["d"] = p.d();
  Json signs = Json::array();
  for (VarSign s : p.signs) signs.push_back(s == VarSign::Free ? "free" : "nonneg");
  j["signs"] = signs;
  return j;
}

MpQP load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, "file", 0);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), "file",
                     static_cast<int>(e.byte));
  }
  return problem_from_json(j);
}

namespace {

Json basis_json(const ComplementaryBasis& b) { return Json(b.indices()); }

}  // namespace

Json region_to_json(const CriticalRegion& r) {
  Json j;
  j["basis"] = basis_json(r.basis);
  j["A"] = to_json(r.region.A());
  j["b"] = to_json(r.region.b());
  j["lower_dimensional"] = r.lower_dimensional;
  j["chebyshev_radius"] = r.chebyshev_radius;
  j["value_function"] = {{"H", to_json(r.vf.H)}, {"f", to_json(r.vf.f)}, {"c", r.vf.c}};
  j["x_map"] = {{"T", to_json(r.x_map.T)}, {"k", to_json(r.x_map.k)}};
  return j;
}

Json bundle_to_json(const RegionBundle& b) {
  Json j;
  j["theta"] = to_json(b.theta);
  j["unique"] = b.verdict.unique();
  j["degenerate_pairs"] = b.degenerate_pairs;
  Json verts = Json::array();
  for (const auto& v : b.vertices) verts.push_back(to_json(v));
  j["vertices"] = verts;
  Json bases = Json::array();
  for (const auto& B : b.bases) bases.push_back(basis_json(B));
  j["bases"] = bases;
  j["region_of_basis"] = b.region_of_basis;
  Json regions = Json::array();
  for (const auto& r : b.regions) regions.push_back(region_to_json(r));
  j["regions"] = regions;
  return j;
}

Eigen::VectorXd parse_csv_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("bad number '" + item + "'", "theta", 0);
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw ParseError("bad number '" + item + "'", "theta", 0);
    }
    vals.push_back(v);
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace crex
