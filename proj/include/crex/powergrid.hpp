#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crex/cre.hpp"
#include "crex/polyhedra.hpp"

namespace crex {

struct Bus {
  int id = 0;
  int type = 1;
  /// Active load, MW.
  double Pd = 0.0;
  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from = 0;
  int to = 0;
  /// Series reactance, p.u.
  double x = 0.0;
  /// Rating, MW. Zero means unrated.
  double rateA = 0.0;
  bool operator==(const Branch&) const = default;
};

struct Generator {
  int bus = 0;
  double Pmin = 0.0;
  double Pmax = 0.0;
  bool operator==(const Generator&) const = default;
};

/// Polynomial cost c2 P^2 + c1 P + c0 with P in MW.
struct GenCost {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;
  bool operator==(const GenCost&) const = default;
};

struct CaseData {
  std::string name;
  double baseMVA = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> gens;
  std::vector<GenCost> costs;

  /// Position of a bus id in `buses`, or -1.
  int bus_index(int id) const;
  bool operator==(const CaseData&) const = default;
};

/// Parses the numeric subset of a MATPOWER case file (mpc.baseMVA, mpc.bus,
/// mpc.branch, mpc.gen, mpc.gencost). Throws ParseError.
CaseData parse_matpower_case(const std::string& text);
CaseData load_matpower_case(const std::string& path);
std::string write_matpower_case(const CaseData& c);

struct DcMatrices {
  /// Nodal susceptance matrix.
  Eigen::MatrixXd B;
  /// Branch flow matrix, one row per branch: flow = H * angles (p.u.).
  Eigen::MatrixXd H;
};

DcMatrices build_dc_matrices(const CaseData& c);

struct BusRef {
  int area = 0;
  /// Bus id within the area's case.
  int bus = 0;
  bool operator==(const BusRef&) const = default;
  bool operator<(const BusRef& o) const {
    return area != o.area ? area < o.area : bus < o.bus;
  }
};

struct TieLine {
  BusRef from;
  BusRef to;
  double x = 0.0;
  /// MW. Zero or negative means use the system default.
  double capacity = 0.0;
};

struct MultiAreaSystem {
  std::string name;
  std::vector<CaseData> areas;
  std::vector<TieLine> ties;
  BusRef reference;
  /// Boundary buses ordered by (area, position in the area's bus list).
  /// This is the parameter order.
  std::vector<BusRef> boundary;
  double default_capacity = 800.0;
  /// Boundary angle = scaling * parameter.
  double scaling = 0.01;
  double baseMVA = 100.0;

  int num_buses() const;
  /// Global index of a bus: areas in order, buses in case order.
  int global_index(const BusRef& r) const;
  int boundary_index(const BusRef& r) const;
};

/// Validates the ties and registers boundary buses. Unrated lines and ties
/// get the default capacity. Throws ModelError.
MultiAreaSystem stitch_areas(std::vector<CaseData> cases, std::vector<TieLine> ties,
                             BusRef reference, double default_capacity = 800.0,
                             double scaling = 0.01);

/// One area treated as a whole system without ties. The reference is the
/// type-3 bus, else the first bus.
MultiAreaSystem single_area_system(const CaseData& c);

/// Reads the multi-area JSON config. Case paths are relative to the config.
MultiAreaSystem load_system(const std::string& path);

/// Global matrices, internal branches of every area first, then ties.
DcMatrices build_dc_matrices(const MultiAreaSystem& s);

struct AreaCompilation {
  Agent agent;
  int area = 0;
  /// Generator positions within the area's case, one per variable.
  std::vector<int> gens;
  /// Area bus positions of internal buses.
  std::vector<int> internal;
  /// Internal angles = angle_g * g + angle_theta * theta + angle_0.
  Eigen::MatrixXd angle_g;
  Eigen::MatrixXd angle_theta;
  Eigen::VectorXd angle_0;
  /// Constant cost terms left out of the agent objective.
  double constant_cost = 0.0;
};

struct SystemCompilation {
  std::vector<AreaCompilation> areas;
  HPolyhedron Theta;
  double scaling = 0.01;

  std::vector<Agent> agents() const;
};

/// Per-area problems over generation (p.u.) with internal angles eliminated.
/// Parameters are scaled boundary angles.
SystemCompilation compile_agents(const MultiAreaSystem& s);

struct DispatchSolution {
  /// Total cost without constant terms.
  double J = 0.0;
  /// Generation, MW, areas in order.
  Eigen::VectorXd g;
  /// Bus angles, rad, global order.
  Eigen::VectorXd delta;
  /// Parameter value of the boundary angles.
  Eigen::VectorXd theta;
};

/// Monolithic DC dispatch over all angles and generators.
DispatchSolution centralized_solve(const MultiAreaSystem& s);
DispatchSolution centralized_solve(const CaseData& c);

/// Generation (MW) and angles (rad) of every area at a parameter value.
DispatchSolution assemble_dispatch(const MultiAreaSystem& s, const SystemCompilation& comp,
                                   const Eigen::VectorXd& theta);

}  // namespace crex
