#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crex/baselines.hpp"
#include "crex/cre.hpp"
#include "crex/degeneracy.hpp"
#include "crex/io.hpp"
#include "crex/lcp.hpp"
#include "crex/powergrid.hpp"

namespace py = pybind11;
using namespace crex;

namespace {

py::object from_json(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

MpQP problem_arg(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return load_problem(obj.cast<std::string>());
  const std::string text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return problem_from_json(Json::parse(text));
}

py::dict record_dict(const IterationRecord& r) {
  py::dict d;
  d["k"] = r.k;
  d["theta"] = r.theta;
  d["J"] = r.J;
  d["v_norm"] = r.v_norm;
  d["eps_k"] = r.eps_k;
  d["step"] = r.step;
  d["cuts_added"] = r.cuts_added;
  d["regions_per_agent"] = r.regions_per_agent;
  return d;
}

py::list trace_list(const std::vector<IterationRecord>& trace) {
  py::list out;
  for (const auto& r : trace) out.append(record_dict(r));
  return out;
}

struct Loaded {
  MultiAreaSystem system;
  SystemCompilation comp;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.system = load_system(path);
  l.comp = compile_agents(l.system);
  return l;
}

}  // namespace

PYBIND11_MODULE(crex, m) {
  m.doc() = "Critical region exploration for multi-area dispatch";
  m.attr("__version__") = CREX_VERSION;

  // Translators run newest first, so the base class goes in first.
  const auto& base = py::register_exception<Error>(m, "Error");
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base);
  py::register_exception<CapacityError>(m, "CapacityError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<NonConvergedError>(m, "NonConvergedError", base);

  m.def(
      "lemke_solve",
      [](const Eigen::MatrixXd& M, const Eigen::VectorXd& q) {
        const LcpSolution s = lemke_solve(Lcp(M, q));
        py::dict d;
        d["solved"] = s.status == LcpStatus::Solved;
        d["w"] = s.w;
        d["z"] = s.z;
        d["z0"] = s.z0;
        d["pivots"] = s.pivots.size();
        if (s.basis) d["basis"] = s.basis->indices();
        return d;
      },
      py::arg("M"), py::arg("q"), "Solve w = Mz + q, w, z >= 0, w'z = 0.");

  m.def(
      "regions",
      [](const py::object& problem, const Eigen::VectorXd& theta) {
        return from_json(bundle_to_json(all_regions_containing(problem_arg(problem), theta)));
      },
      py::arg("problem"), py::arg("theta"),
      "All critical regions containing theta. `problem` is a path or a dict with "
      "H, f, A, b, C and signs.");

  m.def(
      "centralized",
      [](const std::string& system) {
        const DispatchSolution s = centralized_solve(load_system(system));
        py::dict d;
        d["J"] = s.J;
        d["g"] = s.g;
        d["theta"] = s.theta;
        return d;
      },
      py::arg("system"));

  m.def(
      "cre_run",
      [](const std::string& system, double eps0, double alpha, double beta, double v_tol,
         int max_iter, int threads, const std::optional<Eigen::VectorXd>& theta0) {
        const Loaded l = load(system);
        CreConfig cfg;
        cfg.eps0 = eps0;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.v_tol = v_tol;
        cfg.max_iter = max_iter;
        cfg.threads = threads;
        cfg.theta0 = theta0;
        CreResult r;
        {
          py::gil_scoped_release release;
          r = run_cre(l.comp.agents(), l.comp.Theta, cfg);
        }
        py::dict d;
        d["theta"] = r.theta;
        d["J"] = r.J;
        d["v_norm"] = r.certificate.v.norm();
        d["iterations"] = r.iterations;
        d["cuts"] = r.cuts.size();
        d["total_ms"] = r.total_ms;
        d["trace"] = trace_list(r.trace);
        return d;
      },
      py::arg("system"), py::arg("eps0") = 1e-2, py::arg("alpha") = 2.0, py::arg("beta") = 0.5,
      py::arg("v_tol") = 1e-2, py::arg("max_iter") = 500, py::arg("threads") = 1,
      py::arg("theta0") = std::nullopt);

  m.def(
      "baseline",
      [](const std::string& system, const std::string& method, double rho, double tol,
         const std::optional<Eigen::VectorXd>& theta0) {
        const Loaded l = load(system);
        BaselineResult r;
        if (method == "admm") {
          AdmmConfig cfg;
          cfg.rho = rho;
          cfg.tol = tol;
          cfg.theta0 = theta0;
          py::gil_scoped_release release;
          r = admm_run(l.comp.agents(), l.comp.Theta, cfg);
        } else if (method == "benders") {
          BendersConfig cfg;
          cfg.gap_tol = tol;
          cfg.theta0 = theta0;
          py::gil_scoped_release release;
          r = benders_run(l.comp.agents(), l.comp.Theta, cfg);
        } else {
          throw py::value_error("method must be 'admm' or 'benders'");
        }
        py::dict d;
        d["theta"] = r.theta;
        d["J"] = r.J;
        d["metric"] = r.metric;
        d["iterations"] = r.iterations;
        d["trace"] = trace_list(r.trace);
        return d;
      },
      py::arg("system"), py::arg("method") = "admm", py::arg("rho") = 0.1, py::arg("tol") = 1e-3,
      py::arg("theta0") = std::nullopt);
}
