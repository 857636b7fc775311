#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "crex/baselines.hpp"
#include "crex/cre.hpp"
#include "crex/degeneracy.hpp"
#include "crex/io.hpp"
#include "crex/powergrid.hpp"

#ifndef CREX_VERSION
#define CREX_VERSION "0.0.0"
#endif

namespace crex::cli {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

bool debug_log() {
  const char* v = std::getenv("CREX_LOG");
  return v != nullptr && std::string(v) == "debug";
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json record_json(const IterationRecord& r, const std::string& system, int run) {
  Json j;
  j["method"] = r.method;
  j["system"] = system;
  j["run"] = run;
  j["k"] = r.k;
  j["theta"] = to_json(r.theta);
  j["J"] = number_or_null(r.J);
  j["v_norm"] = number_or_null(r.v_norm);
  j["eps_k"] = r.eps_k;
  j["regions_per_agent"] = r.regions_per_agent;
  j["cuts_added"] = r.cuts_added;
  j["step"] = r.step;
  j["lower"] = number_or_null(r.lower);
  j["upper"] = number_or_null(r.upper);
  j["wall_ms"] = r.wall_ms;
  j["cre_solving_ms"] = r.cre_solving_ms;
  j["degeneracy_ms"] = r.degeneracy_ms;
  return j;
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(12) << v;
  return o.str();
}

struct SummaryRow {
  std::string method, system, start;
  int iters = 0;
  double total_ms = 0, cre_ms = 0, deg_ms = 0, J = 0, metric = 0;
  int run = 0;
  std::uint64_t seed = 0;
};

constexpr const char* kSummaryHeader =
    "method,system,start,iters,total_ms,cre_solving_ms,degeneracy_ms,J,v_norm_or_gap,run,seed";

void append_summary(const std::string& path, const SummaryRow& r, std::ostream& out) {
  std::ostringstream line;
  line << r.method << ',' << r.system << ',' << r.start << ',' << r.iters << ','
       << fmt(r.total_ms) << ',' << fmt(r.cre_ms) << ',' << fmt(r.deg_ms) << ',' << fmt(r.J) << ','
       << fmt(r.metric) << ',' << r.run << ',' << r.seed;
  if (path.empty()) {
    out << line.str() << '\n';
    return;
  }
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream f(path, std::ios::app);
  if (fresh) f << kSummaryHeader << '\n';
  f << line.str() << '\n';
}

struct RunOptions {
  std::string system;
  std::string start = "cold";
  std::uint64_t seed = 0;
  int repeat = 1;
  int threads = 1;
  std::string trace;
  std::string summary;
  std::string manifest;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--system", o.system, "Multi-area system config (JSON)")->required();
  cmd->add_option("--start", o.start, "Starting point")->check(CLI::IsMember({"cold", "random"}));
  cmd->add_option("--seed", o.seed, "Seed for random starts");
  cmd->add_option("--repeat", o.repeat, "Number of runs")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Agent evaluation threads")->check(CLI::PositiveNumber);
  cmd->add_option("--trace", o.trace, "Per-iteration trace (JSON lines)");
  cmd->add_option("--summary", o.summary, "Summary CSV, appended");
  cmd->add_option("--manifest", o.manifest, "Run manifest (JSON)");
}

// Random starts draw boundary angles, then map them to the parameter.
std::optional<Eigen::VectorXd> start_point(const RunOptions& o, int dim, double scaling, int run) {
  if (o.start == "cold") return std::nullopt;
  std::mt19937_64 rng(o.seed + static_cast<std::uint64_t>(run));
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  Eigen::VectorXd t(dim);
  for (int i = 0; i < dim; ++i) t(i) = u(rng) / scaling;
  return t;
}

void write_manifest(const RunOptions& o, const std::string& command, const std::string& flags,
                    double total_ms, double cre_ms, double deg_ms) {
  if (o.manifest.empty()) return;
  Json m;
  m["command"] = command;
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(read_file(o.system) + "\n" + flags);
  m["config_hash"] = hash.str();
  m["seed"] = o.seed;
  m["version"] = CREX_VERSION;
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["wall_clock"] = buf;
  m["timing"] = {{"total_ms", total_ms}, {"cre_solving_ms", cre_ms}, {"degeneracy_ms", deg_ms}};
  std::ofstream(o.manifest) << m.dump(2) << '\n';
}

// Loads and compiles; reports failures as exit codes.
struct Loaded {
  MultiAreaSystem sys;
  SystemCompilation comp;
};

std::optional<Loaded> load(const RunOptions& o, std::ostream& err, int& code) {
  try {
    Loaded l;
    l.sys = load_system(o.system);
    l.comp = compile_agents(l.sys);
    return l;
  } catch (const ParseError& e) {
    err << Json{{"error", "parse"}, {"message", e.what()}, {"section", e.section()}, {"line", e.line()}}.dump()
        << '\n';
  } catch (const Error& e) {
    err << Json{{"error", "model"}, {"message", e.what()}}.dump() << '\n';
  }
  code = kInputError;
  return std::nullopt;
}

std::string system_name(const Loaded& l) { return l.sys.name; }

int report_failure(std::ostream& err) {
  try {
    throw;
  } catch (const NonConvergedError& e) {
    err << Json{{"error", "not_converged"}, {"message", e.what()}, {"iterations", e.trace().size()}}.dump()
        << '\n';
    return kNotConverged;
  } catch (const InfeasibleError& e) {
    err << Json{{"error", "infeasible"}, {"message", e.what()}, {"z0", e.z0()}}.dump() << '\n';
    return kInfeasible;
  } catch (const CapacityError& e) {
    err << Json{{"error", "capacity"}, {"message", e.what()}}.dump() << '\n';
    return kCapacity;
  } catch (const std::exception& e) {
    err << Json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return kInputError;
  }
}

class TraceSink {
 public:
  explicit TraceSink(const std::string& path) {
    if (!path.empty()) f_.open(path);
  }
  void write(const IterationRecord& r, const std::string& system, int run) {
    if (f_.is_open()) f_ << record_json(r, system, run).dump() << '\n';
    if (debug_log()) {
      std::cerr << r.method << " k=" << r.k << " J=" << r.J << " metric=" << r.v_norm << '\n';
    }
  }

 private:
  std::ofstream f_;
};

int cmd_regions(const std::string& problem_path, const std::string& theta_csv,
                const std::string& out_path, std::ostream& out, std::ostream& err) {
  MpQP problem;
  Eigen::VectorXd theta;
  try {
    problem = load_problem(problem_path);
    theta = parse_csv_vector(theta_csv);
    if (theta.size() != problem.d()) {
      throw ParseError("theta has " + std::to_string(theta.size()) + " entries, problem has d = " +
                           std::to_string(problem.d()),
                       "theta", 0);
    }
  } catch (const ParseError& e) {
    err << Json{{"error", "parse"}, {"message", e.what()}, {"section", e.section()}, {"line", e.line()}}.dump()
        << '\n';
    return kInputError;
  } catch (const Error& e) {
    err << Json{{"error", "parse"}, {"message", e.what()}}.dump() << '\n';
    return kInputError;
  }
  try {
    const RegionBundle b = all_regions_containing(problem, theta);
    const std::string text = bundle_to_json(b).dump(2);
    if (out_path.empty()) {
      out << text << '\n';
    } else {
      std::ofstream(out_path) << text << '\n';
    }
    return kOk;
  } catch (...) {
    return report_failure(err);
  }
}

int cmd_cre(const RunOptions& o, const CreConfig& base, const std::string& flags, std::ostream& out,
            std::ostream& err) {
  int code = kOk;
  auto l = load(o, err, code);
  if (!l) return code;
  TraceSink trace(o.trace);
  double total = 0, cre_ms = 0, deg_ms = 0;
  for (int run = 0; run < o.repeat; ++run) {
    CreConfig cfg = base;
    cfg.threads = o.threads;
    cfg.theta0 = start_point(o, l->comp.Theta.dim(), l->comp.scaling, run);
    try {
      const CreResult r = run_cre(l->comp.agents(), l->comp.Theta, cfg,
                                  [&](const IterationRecord& rec) { trace.write(rec, system_name(*l), run); });
      append_summary(o.summary,
                     {"cre", system_name(*l), o.start, r.iterations, r.total_ms, r.cre_solving_ms,
                      r.degeneracy_ms, r.J, r.certificate.v.norm(), run, o.seed},
                     out);
      total += r.total_ms;
      cre_ms += r.cre_solving_ms;
      deg_ms += r.degeneracy_ms;
    } catch (...) {
      return report_failure(err);
    }
  }
  write_manifest(o, "cre-run", flags, total, cre_ms, deg_ms);
  return kOk;
}

int cmd_baseline(const RunOptions& o, const std::string& method, double rho, const std::string& flags,
                 std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto l = load(o, err, code);
  if (!l) return code;
  TraceSink trace(o.trace);
  double total = 0;
  for (int run = 0; run < o.repeat; ++run) {
    const auto start = start_point(o, l->comp.Theta.dim(), l->comp.scaling, run);
    auto cb = [&](const IterationRecord& rec) { trace.write(rec, system_name(*l), run); };
    try {
      BaselineResult r;
      if (method == "admm") {
        AdmmConfig c;
        c.rho = rho;
        c.theta0 = start;
        r = admm_run(l->comp.agents(), l->comp.Theta, c, cb);
      } else {
        BendersConfig c;
        c.theta0 = start;
        r = benders_run(l->comp.agents(), l->comp.Theta, c, cb);
      }
      append_summary(o.summary,
                     {method, system_name(*l), o.start, r.iterations, r.total_ms, r.total_ms, 0.0, r.J,
                      r.metric, run, o.seed},
                     out);
      total += r.total_ms;
    } catch (...) {
      return report_failure(err);
    }
  }
  write_manifest(o, "baseline", flags, total, total, 0.0);
  return kOk;
}

int cmd_centralized(const RunOptions& o, std::ostream& out, std::ostream& err) {
  int code = kOk;
  auto l = load(o, err, code);
  if (!l) return code;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const DispatchSolution s = centralized_solve(l->sys);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    append_summary(o.summary,
                   {"centralized", system_name(*l), "none", 1, ms, ms, 0.0, s.J, 0.0, 0, o.seed}, out);
    if (!o.trace.empty()) {
      Json j;
      j["method"] = "centralized";
      j["system"] = system_name(*l);
      j["J"] = s.J;
      j["g_mw"] = to_json(s.g);
      j["delta"] = to_json(s.delta);
      j["theta"] = to_json(s.theta);
      std::ofstream(o.trace) << j.dump() << '\n';
    }
    write_manifest(o, "centralized", "", ms, ms, 0.0);
    return kOk;
  } catch (...) {
    return report_failure(err);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Degeneracy-aware multi-parametric programming and critical region exploration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CREX_VERSION);

  std::string problem, theta, out_path;
  auto* regions = app.add_subcommand("regions", "All critical regions containing a parameter");
  regions->add_option("--problem", problem, "mpQP problem (JSON)")->required();
  regions->add_option("--theta", theta, "Parameter, comma separated")->required();
  regions->add_option("--out", out_path, "Output file; stdout when omitted");

  RunOptions cre_opts;
  CreConfig cre_cfg;
  auto* cre = app.add_subcommand("cre-run", "Critical region exploration");
  add_run_options(cre, cre_opts);
  cre->add_option("--alpha", cre_cfg.alpha, "Stepsize growth on equal objective");
  cre->add_option("--beta", cre_cfg.beta, "Stepsize shrink on worse objective");
  cre->add_option("--eps0", cre_cfg.eps0, "Initial stepsize");
  cre->add_option("--vtol", cre_cfg.v_tol, "Certificate tolerance");
  cre->add_option("--max-iter", cre_cfg.max_iter, "Iteration limit");

  RunOptions base_opts;
  std::string method;
  double rho = 0.1;
  auto* baseline = app.add_subcommand("baseline", "ADMM or Benders decomposition");
  add_run_options(baseline, base_opts);
  baseline->add_option("--method", method, "Baseline method")
      ->required()
      ->check(CLI::IsMember({"admm", "benders"}));
  baseline->add_option("--rho", rho, "ADMM penalty")->check(CLI::PositiveNumber);

  RunOptions cen_opts;
  auto* centralized = app.add_subcommand("centralized", "Monolithic dispatch");
  centralized->add_option("--system", cen_opts.system, "Multi-area system config (JSON)")->required();
  centralized->add_option("--summary", cen_opts.summary, "Summary CSV, appended");
  centralized->add_option("--trace", cen_opts.trace, "Solution (JSON)");
  centralized->add_option("--manifest", cen_opts.manifest, "Run manifest (JSON)");

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << CREX_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kInputError;
  }

  std::ostringstream flags;
  for (std::size_t i = 1; i < args.size(); ++i) flags << args[i] << ' ';
  if (regions->parsed()) return cmd_regions(problem, theta, out_path, out, err);
  if (cre->parsed()) return cmd_cre(cre_opts, cre_cfg, flags.str(), out, err);
  if (baseline->parsed()) return cmd_baseline(base_opts, method, rho, flags.str(), out, err);
  return cmd_centralized(cen_opts, out, err);
}

}  // namespace crex::cli
