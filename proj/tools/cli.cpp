#include "cli.hpp"

#include "tdesign/tdesign.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace tdesign::cli {
namespace {

using nlohmann::json;

struct Globals {
  bool json = false;
  int threads = 1;
  std::uint64_t seed = 1;
  int restarts = 20;
  int max_iterations = 2000;
  double gradient_tolerance = 1e-10;
  double trust_radius_factor = 0.1;
  int polish_iterations = 20;
  double zero_factor = kZeroFactor;

  SolverOptions solver() const {
    SolverOptions o;
    o.max_iterations = max_iterations;
    o.gradient_tolerance = gradient_tolerance;
    o.initial_trust_radius_factor = trust_radius_factor;
    o.polish_iterations = polish_iterations;
    o.seed = seed;
    o.validate();
    return o;
  }
  void validate() const {
    if (threads < 1) throw CLI::ValidationError("--threads", "must be >= 1");
    if (restarts < 1) throw CLI::ValidationError("--restarts", "must be >= 1");
    if (!(zero_factor > 0)) throw CLI::ValidationError("--zero-factor", "must be > 0");
    try {
      solver();
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("solver options", e.what());
    }
  }
};

// Error raised for bad input detected after parsing (unknown names, missing
// parameters); maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string g17(double x) { return format_double(x); }

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

json clusters_json(const std::vector<Cluster>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back({{"value", c.representative}, {"multiplicity", c.multiplicity}});
  return a;
}

// ---------------------------------------------------------------------------
// construct

struct ConstructArgs {
  std::string name;
  int t = 2;
  int d = 4;
  int sign = 1;
  std::vector<double> theta;
  std::string out_path;
};

const std::vector<std::string>& construction_names() {
  static const std::vector<std::string> names{
      "equally_spaced_lines", "mercedes_benz", "twelve_point_design", "three_mubs_R4",
      "reznick_11pt",         "new_11pt_d5",   "stroud_design",       "kempner_24pt",
      "kempner_24pt_weighted", "z3_orbit"};
  return names;
}

// Returns the configuration and the strength it is a design for.
std::pair<Configuration, int> build(const ConstructArgs& a, const Globals& g, std::ostream& err) {
  auto angles = [&](std::size_t k) {
    if (a.theta.empty()) return std::vector<double>(k, 0.0);
    if (a.theta.size() != k) throw UsageError(a.name + " needs --theta with " + std::to_string(k) + " values");
    return a.theta;
  };
  if (a.name == "equally_spaced_lines") return {equally_spaced_lines(a.t), a.t};
  if (a.name == "mercedes_benz") return {Configuration(mercedes_benz(angles(1)[0]), NormMode::EqualNorm), 2};
  if (a.name == "twelve_point_design") {
    const auto th = angles(4);
    return {twelve_point_design({{th[0], th[1], th[2], th[3]}}), 2};
  }
  if (a.name == "three_mubs_R4") return {three_mubs_R4(), 2};
  if (a.name == "reznick_11pt") return {reznick_11pt(), 3};
  if (a.name == "new_11pt_d5") return {new_11pt_d5(), 3};
  if (a.name == "stroud_design") return {stroud_design(a.d, a.sign), 2};
  if (a.name == "kempner_24pt") return {kempner_24pt(), 3};
  if (a.name == "kempner_24pt_weighted") return {kempner_24pt_weighted(), 3};
  if (a.name == "z3_orbit") {
    // Seeds are optimized from random starts seed, seed+1, ... until one
    // reaches a design.
    SolverOptions o = g.solver();
    for (int k = 0; k < g.restarts; ++k, ++o.seed) {
      const Z3SeedResult r = minimize_z3_seeds(o);
      err << "z3_orbit: seed " << o.seed << " f = " << g17(r.f_value) << '\n';
      if (r.f_value <= g.zero_factor * 576.0) return {z3_orbit(r.seeds), 4};
    }
    throw std::runtime_error("z3_orbit: no restart reached a design");
  }
  throw UsageError("unknown construction '" + a.name + "'");
}

int cmd_construct(const ConstructArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto [config, t] = build(a, g, err);
  const json meta = {{"construction", a.name}};
  if (a.out_path.empty()) {
    out << to_design_json(config, t, meta);
    return kExitOk;
  }
  save_design(a.out_path, config, t, meta);
  if (g.json) {
    emit(out, {{"construction", a.name}, {"file", a.out_path}, {"t", t}, {"d", config.dim()}, {"n", config.size()},
               {"mode", to_string(config.mode())}, {"f", potential(normalize_trace(config), t).f}});
  } else {
    out << "wrote " << a.name << " (" << config.dim() << "x" << config.size() << ", " << to_string(config.mode())
        << ", t=" << t << ") to " << a.out_path << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve

struct ProblemArgs {
  int t = 2, d = 2, n = 3;
  std::string mode = "equal_norm";
};

int cmd_solve(const ProblemArgs& p, const std::string& out_path, const Globals& g, std::ostream& out,
              std::ostream& err) {
  const DesignProblem problem(p.t, p.d, p.n, parse_norm_mode(p.mode));
  err << "solve: t=" << p.t << " d=" << p.d << " n=" << p.n << " " << p.mode << ", " << g.restarts
      << " restarts\n";
  const MultiStartResult ms = multi_start(problem, g.restarts, g.solver(), g.threads);
  const SolveResult& best = ms.best;
  const DesignCheck check = is_design(best.config, p.t, g.zero_factor);
  const json meta = {{"f_value", best.f_value},
                     {"iterations", best.iterations},
                     {"converged", to_string(best.converged)},
                     {"seed", best.seed}};
  if (!out_path.empty()) save_design(out_path, best.config, p.t, meta);
  if (g.json) {
    json j = meta;
    j["is_design"] = check.is_design;
    j["threshold"] = g.zero_factor * p.n * p.n;
    if (!out_path.empty()) j["file"] = out_path;
    emit(out, j);
  } else {
    out << "best f = " << g17(best.f_value) << " (seed " << best.seed << ", " << to_string(best.converged) << ", "
        << best.iterations << " iterations)\n";
    out << (check.is_design ? "design found" : "no design found") << " at threshold "
        << g17(g.zero_factor * p.n * p.n) << '\n';
  }
  return check.is_design ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------------------
// scan

struct ScanArgs {
  ProblemArgs p;
  int n_from = 1, n_to = 1;
  bool bisect = false;
  bool resume = false;
  std::string out_path;
};

int cmd_scan(const ScanArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const NormMode mode = parse_norm_mode(a.p.mode);
  ScanOptions opts;
  opts.restarts = g.restarts;
  opts.solver = g.solver();
  opts.zero_factor = g.zero_factor;
  opts.threads = g.threads;
  opts.progress = [&](const ScanRecord& r) {
    err << "scan: n=" << r.n << " best_f=" << g17(r.best_f) << (r.is_zero ? " (zero)" : "") << " in "
        << std::fixed << std::setprecision(2) << r.wall_seconds << std::defaultfloat << "s\n";
  };
  std::optional<ScanTable> previous;
  if (a.resume && !a.out_path.empty() && std::filesystem::exists(a.out_path)) previous = load_scan(a.out_path);
  const ScanTable table = a.bisect
                              ? scan_bisect(a.p.t, a.p.d, mode, a.n_from, a.n_to, opts)
                              : scan_n_range(a.p.t, a.p.d, mode, a.n_from, a.n_to, opts,
                                             previous ? &*previous : nullptr);
  if (!a.out_path.empty()) save_scan(a.out_path, table);
  const std::optional<int> jump = detect_jump(table, g.zero_factor);
  const std::vector<int> special = detect_special(table, g.zero_factor);
  if (g.json) {
    json rows = json::array();
    for (const auto& r : table.records) {
      rows.push_back({{"n", r.n}, {"best_f", r.best_f}, {"restarts_used", r.restarts_used}, {"is_zero", r.is_zero}});
    }
    emit(out, {{"t", a.p.t}, {"d", a.p.d}, {"mode", a.p.mode}, {"records", rows},
               {"jump", jump ? json(*jump) : json(nullptr)}, {"special", special}});
  } else {
    if (a.out_path.empty()) {
      out << scan_to_csv(table);
    }
    out << "jump: " << (jump ? std::to_string(*jump) : "none") << '\n';
    out << "special:";
    for (int n : special) out << ' ' << n;
    out << (special.empty() ? " none\n" : "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& path, std::optional<int> t_flag, const std::string& oracle, const Globals& g,
               std::ostream& out) {
  const DesignFile file = load_design(path);
  const int t = t_flag ? *t_flag : file.t.value_or(0);
  if (t < 1) throw UsageError("verify needs --t (the design file carries no t)");
  const Configuration& c = file.config;
  constexpr double oracle_tol = 1e-10;

  struct Row {
    std::string name;
    double value, threshold;
    bool pass;
  };
  std::vector<Row> rows;
  std::vector<std::string> skipped;
  const bool all = oracle == "all";
  if (all || oracle == "potential") {
    const DesignCheck d = is_design(c, t, g.zero_factor);
    rows.push_back({"potential", d.f_value, g.zero_factor * c.size() * c.size(), d.is_design});
  }
  if (all || oracle == "cubature") {
    if (c.mode() == NormMode::EqualNorm) {
      const double r = cubature_residual(c, t);
      rows.push_back({"cubature", r, oracle_tol, r <= oracle_tol});
    } else if (all) {
      skipped.push_back("cubature");  // the monomial rule is for unit vectors only
    } else {
      throw UsageError("the cubature oracle needs an equal_norm design");
    }
  }
  if (all || oracle == "bessel") {
    const double r = bessel_residual(c, t);
    rows.push_back({"bessel", r, oracle_tol, r <= oracle_tol});
  }
  bool pass = true;
  for (const auto& r : rows) pass = pass && r.pass;
  if (g.json) {
    json j = {{"file", path}, {"t", t}, {"pass", pass}, {"skipped", skipped}};
    for (const auto& r : rows) j["oracles"][r.name] = {{"value", r.value}, {"threshold", r.threshold}, {"pass", r.pass}};
    emit(out, j);
  } else {
    for (const auto& r : rows) {
      out << r.name << ": " << g17(r.value) << " (threshold " << g17(r.threshold) << ") "
          << (r.pass ? "pass" : "FAIL") << '\n';
    }
    for (const auto& s : skipped) out << s << ": skipped (weighted design)\n";
    out << (pass ? "PASS" : "FAIL") << '\n';
  }
  return pass ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------------------
// analyze / compare

struct AnalyzeArgs {
  std::string path;
  bool angles = false, norms = false, match = false;
  int fingerprint = 0;
  std::optional<double> incidence;
  double tolerance = kClusterTolerance;
};

int cmd_analyze(const AnalyzeArgs& a, const Globals& g, std::ostream& out) {
  const Configuration c = load_design(a.path).config;
  const bool defaults = !a.angles && !a.norms && !a.match && a.fingerprint == 0 && !a.incidence;
  json j = {{"file", a.path}, {"d", c.dim()}, {"n", c.size()}};
  std::ostringstream text;
  int code = kExitOk;
  auto print_clusters = [&](const std::string& label, const std::vector<Cluster>& cs) {
    text << label << ":\n";
    for (const auto& cl : cs) text << "  " << g17(cl.representative) << " x" << cl.multiplicity << '\n';
  };
  if (defaults || a.angles) {
    const AngleProfile p = angle_profile(c, a.tolerance);
    j["angles"] = clusters_json(p.clusters);
    print_clusters("squared angles", p.clusters);
  }
  if (defaults || a.norms) {
    const auto p = norm_profile(c, a.tolerance);
    j["norms"] = clusters_json(p);
    print_clusters("norms", p);
  }
  if (a.incidence) {
    const auto counts = per_vector_angle_incidence(c, *a.incidence, a.tolerance);
    j["incidence"] = {{"target", *a.incidence}, {"counts", counts}};
    text << "incidence at " << g17(*a.incidence) << ":";
    for (int k : counts) text << ' ' << k;
    text << '\n';
  }
  if (a.fingerprint != 0) {
    const auto fp = m_product_fingerprint(c, a.fingerprint);
    j["fingerprint"] = {{"m", fp.m}, {"quantum", fp.quantum}, {"values", fp.values}};
    std::map<std::int64_t, int> counts;
    for (auto v : fp.values) ++counts[v];
    text << "m=" << fp.m << " products (" << fp.values.size() << " values, " << counts.size() << " distinct):\n";
    for (const auto& [v, k] : counts) text << "  " << g17(static_cast<double>(v) * fp.quantum) << " x" << k << '\n';
  }
  if (a.match) {
    try {
      const auto m = match_to_family(c);
      if (m) {
        j["match_family"] = {{"theta", m->theta}};
        text << "12-point family: theta =";
        for (double th : m->theta) text << ' ' << g17(th);
        text << '\n';
      } else {
        j["match_family"] = nullptr;
        text << "12-point family: no match\n";
        code = kExitFailed;
      }
    } catch (const std::invalid_argument& e) {
      j["match_family"] = {{"error", e.what()}};
      text << "12-point family: " << e.what() << '\n';
      code = kExitFailed;
    }
  }
  if (g.json) {
    emit(out, j);
  } else {
    out << text.str();
  }
  return code;
}

int cmd_compare(const std::string& a, const std::string& b, int m, const Globals& g, std::ostream& out) {
  const Configuration ca = load_design(a).config, cb = load_design(b).config;
  const bool same = m_product_fingerprint(ca, m).matches(m_product_fingerprint(cb, m));
  if (g.json) {
    emit(out, {{"m", m}, {"equal", same}});
  } else {
    out << "m=" << m << " fingerprints " << (same ? "equal" : "different") << '\n';
  }
  return same ? kExitOk : kExitFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Construct, search for, verify and analyze projective spherical (t,t)-designs", "tdesign"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file with option defaults")->envname("TDESIGN_CONFIG");

  Globals g;
  app.add_flag("--json", g.json, "machine-readable output");
  app.add_option("--threads", g.threads, "worker threads for restarts");
  app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--restarts", g.restarts, "restarts per problem");
  app.add_option("--max-iterations", g.max_iterations, "trust-region iteration cap");
  app.add_option("--gradient-tolerance", g.gradient_tolerance, "stop when the gradient norm is below this");
  app.add_option("--trust-radius-factor", g.trust_radius_factor, "max trust radius / typical distance");
  app.add_option("--polish-iterations", g.polish_iterations, "extra steps after reaching zero");
  app.add_option("--zero-factor", g.zero_factor, "a design has f <= zero-factor * n^2");

  ConstructArgs ca;
  auto* construct = app.add_subcommand("construct", "emit a closed-form design as JSON");
  construct->add_option("name", ca.name, "construction name")->required()->check(CLI::IsMember(construction_names()));
  construct->add_option("--t", ca.t, "strength for equally_spaced_lines")->check(CLI::PositiveNumber);
  construct->add_option("--d", ca.d, "dimension for stroud_design");
  construct->add_option("--sign", ca.sign, "branch for stroud_design")->check(CLI::IsMember({1, -1}));
  construct->add_option("--theta", ca.theta, "rotation angles (mercedes_benz: 1, twelve_point_design: 4)")
      ->delimiter(',');
  construct->add_option("--out", ca.out_path, "output design file (default: stdout)");

  ProblemArgs pa;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "multi-start minimization of the design potential");
  solve->add_option("--t", pa.t)->required()->check(CLI::PositiveNumber);
  solve->add_option("--d", pa.d)->required()->check(CLI::PositiveNumber);
  solve->add_option("--n", pa.n)->required()->check(CLI::PositiveNumber);
  solve->add_option("--mode", pa.mode)->check(CLI::IsMember({"equal_norm", "weighted"}));
  solve->add_option("--out", solve_out, "write the best configuration here");

  ScanArgs sa;
  auto* scan = app.add_subcommand("scan", "best potential for each n in a range");
  scan->add_option("--t", sa.p.t)->required()->check(CLI::PositiveNumber);
  scan->add_option("--d", sa.p.d)->required()->check(CLI::PositiveNumber);
  scan->add_option("--mode", sa.p.mode)->check(CLI::IsMember({"equal_norm", "weighted"}));
  scan->add_option("--n-from", sa.n_from)->required()->check(CLI::PositiveNumber);
  scan->add_option("--n-to", sa.n_to)->required()->check(CLI::PositiveNumber);
  scan->add_flag("--bisect", sa.bisect, "binary search for the jump instead of a full sweep");
  scan->add_flag("--resume", sa.resume, "reuse rows already present in --out");
  scan->add_option("--out", sa.out_path, "CSV output (metadata goes to <out>.json)");

  std::string verify_path, oracle = "potential";
  std::optional<int> verify_t;
  auto* verify = app.add_subcommand("verify", "certify a design file");
  verify->add_option("file", verify_path)->required()->check(CLI::ExistingFile);
  verify->add_option("--t", verify_t)->check(CLI::PositiveNumber);
  verify->add_option("--oracle", oracle)->check(CLI::IsMember({"potential", "cubature", "bessel", "all"}));

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "angle, norm and m-product structure of a design");
  analyze->add_option("file", aa.path)->required()->check(CLI::ExistingFile);
  analyze->add_flag("--angles", aa.angles);
  analyze->add_flag("--norms", aa.norms);
  analyze->add_option("--fingerprint", aa.fingerprint, "m-product fingerprint, m = 2 or 3")
      ->check(CLI::IsMember({2, 3}));
  analyze->add_flag("--match-family", aa.match, "recover Mercedes-Benz angles of a 12-point design in R^4");
  analyze->add_option("--incidence", aa.incidence, "per-vector count of this squared angle");
  analyze->add_option("--tolerance", aa.tolerance, "cluster tolerance")->check(CLI::PositiveNumber);

  std::string cmp_a, cmp_b;
  int cmp_m = 2;
  auto* compare = app.add_subcommand("compare", "compare m-product fingerprints of two designs");
  compare->add_option("first", cmp_a)->required()->check(CLI::ExistingFile);
  compare->add_option("second", cmp_b)->required()->check(CLI::ExistingFile);
  compare->add_option("--fingerprint", cmp_m)->check(CLI::IsMember({2, 3}));

  try {
    std::vector<std::string> rest(args.size() > 0 ? args.begin() + 1 : args.begin(), args.end());
    std::reverse(rest.begin(), rest.end());  // CLI11 consumes the vector from the back
    app.parse(rest);
    g.validate();
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*construct) return cmd_construct(ca, g, out, err);
    if (*solve) return cmd_solve(pa, solve_out, g, out, err);
    if (*scan) return cmd_scan(sa, g, out, err);
    if (*verify) return cmd_verify(verify_path, verify_t, oracle, g, out);
    if (*analyze) return cmd_analyze(aa, g, out);
    if (*compare) return cmd_compare(cmp_a, cmp_b, cmp_m, g, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace tdesign::cli
