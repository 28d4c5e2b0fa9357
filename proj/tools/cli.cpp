#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "fmmc/chain_io.hpp"
#include "fmmc/closed_form.hpp"
#include "fmmc/error.hpp"
#include "fmmc/format.hpp"
#include "fmmc/mixing.hpp"
#include "fmmc/pareto.hpp"
#include "fmmc/spectral.hpp"
#include "verify.hpp"

namespace fmmc::cli {

namespace {

using nlohmann::json;

struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<std::size_t> m;
  std::optional<std::vector<double>> pi;
  std::optional<std::vector<double>> qf;
  int grid = 200;
  std::optional<double> tol;
  std::uint64_t seed = 42;
  std::string out;
  std::optional<std::string> format;
  bool paper_literal_bounds = false;
  std::string regime = "all";
  std::optional<json> chain;
  int steps = 2000;
  std::size_t count = 500;
  std::string start = "worst";
  std::string trace;
};

// Raw flag storage plus the options, so set flags can override the config.
struct Flags {
  std::size_t m = 0;
  std::vector<double> pi;
  std::vector<double> qf;
  int grid = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  bool paper_literal_bounds = false;
  std::string regime;
  std::string config;
  std::string chain;
  int steps = 0;
  std::size_t count = 0;
  std::string start;
  std::string trace;
  std::map<std::string, CLI::Option*> options;
};

void add_options(CLI::App* app, Flags& f) {
  auto& o = f.options;
  o["m"] = app->add_option("--m", f.m, "Blade count");
  o["pi"] = app->add_option("--pi", f.pi,
                            "Equilibrium masses, center first (m = 1: p1,p2,center)")
                ->delimiter(',');
  o["qf"] = app->add_option("--qf", f.qf, "Fixed friend-edge weights, one per blade")
                ->delimiter(',');
  o["grid"] = app->add_option("--grid", f.grid, "Frontier points per active blade");
  o["tol"] = app->add_option("--tol", f.tol, "Oracle tolerance (verify: comparison tolerance)");
  o["seed"] = app->add_option("--seed", f.seed, "Random seed");
  o["out"] = app->add_option("--out", f.out, "Output path (default standard output)");
  o["format"] = app->add_option("--format", f.format, "json or csv")
                    ->check(CLI::IsMember({"json", "csv"}));
  o["paper-literal-bounds"] =
      app->add_flag("--paper-literal-bounds", f.paper_literal_bounds,
                    "Report the literal m = 2 bounds, without the blade factor");
  o["regime"] = app->add_option("--regime", f.regime, "verify: regime name, all or m2-boundary");
  o["config"] = app->add_option("--config", f.config, "JSON config mirroring the flags");
  o["chain"] = app->add_option("--chain", f.chain, "Chain spec JSON file");
  o["steps"] = app->add_option("--steps", f.steps, "simulate: evolution steps");
  o["count"] = app->add_option("--count", f.count, "verify: instances per regime");
  o["start"] = app->add_option("--start", f.start, "simulate: worst or stationary")
                   ->check(CLI::IsMember({"worst", "stationary"}));
  o["trace"] = app->add_option("--trace", f.trace, "simulate: decay trace CSV path");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadInput("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw BadInput("malformed JSON in " + what + ": " + e.what());
  }
}

json load_chain_doc(const std::string& path) { return parse_json(read_file(path), path); }

template <class T>
T config_value(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw BadInput(std::string("config field '") + key + "': " + e.what());
  }
}

void apply_config(RunConfig& cfg, const json& doc) {
  if (!doc.is_object()) throw BadInput("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "m") cfg.m = config_value<std::size_t>(doc, "m");
    else if (key == "pi") cfg.pi = config_value<std::vector<double>>(doc, "pi");
    else if (key == "qf") cfg.qf = config_value<std::vector<double>>(doc, "qf");
    else if (key == "grid") cfg.grid = config_value<int>(doc, "grid");
    else if (key == "tol") cfg.tol = config_value<double>(doc, "tol");
    else if (key == "seed") cfg.seed = config_value<std::uint64_t>(doc, "seed");
    else if (key == "out") cfg.out = config_value<std::string>(doc, "out");
    else if (key == "format") cfg.format = config_value<std::string>(doc, "format");
    else if (key == "paper-literal-bounds") cfg.paper_literal_bounds = config_value<bool>(doc, key.c_str());
    else if (key == "regime") cfg.regime = config_value<std::string>(doc, "regime");
    else if (key == "steps") cfg.steps = config_value<int>(doc, "steps");
    else if (key == "count") cfg.count = config_value<std::size_t>(doc, "count");
    else if (key == "start") cfg.start = config_value<std::string>(doc, "start");
    else if (key == "trace") cfg.trace = config_value<std::string>(doc, "trace");
    else if (key == "chain") cfg.chain = value.is_string() ? load_chain_doc(value.get<std::string>()) : value;
    else throw BadInput("unknown config field '" + key + "'");
  }
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  const auto set = [&](const char* name) { return f.options.at(name)->count() > 0; };
  if (set("config")) apply_config(cfg, parse_json(read_file(f.config), f.config));
  if (set("m")) cfg.m = f.m;
  if (set("pi")) cfg.pi = f.pi;
  if (set("qf")) cfg.qf = f.qf;
  if (set("grid")) cfg.grid = f.grid;
  if (set("tol")) cfg.tol = f.tol;
  if (set("seed")) cfg.seed = f.seed;
  if (set("out")) cfg.out = f.out;
  if (set("format")) cfg.format = f.format;
  if (set("paper-literal-bounds")) cfg.paper_literal_bounds = f.paper_literal_bounds;
  if (set("regime")) cfg.regime = f.regime;
  if (set("chain")) cfg.chain = load_chain_doc(f.chain);
  if (set("steps")) cfg.steps = f.steps;
  if (set("count")) cfg.count = f.count;
  if (set("start")) cfg.start = f.start;
  if (set("trace")) cfg.trace = f.trace;
  if (cfg.tol && !(*cfg.tol > 0.0)) throw BadInput("--tol must be > 0");
  if (cfg.format && *cfg.format != "json" && *cfg.format != "csv") {
    throw BadInput("--format must be json or csv");
  }
  return cfg;
}

struct Problem {
  std::size_t m = 0;
  EquilibriumDistribution pi;
  std::vector<double> qf;
  std::optional<WeightAssignment> q;  // from a chain file
};

Problem problem_from_chain(json doc) {
  // A `solve` result carries its weights as q_opt.
  if (doc.is_object() && !doc.contains("q") && doc.contains("q_opt")) doc["q"] = doc["q_opt"];
  const ChainSpec spec = parse_chain_spec(doc);
  return {spec.topology.m(), spec.pi, friend_weights(spec.topology, spec.q), spec.q};
}

Problem problem_from_flags(const RunConfig& cfg) {
  if (!cfg.m || !cfg.pi) throw BadInput("need --m and --pi, or --chain");
  const std::size_t m = *cfg.m;
  if (m == 0) throw BadInput("--m must be >= 1");
  const auto& v = *cfg.pi;
  if (v.size() != 2 * m + 1) throw BadInput("--pi needs " + std::to_string(2 * m + 1) + " entries");
  // Inline triangles are given as (p1, p2, center).
  EquilibriumDistribution pi = m == 1 ? TriangleMasses{v[0], v[1], v[2]}.canonical()
                                      : EquilibriumDistribution(v);
  return {m, std::move(pi), std::vector<double>(m, 0.0), std::nullopt};
}

Problem load_problem(const RunConfig& cfg) {
  Problem p = cfg.chain ? problem_from_chain(*cfg.chain) : problem_from_flags(cfg);
  if (cfg.qf) {
    if (cfg.qf->size() != p.m) throw BadInput("--qf needs one weight per blade");
    p.qf = *cfg.qf;
  }
  return p;
}

// Single solves can afford a tighter oracle than the library default.
constexpr double kSingleSolveTol = 1e-10;

ClosedFormOptions solver_options(const RunConfig& cfg, std::optional<double> default_tol = {}) {
  ClosedFormOptions o;
  o.paper_literal_bounds = cfg.paper_literal_bounds;
  o.oracle.seed = cfg.seed;
  if (cfg.tol) {
    o.oracle.tol = *cfg.tol;
  } else if (default_tol) {
    o.oracle.tol = *default_tol;
  }
  return o;
}

json weights_json(const Topology& t, const WeightAssignment& q) {
  json w = json::object();
  for (const Edge& e : t.edges()) w[e.key()] = q.get(e.u, e.v);
  return w;
}

json values(std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); }

// Writes to --out when given, the output stream otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw BadInput("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  const ClosedFormSolution s = solve(p.pi, p.qf, solver_options(cfg, kSingleSolveTol));
  const Topology t = build_friendship_graph(p.m);

  json doc;
  doc["command"] = "solve";
  doc["m"] = p.m;
  doc["pi"] = values(p.pi.values());
  doc["qf"] = p.qf;
  doc["regime"] = to_string(s.regime.tag);
  doc["source"] = to_string(s.source);
  doc["branch"] = s.branch;
  doc["slem"] = s.slem;
  doc["q_opt"] = weights_json(t, s.q_opt);
  json bounds = json::array();
  for (const Interval& b : s.qf_bounds) bounds.push_back({{"lo", b.lo}, {"hi", b.hi}});
  doc["qf_bounds"] = bounds;
  doc["paper_literal_bounds"] = cfg.paper_literal_bounds;
  doc["within_bounds"] = s.within_bounds;
  doc["kkt_residual"] = s.kkt_residual;
  doc["eigenvalues"] = slem(p.pi, s.q_opt, t).eigenvalues;
  json cands = json::array();
  for (const Candidate& c : s.candidates) {
    cands.push_back({{"branch", c.branch},
                     {"formula_slem", c.formula_slem},
                     {"assembled_slem", c.assembled_slem ? json(*c.assembled_slem) : json(nullptr)},
                     {"valid", c.valid}});
  }
  doc["candidates"] = cands;

  Sink sink(cfg.out, out);
  sink.stream() << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_pareto(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.chain) throw BadInput("pareto takes --m and --pi");
  const Problem p = load_problem(cfg);
  FrontierOptions opts;
  opts.grid = cfg.grid;
  opts.solver = solver_options(cfg);
  const Frontier f = trace_frontier(p.pi, p.m, opts);

  Sink sink(cfg.out, out);
  if (cfg.format.value_or("csv") == "csv") {
    write_frontier_csv(sink.stream(), f, p.m);
    if (f.collapsed) err << "frontier collapsed to a single point\n";
    return kExitOk;
  }
  json doc;
  doc["command"] = "pareto";
  doc["m"] = p.m;
  doc["pi"] = values(p.pi.values());
  doc["collapsed"] = f.collapsed;
  doc["active_blades"] = f.active_blades;
  json points = json::array();
  for (const ParetoPoint& pt : f.points) {
    points.push_back({{"slem", pt.slem}, {"qf", pt.qf}, {"pf", pt.pf},
                      {"regime", to_string(pt.regime.tag)}});
  }
  doc["points"] = points;
  if (p.m == 1) {
    json segs = json::array();
    for (const FrontierSegment& s : frontier_curve_m1(TriangleMasses::from_canonical(p.pi))) {
      segs.push_back({{"lo", s.lo}, {"hi", s.hi}, {"kind", to_string(s.kind)},
                      {"coefficients", s.coefficients}, {"branch", s.branch},
                      {"derived", s.derived}});
    }
    doc["segments"] = segs;
  }
  sink.stream() << doc.dump(2) << '\n';
  return kExitOk;
}

json candidate_json(const BoundaryCandidate& c) {
  return {{"formula_slem", c.formula_slem},
          {"assembled_slem", c.assembled_slem ? json(*c.assembled_slem) : json(nullptr)},
          {"valid", c.valid}};
}

int cmd_boundary(const RunConfig& cfg, std::ostream& out) {
  const auto rows = m2_boundary_sweep();
  Sink sink(cfg.out, out);
  if (cfg.format.value_or("json") == "csv") {
    std::ostream& o = sink.stream();
    o << "pi0,boundary_offset,qf_1,qf_2,classified,regime1_formula,regime1_assembled,regime1_valid,"
         "regime2_formula,regime2_assembled,regime2_valid,oracle_slem,solver_slem,source,"
         "optimal_branch\n";
    const auto opt = [](const std::optional<double>& v) {
      return v ? format_double(*v) : std::string();
    };
    for (const BoundaryRow& r : rows) {
      o << format_double(r.pi0) << ',' << format_double(r.boundary_offset) << ','
        << format_double(r.qf[0]) << ',' << format_double(r.qf[1]) << ',' << to_string(r.classified) << ',' << format_double(r.regime1.formula_slem) << ','
        << opt(r.regime1.assembled_slem) << ',' << r.regime1.valid << ','
        << format_double(r.regime2.formula_slem) << ',' << opt(r.regime2.assembled_slem) << ','
        << r.regime2.valid << ',' << format_double(r.oracle_slem) << ','
        << format_double(r.solver_slem) << ',' << to_string(r.source) << ','
        << r.optimal_branch << '\n';
    }
    return kExitOk;
  }
  json doc;
  doc["command"] = "verify";
  doc["regime"] = "m2-boundary";
  doc["pi_blades"] = {1.0, 1.0, 0.25, 0.25};
  json list = json::array();
  for (const BoundaryRow& r : rows) {
    list.push_back({{"pi0", r.pi0},
                    {"boundary_offset", r.boundary_offset},
                    {"qf", r.qf},
                    {"classified", to_string(r.classified)},
                    {"regime1", candidate_json(r.regime1)},
                    {"regime2", candidate_json(r.regime2)},
                    {"oracle_slem", r.oracle_slem},
                    {"solver_slem", r.solver_slem},
                    {"source", to_string(r.source)},
                    {"optimal_branch", r.optimal_branch}});
  }
  doc["rows"] = list;
  sink.stream() << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.regime == "m2-boundary") return cmd_boundary(cfg, out);
  std::vector<VerifyRegime> regimes;
  if (cfg.regime == "all") {
    regimes = all_verify_regimes();
  } else if (const auto r = parse_verify_regime(cfg.regime)) {
    regimes = {*r};
  } else {
    throw BadInput("unknown regime '" + cfg.regime + "'");
  }
  if (cfg.format.value_or("json") != "json") throw BadInput("verify writes JSON");
  const double tol = cfg.tol.value_or(1e-4);

  json doc;
  doc["command"] = "verify";
  doc["seed"] = cfg.seed;
  doc["tol"] = tol;
  doc["count"] = cfg.count;
  json list = json::array();
  bool pass = true;
  for (VerifyRegime regime : regimes) {
    const VerifySummary s = run_verification(regime, cfg.count, cfg.seed, tol);
    json entry;
    entry["regime"] = to_string(regime);
    entry["instances"] = s.outcomes.size();
    entry["failures"] = s.failures;
    entry["oracle_fallbacks"] = s.oracle_fallbacks;
    if (!s.outcomes.empty()) {
      const VerifyOutcome& w = s.outcomes[s.worst];
      const VerifyInstance& inst = s.instances[w.index];
      entry["max_slem_delta"] = w.slem_delta;
      entry["worst"] = {{"pi", values(inst.pi.values())},
                        {"qf", inst.qf},
                        {"regime", to_string(w.regime.tag)},
                        {"source", to_string(w.source)},
                        {"closed_slem", w.closed_slem},
                        {"oracle_slem", w.oracle_slem},
                        {"slem_delta", w.slem_delta},
                        {"max_edge_delta", w.max_edge_delta}};
      if (s.failures > 0) {
        err << "verify: " << s.failures << " of " << s.outcomes.size() << " failed in "
            << to_string(regime) << "; worst instance: " << entry["worst"].dump() << '\n';
      }
    }
    pass = pass && s.failures == 0;
    list.push_back(entry);
  }
  doc["regimes"] = list;
  doc["pass"] = pass;
  Sink sink(cfg.out, out);
  sink.stream() << doc.dump(2) << '\n';
  return pass ? kExitOk : kExitVerifyFailed;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  if (cfg.steps < 0) throw BadInput("--steps must be >= 0");
  const Topology t = build_friendship_graph(p.m);
  if (p.q && cfg.qf) throw BadInput("--qf cannot be combined with a chain file in simulate");
  const WeightAssignment q =
      p.q ? *p.q : solve(p.pi, p.qf, solver_options(cfg, kSingleSolveTol)).q_opt;

  MixingReport r;
  if (cfg.start == "stationary") {
    std::vector<double> p0;
    for (double x : p.pi.values()) p0.push_back(x / p.pi.total());
    r = fitted_vs_slem(p.pi, q, t, cfg.steps, p0);
  } else {
    r = fitted_vs_slem(p.pi, q, t, cfg.steps);
  }

  if (!cfg.trace.empty()) {
    Sink trace(cfg.trace, out);
    write_trace_csv(trace.stream(), r.trace);
  }
  Sink sink(cfg.out, out);
  if (cfg.format.value_or("json") == "csv") {
    write_trace_csv(sink.stream(), r.trace);
    return kExitOk;
  }
  json doc;
  doc["command"] = "simulate";
  doc["m"] = p.m;
  doc["pi"] = values(p.pi.values());
  doc["q"] = weights_json(t, q);
  doc["steps"] = cfg.steps;
  doc["start"] = cfg.start;
  doc["slem"] = r.slem;
  doc["fitted_rate"] = r.fitted_rate;
  doc["relative_gap"] = r.relative_gap;
  doc["degenerate"] = r.degenerate;
  doc["non_mixing"] = r.trace.non_mixing;
  sink.stream() << doc.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fastest mixing reversible Markov chains on friendship graphs", "fmmc"};
  app.require_subcommand(1);
  std::map<std::string, Flags> flags;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Optimal center weights and SLEM for fixed friend weights"},
      {"pareto", "Pareto frontier of SLEM against friend-edge weights"},
      {"verify", "Randomized closed-form versus oracle checks"},
      {"simulate", "Total-variation decay of a chain"},
  };
  for (const auto& [name, help] : commands) add_options(app.add_subcommand(name, help), flags[name]);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitBadInput;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = resolve(flags.at(name));
    if (name == "solve") return cmd_solve(cfg, out);
    if (name == "pareto") return cmd_pareto(cfg, out, err);
    if (name == "verify") return cmd_verify(cfg, out, err);
    return cmd_simulate(cfg, out);
  } catch (const ReducibleChain& e) {
    err << "fmmc " << name << ": " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const BadInput& e) {
    err << "fmmc " << name << ": " << e.what() << '\n';
    return kExitBadInput;
  } catch (const Error& e) {
    err << "fmmc " << name << ": " << e.what() << '\n';
    return kExitBadInput;
  } catch (const json::exception& e) {
    err << "fmmc " << name << ": " << e.what() << '\n';
    return kExitBadInput;
  }
}

}  // namespace fmmc::cli
