#include "isop/cli.hpp"

#include "isop/estimators.hpp"
#include "isop/harness.hpp"
#include "isop/raster_io.hpp"
#include "isop/records.hpp"
#include "isop/symmetrize.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>

namespace isop {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommonKeys = {"n", "dt", "max_time", "eps_shell", "adaptive", "slit_eps"};

struct OpEntry {
  std::vector<std::string> keys;
  std::function<json(const json& p, const SimConfig& cfg, std::size_t n)> fn;
};

Process process_of(const json& p) {
  return p.contains("alpha") ? Process::stable_process(param_number(p, "alpha")) : Process::brownian();
}

Domain domain_for(const json& p, const Point& x) { return parse_domain(param_string(p, "domain"), x.size()); }

Domain sampling_box(double half, int dim) {
  return Domain::box(Point::Constant(dim, -half), Point::Constant(dim, half));
}

json curve_json(const std::vector<double>& grid, const std::vector<Estimate>& est) {
  json c = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    json e = to_json(est[i]);
    e["t"] = grid[i];
    c.push_back(e);
  }
  return c;
}

const std::map<std::string, OpEntry>& ops() {
  static const std::map<std::string, OpEntry> r = {
      {"harmonic-measure",
       {{"domain", "x", "label", "sampler"},
        [](const json& p, const SimConfig& cfg, std::size_t n) {
          const Point x = param_point(p, "x");
          const std::string s = param_string(p, "sampler", "auto");
          Sampler sm = Sampler::automatic;
          if (s == "wos") sm = Sampler::walk_on_spheres;
          else if (s == "stepping") sm = Sampler::stepping;
          else if (s != "auto") throw std::invalid_argument("sampler must be auto, wos or stepping");
          return make_record("harmonic-measure", p,
                             harmonic_measure(domain_for(p, x), BoundarySet::parse(param_string(p, "label", "all")), x,
                                              n, cfg, sm));
        }}},
      {"survival",
       {{"domain", "x", "t", "alpha"},
        [](const json& p, const SimConfig& cfg, std::size_t n) {
          const Point x = param_point(p, "x");
          return make_record("survival", p,
                             survival_probability(domain_for(p, x), x, param_number(p, "t"), n, cfg, process_of(p)));
        }}},
      {"exit-time",
       {{"domain", "x", "alpha"},
        [](const json& p, const SimConfig& cfg, std::size_t n) {
          const Point x = param_point(p, "x");
          return make_record("exit-time", p, expected_exit_time(domain_for(p, x), x, n, cfg, process_of(p)));
        }}},
      {"kac",
       {{"domain", "x", "t_grid"},
        [](const json& p, const SimConfig& cfg, std::size_t n) {
          const Point x = param_point(p, "x");
          const Domain d = domain_for(p, x);
          const auto grid = p.contains("t_grid") ? param_list(p, "t_grid") : kac_auto_grid(d, x, cfg);
          SimConfig run = cfg;
          run.max_time = std::max(cfg.max_time, *std::max_element(grid.begin(), grid.end()));
          const auto surv = survival_curve(d, x, grid, n, run);
          const KacFit fit = kac_fit(grid, surv, n);
          json rec = make_record("kac", p, fit.eigenvalue);
          rec["survival"] = curve_json(grid, surv);
          rec["used"] = fit.used;
          return rec;
        }}},
      {"heat-content",
       {{"domain", "t", "box"},
        [](const json& p, const SimConfig& cfg, std::size_t n) {
          const Domain a = parse_domain(param_string(p, "domain"), 3);
          const double t = param_number(p, "t");
          const double half = param_number(p, "box", 2.0 + 4 * std::sqrt(t));
          return make_record("heat-content", p, heat_content(a, t, sampling_box(half, 3), n, cfg));
        }}},
      {"capacity-spitzer",
       {{"domain", "t_grid", "box"},
        [](const json& p, const SimConfig& cfg, std::size_t n) {
          const Domain a = parse_domain(param_string(p, "domain"), 3);
          const auto grid = param_list(p, "t_grid");
          const double tmax = *std::max_element(grid.begin(), grid.end());
          const double half = param_number(p, "box", 2.0 + 4 * std::sqrt(tmax));
          const SpitzerFit fit = spitzer_fit(heat_content_curve(a, grid, sampling_box(half, 3), n, cfg), cfg.seed);
          json rec = make_record("capacity-spitzer", p, fit.capacity);
          rec["c2"] = fit.c2;
          rec["c3"] = fit.c3;
          rec["heat_content"] = curve_json(grid, fit.curve.values);
          return rec;
        }}},
      {"capacity-energy",
       {{"domain", "points", "iters", "alpha", "cell"},
        [](const json& p, const SimConfig&, std::size_t) {
          const Domain a = parse_domain(param_string(p, "domain"), 3);
          std::vector<Point> pts;
          if (const auto* b = std::get_if<BallShape>(&a.shape()); b && a.dim() == 3) {
            pts = fibonacci_sphere(static_cast<std::size_t>(param_number(p, "points", 2000)), b->radius, b->center);
          } else {
            pts = surface_points(rasterize(a, param_number(p, "cell", 0.0)));
          }
          const CapacityResult res = capacity_energy(pts, param_number(p, "alpha", 2.0), 3,
                                                     static_cast<int>(param_number(p, "iters", 2000)));
          json rec = make_record("capacity-energy", p, res.capacity);
          rec["converged"] = res.converged;
          rec["gap"] = res.gap;
          rec["iterations"] = res.energy_trace.size() - 1;
          return rec;
        }}},
      {"hitting",
       {{"domain", "x", "alpha"},
        [](const json& p, const SimConfig& cfg, std::size_t n) {
          const Point x = param_point(p, "x");
          return make_record("hitting", p, hitting_probability(domain_for(p, x), x, process_of(p), n, cfg));
        }}},
      {"carleman-bound",
       {{"xs", "widths", "x0", "b", "r0", "M"},
        [](const json& p, const SimConfig&, std::size_t) {
          const auto xs = param_list(p, "xs"), ls = param_list(p, "widths");
          if (xs.size() != ls.size() || xs.size() < 2) throw std::invalid_argument("profile grid/width size mismatch");
          const double m = param_number(p, "M", *std::max_element(ls.begin(), ls.end()));
          auto width = [&](double x) {
            if (x <= xs.front()) return ls.front();
            if (x >= xs.back()) return ls.back();
            const std::size_t i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
            const double s = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return ls[i - 1] + s * (ls[i] - ls[i - 1]);
          };
          Estimate e;
          e.mean = carleman_bound(width, m, param_number(p, "r0"), param_number(p, "x0", xs.front()),
                                  param_number(p, "b"));
          return make_record("carleman-bound", p, e);
        }}},
      {"sausage",
       {{"shape", "t", "path_dt", "cell", "box_cells"},
        [](const json& p, const SimConfig& cfg, std::size_t n) {
          const Domain shape = parse_domain(param_string(p, "shape", "ball:1"), 3);
          const double cell = param_number(p, "cell", 0.1);
          const int cells = static_cast<int>(param_number(p, "box_cells", 128));
          const RasterSet box(3, Point::Constant(3, -0.5 * cells * cell), cell, {cells, cells, cells});
          SimConfig run = cfg;
          const double t = param_number(p, "t");
          run.max_time = std::max(cfg.max_time, t);
          return make_record("sausage", p,
                             sausage_expectation(ShapeFamily::constant(shape), t, param_number(p, "path_dt", 0.01), n,
                                                 box, run));
        }}},
  };
  return r;
}

const std::map<std::string, std::vector<std::string>> kSymmetrizeKeys = {
    {"steiner", {"in", "out", "axis"}},
    {"circular", {"in", "out"}},
    {"polarize", {"in", "out", "normal", "offset"}},
    {"schwarz", {"in", "out"}},
    {"schedule", {"in", "out", "axis", "budget"}},
};

SimConfig config_of(const json& p, std::uint64_t seed, unsigned workers) {
  SimConfig c;
  c.dt = param_number(p, "dt", c.dt);
  c.max_time = param_number(p, "max_time", c.max_time);
  c.eps_shell = param_number(p, "eps_shell", c.eps_shell);
  c.adaptive = param_number(p, "adaptive", c.adaptive);
  c.slit_eps = param_number(p, "slit_eps", c.slit_eps);
  c.seed = seed;
  c.workers = workers;
  c.validate();
  return c;
}

// Fills defaults so every record echoes the resolved configuration.
// Plain numbers from the command line are stored as numbers so records echo them typed.
json scalar_value(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) return v;
  if (v.find_first_of(".eE") == std::string::npos && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  return d;
}

json resolved(json p, const SimConfig& c, std::size_t n) {
  p["n"] = n;
  p["dt"] = c.dt;
  p["max_time"] = c.max_time;
  p["eps_shell"] = c.eps_shell;
  p["adaptive"] = c.adaptive;
  p["slit_eps"] = c.slit_eps;
  return p;
}

void check_keys(const json& p, const std::vector<std::string>& allowed, const std::string& op) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = p.begin(); it != p.end(); ++it)
    if (!ok.count(it.key())) throw std::invalid_argument("parameter '" + it.key() + "' is not registered for " + op);
}

std::vector<std::string> estimate_keys(const std::string& op) {
  auto keys = op_params(op);
  keys.insert(keys.end(), kCommonKeys.begin(), kCommonKeys.end());
  return keys;
}

json run_estimate(const std::string& op, const json& params, std::uint64_t seed, unsigned workers) {
  const auto it = ops().find(op);
  if (it == ops().end()) throw std::invalid_argument("unknown operation '" + op + "'");
  check_keys(params, estimate_keys(op), op);
  const SimConfig cfg = config_of(params, seed, workers);
  const double n_raw = param_number(params, "n", 100000);
  if (!(n_raw >= 1)) throw std::invalid_argument("need n >= 1 samples");
  const auto n = static_cast<std::size_t>(n_raw);
  return it->second.fn(resolved(params, cfg, n), cfg, n);
}

// Writes the first `count` paths of an exit-type estimate, replaying the
// estimator's per-path streams.
void dump_paths(const std::string& op, const json& p, std::uint64_t seed, const std::string& path, std::size_t count) {
  if (op != "harmonic-measure" && op != "survival" && op != "exit-time" && op != "hitting")
    throw std::invalid_argument("--dump-paths supports harmonic-measure, survival, exit-time and hitting");
  const Point x = param_point(p, "x");
  const Domain d = domain_for(p, x);
  SimConfig cfg = config_of(p, seed, 1);
  if (op == "survival") cfg.max_time = param_number(p, "t");
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "path,t";
  for (int k = 0; k < x.size(); ++k) out << ",x" << k;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    const PathObserver obs = [&](double t, const Point& y) {
      out << i << ',' << t;
      for (int k = 0; k < y.size(); ++k) out << ',' << y(k);
      out << '\n';
    };
    if (op == "hitting") sample_hit(d, x, cfg, rng, process_of(p), &obs);
    else sample_exit(d, x, cfg, rng, process_of(p), &obs);
  }
}

json run_symmetrize(const std::string& op, const json& p) {
  const auto it = kSymmetrizeKeys.find(op);
  if (it == kSymmetrizeKeys.end()) throw std::invalid_argument("unknown symmetrization '" + op + "'");
  check_keys(p, it->second, op);
  const RasterSet in = read_raster(param_string(p, "in"));
  json rec;
  RasterSet out = in;
  if (op == "steiner") {
    out = steiner(in, static_cast<int>(param_number(p, "axis", 0)));
  } else if (op == "circular") {
    out = circular(in);
  } else if (op == "polarize") {
    out = polarize(in, Hyperplane(param_point(p, "normal"), param_number(p, "offset", 0)));
  } else if (op == "schwarz") {
    out = rasterize(schwarz_ball(in), in.empty_like());
  } else {
    const int axis = static_cast<int>(param_number(p, "axis", 0));
    const ScheduleResult s = polarization_schedule_to_steiner(in, grid_center_plane(in, axis),
                                                              static_cast<int>(param_number(p, "budget", 500)));
    out = s.set;
    rec["distances"] = s.distances;
    rec["applied"] = s.applied;
  }
  if (p.contains("out")) write_raster(out, param_string(p, "out"));
  rec["op"] = op;
  rec["params"] = p;
  rec["cells_in"] = in.count();
  rec["cells_out"] = out.count();
  rec["volume_in"] = volume(in);
  rec["volume_out"] = volume(out);
  return rec;
}

struct Sink {
  std::ofstream file;
  std::ostream* os = nullptr;
  bool append_csv_header = true;
};

void open_sink(Sink& s, const RunSpec& spec, std::ostream& out) {
  if (spec.output.empty()) {
    s.os = &out;
    return;
  }
  const bool csv = spec.format == "csv";
  if (csv && std::filesystem::exists(spec.output) && std::filesystem::file_size(spec.output) > 0)
    s.append_csv_header = false;
  s.file.open(spec.output, csv ? std::ios::app : std::ios::trunc);
  if (!s.file) throw std::invalid_argument("cannot write " + spec.output);
  s.os = &s.file;
}

void emit(Sink& s, const std::string& format, const std::vector<json>& records, bool as_array) {
  if (format == "csv") {
    if (records.empty()) return;
    if (s.append_csv_header) *s.os << csv_header(records.front()) << '\n';
    for (const auto& r : records) *s.os << csv_row(r) << '\n';
  } else if (as_array) {
    *s.os << json(records).dump(2) << '\n';
  } else {
    *s.os << records.front().dump(2) << '\n';
  }
}

int run_verify(const RunSpec& spec, std::ostream& out) {
  const std::string suite = param_string(spec.params, "suite");
  check_keys(spec.params, {"suite", "summary"}, "verify");
  std::ifstream in(suite);
  if (!in) throw std::invalid_argument("cannot read suite " + suite);
  json manifest = json::parse(in);
  if (manifest.is_object()) manifest = manifest.at("checks");
  if (!manifest.is_array()) throw std::invalid_argument("suite manifest must be a list of checks");

  std::ofstream summary_file;
  std::ostream* summary = &out;
  const std::string summary_path = spec.summary.empty() ? param_string(spec.params, "summary", "") : spec.summary;
  Sink sink;
  if (!spec.output.empty()) open_sink(sink, spec, out);
  if (!summary_path.empty()) {
    summary_file.open(summary_path);
    if (!summary_file) throw std::invalid_argument("cannot write " + summary_path);
    summary = &summary_file;
  }
  std::vector<json> records;
  bool violation = false;
  *summary << verdict_csv_header() << '\n';
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto verdicts = run_check(manifest[i], derive_seed(spec.seed, i), spec.workers);
    for (const auto& v : verdicts) {
      violation = violation || v.status == Status::violation;
      records.push_back(to_json(v));
      *summary << verdict_csv_row(v) << '\n';
    }
  }
  if (sink.os) emit(sink, spec.format == "csv" ? "json" : spec.format, records, true);
  return violation ? kExitViolation : kExitOk;
}

int run_sweep(const RunSpec& spec, std::ostream& out) {
  const auto eq = spec.range.find('=');
  if (spec.range.empty() || eq == std::string::npos)
    throw std::invalid_argument("sweep needs exactly one --range key=v1,v2,...");
  const std::string key = spec.range.substr(0, eq);
  const auto keys = estimate_keys(spec.target);
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw std::invalid_argument("parameter '" + key + "' is not registered for " + spec.target);
  if (spec.params.contains(key)) throw std::invalid_argument("swept parameter '" + key + "' is also fixed");
  std::vector<std::string> values;
  std::stringstream ss(spec.range.substr(eq + 1));
  for (std::string v; std::getline(ss, v, ',');) values.push_back(v);
  if (values.empty()) throw std::invalid_argument("empty sweep range");
  Sink sink;
  open_sink(sink, spec, out);
  std::vector<json> records;
  for (std::size_t i = 0; i < values.size(); ++i) {
    json p = spec.params;
    p[key] = scalar_value(values[i]);
    json rec = run_estimate(spec.target, p, derive_seed(spec.seed, i), spec.workers);
    rec["sweep"] = {{"key", key}, {"value", values[i]}, {"index", i}, {"base_seed", spec.seed}};
    records.push_back(std::move(rec));
  }
  emit(sink, spec.format, records, true);
  return kExitOk;
}

}  // namespace

std::vector<std::string> estimate_ops() {
  std::vector<std::string> names;
  for (const auto& [k, v] : ops()) names.push_back(k);
  return names;
}

std::vector<std::string> op_params(const std::string& op) {
  const auto it = ops().find(op);
  if (it == ops().end()) throw std::invalid_argument("unknown operation '" + op + "'");
  return it->second.keys;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    if (spec.format != "json" && spec.format != "csv") throw std::invalid_argument("format must be json or csv");
    if (spec.command == "estimate") {
      json rec = run_estimate(spec.target, spec.params, spec.seed, spec.workers);
      if (!spec.dump_paths.empty()) dump_paths(spec.target, spec.params, spec.seed, spec.dump_paths, spec.dump_count);
      Sink sink;
      open_sink(sink, spec, out);
      emit(sink, spec.format, {rec}, false);
      return kExitOk;
    }
    if (spec.command == "symmetrize") {
      Sink sink;
      open_sink(sink, spec, out);
      emit(sink, spec.format, {run_symmetrize(spec.target, spec.params)}, false);
      return kExitOk;
    }
    if (spec.command == "verify") return run_verify(spec, out);
    if (spec.command == "sweep") return run_sweep(spec, out);
    throw std::invalid_argument("unknown command '" + spec.command + "'");
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and rearrangement toolkit for isoperimetric inequalities"};
  app.require_subcommand(1);

  RunSpec spec;
  std::string config;
  std::vector<std::string> kv;
  std::map<std::string, std::string> named;

  std::set<std::string> keys(kCommonKeys.begin(), kCommonKeys.end());
  for (const auto& op : estimate_ops())
    for (const auto& k : op_params(op)) keys.insert(k);
  for (const auto& [op, ks] : kSymmetrizeKeys) keys.insert(ks.begin(), ks.end());
  keys.insert("suite");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", spec.seed, "Base seed");
    sub->add_option("--workers", spec.workers, "Worker threads (default: ISOP_DEFAULT_WORKERS or all cores)");
    sub->add_option("--output,-o", spec.output, "Output file (default stdout)");
    sub->add_option("--format", spec.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--config", config, "Flat JSON file of parameters; flags override it");
    sub->add_option("--param,-p", kv, "Extra key=value parameter (repeatable)");
    for (const auto& k : keys) {
      std::string dashed = k;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      std::string names = "--" + k;
      if (dashed != k) names += ",--" + dashed;
      sub->add_option(names, named[k]);
    }
  };

  auto* est = app.add_subcommand("estimate", "Run one estimator");
  est->add_option("target", spec.target, "Operation")->required();
  est->add_option("--dump-paths", spec.dump_paths, "Write the first paths as CSV");
  est->add_option("--dump-count", spec.dump_count, "Paths written by --dump-paths");
  common(est);
  auto* sym = app.add_subcommand("symmetrize", "Apply a rearrangement to a raster");
  sym->add_option("target", spec.target, "steiner | circular | polarize | schwarz | schedule")->required();
  common(sym);
  auto* ver = app.add_subcommand("verify", "Run a verification suite");
  ver->add_option("--summary", spec.summary, "Summary CSV path (default stdout)");
  common(ver);
  auto* swp = app.add_subcommand("sweep", "Run an estimator over one ranged parameter");
  swp->add_option("target", spec.target, "Operation")->required();
  swp->add_option("--range", spec.range, "key=v1,v2,...")->required();
  common(swp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitPrecondition;
  }
  spec.command = app.get_subcommands().front()->get_name();

  try {
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw std::invalid_argument("cannot read config " + config);
      const json c = json::parse(in);
      if (!c.is_object()) throw std::invalid_argument("config must be a flat JSON object");
      for (auto it = c.begin(); it != c.end(); ++it) {
        if (it->is_object()) throw std::invalid_argument("config must be flat; '" + it.key() + "' is nested");
        if (it.key() == "seed") spec.seed = it->get<std::uint64_t>();
        else if (it.key() == "workers") spec.workers = it->get<unsigned>();
        else spec.params[it.key()] = *it;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  }
  for (const auto& [k, v] : named)
    if (!v.empty()) spec.params[k] = scalar_value(v);
  for (const auto& item : kv) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --param expects key=value, got '" << item << "'\n";
      return kExitPrecondition;
    }
    spec.params[item.substr(0, eq)] = scalar_value(item.substr(eq + 1));
  }
  return run(spec, std::cout, std::cerr);
}

}  // namespace isop
