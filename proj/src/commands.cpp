#include "kds/commands.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kds/errors.hpp"
#include "kds/geometry.hpp"
#include "kds/hamiltonian.hpp"
#include "kds/qnm.hpp"
#include "kds/trapping.hpp"

namespace kds::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

struct ParamsSpec {
  double lambda = 0.06, a = 0.0, mass = 1.0, delta = 0.2;
  GaugeKind gauge = GaugeKind::Affine;
  std::vector<double> coefficients;
};

ParamsSpec params_spec(const json& cfg) {
  ParamsSpec s;
  const json& p = io::get_object(cfg, "params");
  s.lambda = io::get_number(p, "lambda", s.lambda);
  s.a = io::get_number(p, "a", s.a);
  s.mass = io::get_number(p, "mass", s.mass);
  s.delta = io::get_number(cfg, "delta", s.delta);
  const json& g = io::get_object(cfg, "gauge");
  const std::string kind = io::get_string(g, "kind", "affine");
  if (kind == "affine") {
    s.gauge = GaugeKind::Affine;
  } else if (kind == "polynomial") {
    s.gauge = GaugeKind::Polynomial;
    if (g.contains("coefficients")) {
      if (!g["coefficients"].is_array()) throw Error(ErrorCode::ConfigError, "'coefficients' must be an array");
      for (const auto& c : g["coefficients"]) {
        if (!c.is_number()) throw Error(ErrorCode::ConfigError, "gauge coefficients must be numbers");
        s.coefficients.push_back(c.get<double>());
      }
    }
  } else {
    throw Error(ErrorCode::ConfigError, "gauge kind must be 'affine' or 'polynomial'");
  }
  return s;
}

Geometry geometry_from(const ParamsSpec& s, double a) {
  return Geometry::make(s.lambda, a, s.mass, s.delta, s.gauge, s.coefficients);
}

json params_json(const ParamsSpec& s, double a) {
  return json{{"lambda", s.lambda}, {"a", a}, {"mass", s.mass}};
}

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::uint64_t effective_seed(const json& cfg, const RunOptions& opt) {
  if (opt.seed) return *opt.seed;
  const long s = io::get_integer(cfg, "seed", 1);
  if (s < 0) throw Error(ErrorCode::ConfigError, "'seed' must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

void emit(CommandOutcome& out, const RunOptions& opt, const std::string& name, const std::string& text) {
  io::write_atomic(opt.out / name, text);
  out.outputs.push_back(name);
}

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

// ---------------------------------------------------------------------------

CommandOutcome cmd_params(const json& cfg, const RunOptions& opt, std::ostream& log) {
  CommandOutcome out;
  const auto ps = params_spec(cfg);
  json rep;
  rep["version"] = io::tool_version();
  rep["command"] = "params";
  rep["params"] = params_json(ps, ps.a);
  try {
    const auto g = geometry_from(ps, ps.a);
    const auto& p = g.params;
    rep["subextremal"] = true;
    rep["roots"] = json::array({p.r_neg(), p.r_C(), p.r_e(), p.r_c()});
    rep["r_e"] = p.r_e();
    rep["r_c"] = p.r_c();
    rep["mu_critical_radius"] = p.mu_critical_radius();
    rep["kappa_e"] = g.horizons.kappa_e;
    rep["kappa_c"] = g.horizons.kappa_c;
    rep["beta"] = beta_threshold(p, g.horizons);
    rep["beta_surface_gravity"] = beta_from_surface_gravity(g.horizons);
    rep["delta"] = g.horizons.delta;
    rep["delta_halvings"] = g.horizons.halvings;
    rep["gauge_valid"] = g.gauge.validation().ok;
    rep["verdict"] = "PASS";
    log << "roots: " << io::format_double(p.r_neg()) << " " << io::format_double(p.r_C()) << " "
        << io::format_double(p.r_e()) << " " << io::format_double(p.r_c()) << "\n"
        << "kappa_e " << io::format_double(g.horizons.kappa_e) << "  kappa_c "
        << io::format_double(g.horizons.kappa_c) << "  beta " << io::format_double(rep["beta"].get<double>())
        << "\nsubextremal: yes\n";
    out.verdicts["params"] = "PASS";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotSubextremal) throw;
    const double l = ps.lambda, a2 = ps.a * ps.a;
    const auto z = quartic_roots({-l / 3.0, 0.0, 1.0 - l * a2 / 3.0, -2.0 * ps.mass, a2});
    json roots = json::array();
    for (const auto& r : z) roots.push_back(complex_json(r));
    rep["subextremal"] = false;
    rep["roots"] = roots;
    rep["verdict"] = "NotSubextremal";
    rep["error"] = e.what();
    log << e.what() << "\nsubextremal: no\n";
    out.verdicts["params"] = "NotSubextremal";
    out.exit_code = kPrecondition;
  }
  emit(out, opt, "params.json", io::dump(rep));
  out.report = rep;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void census_rows(io::CsvWriter& csv, const Census& c) {
  for (std::size_t i = 0; i < c.entries.size(); ++i) {
    const auto& e = c.entries[i];
    const auto& s = e.start;
    csv.row({c.kind, std::to_string(i), io::CsvWriter::cell(s.x[1]), io::CsvWriter::cell(s.x[3]),
             io::CsvWriter::cell(s.xi[0]), io::CsvWriter::cell(s.xi[1]), io::CsvWriter::cell(s.xi[2]),
             io::CsvWriter::cell(s.xi[3]), e.failed ? "failure" : to_string(e.status),
             io::CsvWriter::cell(e.s_final), io::CsvWriter::cell(e.r_min), io::CsvWriter::cell(e.r_max),
             io::CsvWriter::cell(e.max_drift), e.trapped ? "1" : "0", io::CsvWriter::cell(e.error)});
  }
}

json census_json(const Census& c) {
  return json{{"kind", c.kind},
              {"requested", c.requested},
              {"sampled", c.sampled()},
              {"vacuous", c.vacuous()},
              {"escaped_low", c.escaped_low},
              {"escaped_high", c.escaped_high},
              {"trapped", c.trapped},
              {"pole_guard", c.pole_guard},
              {"failures", c.failures},
              {"max_drift", c.max_drift},
              {"max_exit_parameter", c.max_exit_parameter},
              {"affine_cap", c.affine_cap},
              {"epsilon", c.epsilon},
              {"attempts", c.attempts},
              {"rejected", c.rejected}};
}

CensusOptions census_options(const json& sec, std::uint64_t seed, int fallback_count) {
  CensusOptions o;
  const long count = io::get_integer(sec, "count", fallback_count);
  if (count < 1) throw Error(ErrorCode::ConfigError, "census count must be at least 1");
  o.count = int(count);
  o.epsilon = io::get_number(sec, "epsilon", o.epsilon);
  if (!(o.epsilon > 0)) throw Error(ErrorCode::ConfigError, "epsilon must be positive");
  o.seed = seed;
  o.flow.affine_cap = io::get_number(sec, "affine_cap", o.flow.affine_cap);
  o.flow.atol = io::get_number(sec, "atol", o.flow.atol);
  o.flow.rtol = io::get_number(sec, "rtol", o.flow.rtol);
  return o;
}

}  // namespace

CommandOutcome cmd_trap(const json& cfg, const RunOptions& opt, std::ostream& log) {
  CommandOutcome out;
  const auto ps = params_spec(cfg);
  const auto g = geometry_from(ps, ps.a);
  const double r0 = io::resolve_r0(g.params, cfg.contains("r0") ? cfg["r0"] : json("mid"));
  const auto frame = StationaryFrame::make(g.params, r0);
  const auto seed = effective_seed(cfg, opt);

  const json& orth = io::get_object(cfg, "orthogonal");
  const json& con = io::get_object(cfg, "contrast");
  const bool run_orth = io::get_bool(orth, "enabled", true);
  const bool run_con = io::get_bool(con, "enabled", false);
  if (!run_orth && !run_con) throw Error(ErrorCode::ConfigError, "nothing to run: both censuses disabled");
  // validate both sections before spending time on either
  const auto oo = census_options(orth, seed, 1000);
  const auto co = census_options(con, seed + 1, 2);

  json rep;
  rep["version"] = io::tool_version();
  rep["command"] = "trap";
  rep["params"] = params_json(ps, ps.a);
  rep["r0"] = r0;
  rep["frame"] = io::frame_label(g.params, r0);
  rep["omega"] = frame.omega;
  rep["seed"] = seed;
  io::CsvWriter csv({"census", "index", "r", "theta", "xi_t", "xi_r", "xi_phi", "xi_theta", "status",
                     "s_final", "r_min", "r_max", "max_drift", "trapped", "error"});
  bool pass = true;
  long failures = 0;
  if (run_orth) {
    const auto c = trapping_scan(g, frame, oo);
    census_rows(csv, c);
    rep["orthogonal"] = census_json(c);
    const bool ok = c.trapped == 0;
    pass = pass && ok;
    failures += c.failures;
    out.verdicts["orthogonal"] = pass_fail(ok);
    log << "orthogonal: sampled " << c.sampled() << (c.vacuous() ? " (T timelike on the band)" : "")
        << ", trapped " << c.trapped << ", failures " << c.failures << ", max drift "
        << io::format_double(c.max_drift) << "\n";
  }
  if (run_con) {
    const auto c = contrast_scan(g, co, io::get_bool(con, "polish", true));
    census_rows(csv, c);
    rep["contrast"] = census_json(c);
    const bool ok = c.trapped > 0;
    pass = pass && ok;
    failures += c.failures;
    out.verdicts["contrast"] = pass_fail(ok);
    log << "contrast: sampled " << c.sampled() << ", trapped " << c.trapped << ", failures " << c.failures
        << "\n";
  }
  rep["failures"] = failures;
  rep["verdict"] = pass_fail(pass);
  log << "verdict: " << pass_fail(pass) << "\n";
  emit(out, opt, "trap.csv", csv.str());
  emit(out, opt, "trap.json", io::dump(rep));
  out.report = rep;
  out.exit_code = failures > 0 ? kNumerical : (pass ? kPass : kClaimFailure);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Potential potential_from(const json& cfg) {
  if (!cfg.contains("A")) return Potential::zero();
  const json& A = cfg["A"];
  if (A.is_string() && A.get<std::string>() == "zero") return Potential::zero();
  if (!A.is_object()) throw Error(ErrorCode::ConfigError, "'A' must be an object with a 'kind'");
  const std::string kind = io::get_string(A, "kind", "zero");
  auto complex_of = [](const json& v) -> cplx {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
      return {v[0].get<double>(), v[1].get<double>()};
    throw Error(ErrorCode::ConfigError, "potential values must be numbers or [re, im] pairs");
  };
  auto numbers = [](const json& obj, const std::string& key) {
    std::vector<double> v;
    if (!obj.contains(key) || !obj[key].is_array()) throw Error(ErrorCode::ConfigError, "'" + key + "' must be an array");
    for (const auto& x : obj[key]) {
      if (!x.is_number()) throw Error(ErrorCode::ConfigError, "'" + key + "' must hold numbers");
      v.push_back(x.get<double>());
    }
    return v;
  };
  if (kind == "zero") return Potential::zero();
  if (kind == "constant") {
    if (!A.contains("value")) throw Error(ErrorCode::ConfigError, "constant potential needs 'value'");
    return Potential::constant(complex_of(A["value"]));
  }
  if (kind == "tabulated") {
    auto r = numbers(A, "r"), th = numbers(A, "theta");
    if (!A.contains("values") || !A["values"].is_array())
      throw Error(ErrorCode::ConfigError, "tabulated potential needs 'values'");
    std::vector<cplx> vals;
    for (const auto& v : A["values"]) vals.push_back(complex_of(v));
    try {
      return Potential::tabulated(std::move(r), std::move(th), std::move(vals));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }
  throw Error(ErrorCode::ConfigError, "potential kind must be zero, constant or tabulated");
}

Parity parity_from(const std::string& s) {
  if (s == "all") return Parity::All;
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  throw Error(ErrorCode::ConfigError, "parity must be all, even or odd");
}

json mode_json(const QNMMode& md) {
  json j{{"sigma_T", complex_json(md.sigma)},
         {"sigma_lab", complex_json(md.sigma_lab)},
         {"multiplicity", md.multiplicity},
         {"residual", md.residual},
         {"doubling_delta", md.doubling_delta},
         {"converged", md.converged},
         {"admissible", md.admissible},
         {"dominant_l", md.dominant_l}};
  if (!md.note.empty()) j["note"] = md.note;
  return j;
}

}  // namespace

CommandOutcome cmd_qnm(const json& cfg, const RunOptions& opt, std::ostream& log) {
  CommandOutcome out;
  const auto ps = params_spec(cfg);
  const auto g = geometry_from(ps, ps.a);
  const double r0 = io::resolve_r0(g.params, cfg.contains("r0") ? cfg["r0"] : json("mid"));
  WaveOperatorSpec spec;
  spec.frame = StationaryFrame::make(g.params, r0);
  spec.m = int(io::get_integer(cfg, "m", 0));
  spec.potential = potential_from(cfg);
  GridSpec grid;
  grid.nr = int(io::get_integer(cfg, "Nr", grid.nr));
  grid.ntheta = int(io::get_integer(cfg, "Ntheta", grid.ntheta));
  grid.parity = parity_from(io::get_string(cfg, "parity", "all"));
  SolveOptions so;
  so.window = SpectralWindow::defaults(g);
  const json& w = io::get_object(cfg, "window");
  so.window.re_max = io::get_number(w, "re_max", so.window.re_max);
  so.window.im_min = io::get_number(w, "im_min", so.window.im_min);
  so.window.im_max = io::get_number(w, "im_max", so.window.im_max);
  if (!(so.window.re_max > 0 && so.window.im_max > so.window.im_min))
    throw Error(ErrorCode::ConfigError, "window must be a bounded, nonempty rectangle");
  so.s = io::get_number(cfg, "s", so.s);
  if (!(so.s >= 0.5)) throw Error(ErrorCode::ConfigError, "'s' must be at least 1/2");
  so.doubling_check = io::get_bool(cfg, "doubling", true);

  const auto op = WaveOperator::assemble(g, spec);
  const auto pencil = discretize(op, grid);
  const auto res = solve_qnm(pencil, so);

  json rep;
  rep["version"] = io::tool_version();
  rep["command"] = "qnm";
  rep["params"] = params_json(ps, ps.a);
  rep["r0"] = r0;
  rep["frame"] = io::frame_label(g.params, r0);
  rep["omega"] = res.omega;
  rep["m"] = res.m;
  rep["potential"] = to_string(spec.potential.kind());
  rep["grid"] = json{{"Nr", grid.nr}, {"Ntheta", grid.ntheta}, {"parity", to_string(grid.parity)},
                     {"delta", pencil.delta}, {"dimension", res.dimension}};
  rep["window"] = json{{"re_max", so.window.re_max}, {"im_min", so.window.im_min}, {"im_max", so.window.im_max}};
  rep["beta"] = res.beta;
  rep["s"] = res.s;
  rep["admissibility_bound"] = res.admissibility_bound;
  rep["window_below_line"] = res.window_below_line;
  rep["required_s"] = res.required_s;
  rep["doubling_check"] = so.doubling_check;
  rep["raw_in_window"] = res.raw_in_window;
  json modes = json::array(), unconv = json::array();
  for (const auto& md : res.modes) modes.push_back(mode_json(md));
  for (const auto& md : res.unconverged) unconv.push_back(mode_json(md));
  rep["modes"] = modes;
  rep["unconverged"] = unconv;
  rep["warnings"] = res.warnings;
  rep["empty_window"] = res.empty();
  out.verdicts["qnm"] = res.empty() ? "EmptyWindow" : "PASS";
  for (const auto& wmsg : res.warnings) log << "warning: " << wmsg << "\n";
  log << res.modes.size() << " converged modes, " << res.unconverged.size() << " rejected candidates\n";
  for (const auto& md : res.modes)
    log << "  sigma_T = " << io::format_double(md.sigma.real()) << " " << (md.sigma.imag() < 0 ? "-" : "+")
        << " " << io::format_double(std::abs(md.sigma.imag())) << "i  (l~" << md.dominant_l << ", k "
        << md.multiplicity << ")\n";

  if (io::get_bool(cfg, "eigenfunctions", false)) {
    io::CsvWriter csv({"mode", "r", "theta", "re", "im"});
    const int n = 65;
    for (std::size_t k = 0; k < res.modes.size(); ++k) {
      const auto& md = res.modes[k];
      // fix the phase so the largest equatorial sample is real and positive
      cplx ref = 0;
      std::vector<std::pair<double, cplx>> vals;
      for (int i = 0; i < n; ++i) {
        const double r = pencil.r_min + (pencil.r_max - pencil.r_min) * i / (n - 1);
        const cplx v = pencil.evaluate(md.vector, r, std::numbers::pi / 2);
        vals.push_back({r, v});
        if (std::abs(v) > std::abs(ref)) ref = v;
      }
      const cplx ph = ref == 0.0 ? 1.0 : std::abs(ref) / ref;
      for (const auto& [r, v] : vals)
        csv.row({std::to_string(k), io::CsvWriter::cell(r), io::CsvWriter::cell(std::numbers::pi / 2),
                 io::CsvWriter::cell((v * ph).real()), io::CsvWriter::cell((v * ph).imag())});
    }
    emit(out, opt, "qnm_eigenfunctions.csv", csv.str());
  }
  emit(out, opt, "qnm.json", io::dump(rep));
  out.report = rep;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> number_list(const json& obj, const std::string& key, std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array() || obj[key].empty()) throw Error(ErrorCode::ConfigError, "'" + key + "' must be a nonempty array");
  std::vector<double> v;
  for (const auto& x : obj[key]) {
    if (!x.is_number()) throw Error(ErrorCode::ConfigError, "'" + key + "' must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

struct Claim {
  std::string name;
  double a = 0;
  std::string frame;
  bool pass = false;
  json detail;
};

}  // namespace

CommandOutcome cmd_certify(const json& cfg, const RunOptions& opt, std::ostream& log) {
  CommandOutcome out;
  const auto ps = params_spec(cfg);
  const auto seed = effective_seed(cfg, opt);
  const json& matrix = io::get_object(cfg, "matrix");
  const auto avals = number_list(matrix, "a", {0.15, 0.3});
  json frames = matrix.contains("r0") ? matrix["r0"] : json::array({"r_e", "mid", "critical", "r_c"});
  if (!frames.is_array() || frames.empty()) throw Error(ErrorCode::ConfigError, "'matrix.r0' must be a nonempty array");

  const json& cx = io::get_object(cfg, "convexity");
  const int conv_samples = int(io::get_integer(cx, "samples", 1000));
  ConvexityOptions copt;
  copt.fd_step = io::get_number(cx, "fd_step", copt.fd_step);
  copt.tolerance = io::get_number(cx, "tolerance", copt.tolerance);
  copt.corrupt_mu_sign = io::get_bool(io::get_object(cfg, "fault_injection"), "corrupt_mu_sign", false);
  const json& es = io::get_object(cfg, "escape");
  EscapeGrid eg;
  eg.nr = int(io::get_integer(es, "nr", eg.nr));
  eg.ntheta = int(io::get_integer(es, "ntheta", eg.ntheta));
  eg.npsi = int(io::get_integer(es, "npsi", eg.npsi));
  eg.refine = int(io::get_integer(es, "refine", eg.refine));
  const double eps = io::get_number(es, "epsilon", 1e-3);
  const json& sg = io::get_object(cfg, "sigma");
  const int sigma_count = int(io::get_integer(sg, "count", 100));
  const double sigma_length = io::get_number(sg, "length", 20.0);
  const int radial_ntheta = int(io::get_integer(io::get_object(cfg, "radial"), "ntheta", 64));
  const json& er = io::get_object(cfg, "ergoregion");
  const int er_nr = int(io::get_integer(er, "nr", 200)), er_nt = int(io::get_integer(er, "ntheta", 100));
  if (conv_samples < 1 || sigma_count < 1) throw Error(ErrorCode::ConfigError, "sample counts must be positive");

  // resolve every frame up front so a bad r0 is a config error before any work
  std::vector<Geometry> geos;
  std::vector<std::vector<double>> r0s;
  for (double a : avals) {
    geos.push_back(geometry_from(ps, a));
    std::vector<double> rs;
    for (const auto& f : frames) rs.push_back(io::resolve_r0(geos.back().params, f));
    r0s.push_back(rs);
  }

  std::vector<Claim> claims;
  for (std::size_t ia = 0; ia < avals.size(); ++ia) {
    const double a = avals[ia];
    const Geometry& g = geos[ia];
    const auto& p = g.params;
    for (std::size_t ir = 0; ir < r0s[ia].size(); ++ir) {
      const double r0 = r0s[ia][ir];
      const auto frame = StationaryFrame::make(p, r0);
      const std::string label = io::frame_label(p, r0);
      const std::uint64_t s = seed + 1000 * ia + 10 * ir;

      const auto pts = sample_turning_points(g, frame, s, conv_samples, eps);
      const auto conv = convexity_check(g, frame, pts, copt);
      claims.push_back({"convexity", a, label, conv.pass,
                        json{{"samples", conv.samples}, {"sign_violations", conv.sign_violations},
                             {"max_mismatch", conv.max_mismatch}, {"fault_injected", conv.fault_injected}}});

      const auto esc = escape_constant_search(g, frame, eg, eps);
      claims.push_back({"escape", a, label, esc.certified(),
                        json{{"C", esc.C}, {"doublings", esc.doublings}, {"points", esc.points},
                             {"recheck_points", esc.recheck_points},
                             {"recheck_violations", esc.recheck_violations}, {"vacuous", esc.vacuous}}});

      const auto map = ergoregion_map(p, frame, er_nr, er_nt);
      const bool horizon = r0 == p.r_e() || r0 == p.r_c();
      const int expected = a == 0.0 ? 0 : (horizon ? 1 : 2);
      // g(T, T) over theta at r = r0: negative inside, zero on a horizon
      double at_r0 = 0, at_r0_max = -std::numeric_limits<double>::infinity();
      for (int j = 1; j < 64; ++j) {
        const double v = t_norm(p, frame, r0, std::numbers::pi * j / 64);
        at_r0 = std::max(at_r0, std::abs(v));
        at_r0_max = std::max(at_r0_max, v);
      }
      const bool causal_ok = horizon ? at_r0 < 1e-12 : at_r0_max < 0.0;
      claims.push_back({"ergoregions", a, label, map.spacelike_components() == expected && causal_ok,
                        json{{"components", map.spacelike_components()}, {"expected", expected},
                             {"g_TT_at_r0_max", at_r0_max}, {"collar_gamma", map.collar_gamma}}});
    }

    const auto inv = sigma_invariance(g, seed + 7 + 1000 * ia, sigma_count, sigma_length);
    claims.push_back({"sigma_split_invariance", a, "-", inv.pass,
                      json{{"trajectories", inv.trajectories}, {"samples", inv.samples}, {"plus", inv.plus},
                           {"minus", inv.minus}, {"flips", inv.flips}, {"degenerate", inv.degenerate}}});

    for (Horizon h : {Horizon::Event, Horizon::Cosmological}) {
      const auto frame = StationaryFrame::make(p, horizon_radius(p, h));
      const auto rp = radial_point_check(g, frame, h, true, radial_ntheta);
      claims.push_back({"radial_point_" + to_string(h), a, h == Horizon::Event ? "r_e" : "r_c", rp.pass,
                        json{{"symbol_residual", rp.symbol_residual}, {"transverse_max", rp.transverse_max},
                             {"xi_r_coefficient", rp.xi_r_coefficient},
                             {"coefficient_mismatch", rp.coefficient_mismatch}}});
    }
  }

  json rep;
  rep["version"] = io::tool_version();
  rep["command"] = "certify";
  rep["params"] = json{{"lambda", ps.lambda}, {"mass", ps.mass}, {"a", avals}};
  rep["seed"] = seed;
  rep["fault_injection"] = json{{"corrupt_mu_sign", copt.corrupt_mu_sign}};
  io::CsvWriter csv({"claim", "a", "frame", "verdict"});
  json list = json::array();
  std::vector<std::string> failed;
  for (const auto& c : claims) {
    list.push_back(json{{"claim", c.name}, {"a", c.a}, {"frame", c.frame}, {"verdict", pass_fail(c.pass)},
                        {"detail", c.detail}});
    csv.row({c.name, io::CsvWriter::cell(c.a), c.frame, pass_fail(c.pass)});
    const std::string key = c.name + "[a=" + io::format_double(c.a) + (c.frame == "-" ? "" : ",r0=" + c.frame) + "]";
    out.verdicts[key] = pass_fail(c.pass);
    log << pass_fail(c.pass) << "  " << key << "\n";
    if (!c.pass) failed.push_back(key);
  }
  rep["claims"] = list;
  rep["failed"] = failed;
  rep["verdict"] = pass_fail(failed.empty());
  if (!failed.empty()) {
    log << "failed claims:";
    for (const auto& f : failed) log << " " << f;
    log << "\n";
  }
  emit(out, opt, "certify.csv", csv.str());
  emit(out, opt, "certify.json", io::dump(rep));
  out.report = rep;
  out.exit_code = failed.empty() ? kPass : kClaimFailure;
  return out;
}

// ---------------------------------------------------------------------------

int run_command(const std::string& name, const json& config_in, const RunOptions& options, std::ostream& log) {
  io::RunManifest manifest;
  manifest.command = name;
  manifest.started = io::timestamp();
  json config = config_in;
  RunOptions opt = options;
  int code = kPass;
  try {
    if (io::RunManifest::looks_like_manifest(config)) {
      const auto m = io::RunManifest::from_json(config);
      if (!m.command.empty() && m.command != name)
        throw Error(ErrorCode::ConfigError, "manifest was written by '" + m.command + "', not '" + name + "'");
      config = m.config;
      if (!opt.seed) opt.seed = m.seed;
    }
    if (!config.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    const auto seed = effective_seed(config, opt);
    config["seed"] = seed;
    opt.seed = seed;
    manifest.seed = seed;
    manifest.config = config;
    fs::create_directories(opt.out);

    CommandOutcome res;
    if (name == "params") res = cmd_params(config, opt, log);
    else if (name == "trap") res = cmd_trap(config, opt, log);
    else if (name == "qnm") res = cmd_qnm(config, opt, log);
    else if (name == "certify") res = cmd_certify(config, opt, log);
    else throw Error(ErrorCode::ConfigError, "unknown command '" + name + "'");
    code = res.exit_code;
    manifest.verdicts = res.verdicts;
    manifest.outputs = res.outputs;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    code = exit_code_for(e.code());
    manifest.verdicts["error"] = std::string(to_string(e.code()));
    if (manifest.config.is_null()) {
      // nothing trustworthy to record
      return code;
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kNumerical;
  }
  manifest.finished = io::timestamp();
  try {
    io::write_atomic(opt.out / "manifest.json", io::dump(manifest.to_json()));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kUsage;
  }
  return code;
}

}  // namespace kds::cli
