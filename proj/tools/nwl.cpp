// nwl: command-line front end for the nonlocal wave toolkit.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "nwl/nwl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nwl;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kNumerical = 2, kInvalid = 3 };

struct Common {
  std::string config;
  std::string out = "nwl_out";
  int n = 0;
  long M = 0;
  double tol = 0.0;
  unsigned long seed = 0;
  int threads = 1;
};

struct Context {
  json cfg = json::object();
  Symbol symbol = whitham();
  RunManifest manifest;
  fs::path out;
  std::string started;
  int n = 256;
  long M = 1000000;
  double tol = 1e-11;
};

Context make_context(const Common& c, const std::string& command, bool need_symbol = true) {
  Context ctx;
  ctx.started = utc_now();
  if (!c.config.empty()) ctx.cfg = read_json(c.config);
  if (!ctx.cfg.is_object()) throw DomainError("config must be a JSON object");
  if (need_symbol) {
    if (ctx.cfg.contains("kind")) ctx.symbol = symbol_from_json(ctx.cfg);
    else if (ctx.cfg.contains("symbol")) ctx.symbol = symbol_from_json(ctx.cfg["symbol"]);
    else if (!c.config.empty()) throw DomainError("config: missing 'symbol'");
  }
  ctx.n = c.n > 0 ? c.n : ctx.cfg.value("n", 256);
  ctx.M = c.M > 0 ? c.M : ctx.cfg.value("M", 1000000L);
  ctx.tol = c.tol > 0.0 ? c.tol : ctx.cfg.value("tol", 1e-11);
  const char* env = std::getenv("NWL_OUT");
  ctx.out = env && *env ? fs::path(env) : fs::path(c.out);
  ctx.manifest.command = command;
  ctx.manifest.symbol = ctx.symbol.config();
  ctx.manifest.n = ctx.n;
  ctx.manifest.M = ctx.M;
  ctx.manifest.solve_tol = std::max(ctx.tol, 1e-10);
  ctx.manifest.seed = c.seed ? c.seed : ctx.cfg.value("seed", 0UL);
  ctx.manifest.threads = c.threads;
  return ctx;
}

void write_report(const Context& ctx, const std::string& file, const std::string& schema, json result) {
  atomic_write(ctx.out / file, make_report(schema, ctx.manifest, std::move(result), ctx.started).dump(2) + "\n");
}

json sub(const json& cfg, const char* key) { return cfg.contains(key) && cfg[key].is_object() ? cfg[key] : json::object(); }

BranchOptions branch_options(const Context& ctx, double default_theta) {
  const auto b = sub(ctx.cfg, "branch");
  BranchOptions o;
  o.theta = b.value("theta", default_theta);
  o.eps = b.value("eps", 0.01);
  o.min_steps = b.value("min_steps", 25);
  o.newton.tol = ctx.tol;
  return o;
}

/// Loads a profile CSV plus the JSON report that produced it.
WaveProfile load_profile(const std::string& csv, const std::string& manifest_path) {
  if (csv.empty() || manifest_path.empty()) throw DomainError("--profile and --manifest are required");
  auto phi = parse_profile_csv(read_text(csv));
  const json rep = read_json(manifest_path);
  const json& m = rep.contains("manifest") ? rep["manifest"] : rep;
  if (!m.contains("symbol")) throw DomainError("manifest: missing 'symbol'");
  const json& r = rep.contains("result") ? rep["result"] : rep;
  const json& prof = r.contains("profile") ? r["profile"] : r;
  if (!prof.contains("c")) throw DomainError("manifest: missing profile speed 'c'");
  WaveProfile p(std::move(phi), prof["c"].get<double>(), prof.value("b", 0.0), symbol_from_json(m["symbol"]));
  return with_residual(std::move(p));
}

// ---------------------------------------------------------------------------

json symbol_check_result(const Symbol& s) {
  json r;
  r["kind"] = to_string(s.kind());
  r["label"] = s.label();
  bool ok = true;
  if (s.has_real_extension()) {
    const auto cm = assumption_S_check(s, 8, 50);
    r["assumption_S"] = to_json(cm);
    if (!s.homogeneous()) ok = ok && cm.passed;
  }
  if (std::isfinite(s.order())) {
    const auto ord = symbol_order_check(s, 4, 200);
    r["order_check"] = to_json(ord);
    ok = ok && ord.passed;
  }
  // Binomial against recursive differences.
  double worst = 0.0;
  const long k0 = s.homogeneous() ? 1 : 0;
  for (int n = 0; n <= 10; ++n)
    for (long k = k0; k <= 100; ++k) {
      std::vector<double> row;
      for (int j = 0; j <= n; ++j) row.push_back(s(k + j));
      for (int d = 0; d < n; ++d)
        for (int j = 0; j + 1 < static_cast<int>(row.size()) - d; ++j) row[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j + 1)] - row[static_cast<std::size_t>(j)];
      const auto t = forward_difference_terms(s, n, k);
      worst = std::max(worst, std::abs(t.value - row[0]) / (1.0 + t.abs_sum));
    }
  r["difference_consistency"] = {{"max_relative_gap", worst}, {"passed", worst <= 1e-12}};
  ok = ok && worst <= 1e-12;
  r["passed"] = ok;
  return r;
}

int cmd_symbol_check(const Common& c) {
  auto ctx = make_context(c, "symbol-check");
  auto r = symbol_check_result(ctx.symbol);
  const bool ok = r["passed"];
  write_report(ctx, "symbol_check.json", "nwl/symbol-check/1", r);
  std::cout << "symbol-check " << ctx.symbol.label() << ": " << (ok ? "passed" : "FAILED") << "\n";
  return ok ? kOk : kCheckFailed;
}

json closed_form_check(const KernelTable& kt) {
  const auto& cfg = kt.symbol.config();
  if (cfg.value("kind", "") != "fkdv") return nullptr;
  const double r = cfg.value("r", 0.0);
  double worst = 0.0;
  std::string form;
  for (int j = 0; j < kt.n(); ++j) {
    const double x = kt.grid.x(j);
    if (r == -2.0 && x != 0.0) {
      const double y = x > 0.0 ? x : x + 2.0 * kPi;
      form = "x^2/2 - pi x + pi^2/3";
      worst = std::max(worst, std::abs(kt.values[static_cast<std::size_t>(j)] - (y * y / 2 - kPi * y + kPi * kPi / 3)));
    } else if (r == -1.0 && x >= 0.05) {
      form = "-2 ln(2 sin(x/2))";
      worst = std::max(worst, std::abs(kt.values[static_cast<std::size_t>(j)] + 2.0 * std::log(2.0 * std::sin(0.5 * x))));
    }
  }
  if (form.empty()) return nullptr;
  return {{"form", form}, {"max_abs_error", worst}, {"passed", worst <= 1e-6}};
}

json kernel_result(const Context& ctx, bool origin, bool& ok) {
  const PeriodicGrid g(ctx.n);
  KernelOptions ko;
  ko.M = std::max<long>(ctx.M, ctx.n);
  const auto kt = build_kernel(ctx.symbol, g, ko);
  const int delta_cells = sub(ctx.cfg, "kernel").value("delta_cells", 4);
  const auto mono = check_monotone_half_period(kt, delta_cells * g.spacing());
  json r = {{"kernel", kernel_metadata(kt)},
            {"evenness_defect", evenness_defect(kt)},
            {"monotone_half_period", to_json(mono)}};
  ok = (mono.passed || mono.excluded) && evenness_defect(kt) <= 1e-12 * std::max(1.0, std::abs(kt.values[1]));
  if (auto cf = closed_form_check(kt); !cf.is_null()) {
    r["closed_form"] = cf;
    ok = ok && cf["passed"].get<bool>();
  }
  if (origin && !kt.degenerate) {
    const auto org = check_origin_behaviour(ctx.symbol, {10000, 100000, 1000000}, {0.1, 0.01, 0.001});
    r["origin_behaviour"] = to_json(org);
    ok = ok && org.passed;
  }
  atomic_write(ctx.out / "kernel.csv", kernel_csv(kt));
  return r;
}

int cmd_kernel(const Common& c, bool origin) {
  auto ctx = make_context(c, "kernel");
  bool ok = false;
  auto r = kernel_result(ctx, origin, ok);
  r["passed"] = ok;
  write_report(ctx, "kernel.json", "nwl/kernel/1", r);
  std::cout << "kernel " << ctx.symbol.label() << ": " << (ok ? "passed" : "FAILED") << "\n";
  return ok ? kOk : kCheckFailed;
}

json solve_result(const WaveProfile& p) {
  return {{"profile", profile_summary(p)}, {"converged", true}};
}

int cmd_solve(const Common& c) {
  auto ctx = make_context(c, "solve");
  const auto scfg = sub(ctx.cfg, "solve");
  const std::string method = scfg.value("method", "newton");
  const PeriodicGrid g(ctx.n);
  std::optional<WaveProfile> p;
  json extra = json::object();
  if (method == "fixed_point") {
    const double c0 = scfg.value("c", 1.05 * ctx.symbol(1));
    const double amp = scfg.value("amplitude", 0.01);
    FixedPointOptions fo;
    fo.tol = std::max(ctx.tol, 1e-13);
    auto init = SpectralField::from_function(g, [&](double x) { return amp * 0.5 * c0 * std::cos(x); });
    p = fixed_point_solve(ctx.symbol, c0, init, fo);
    extra["method"] = "fixed_point";
  } else if (method == "newton") {
    auto bo = branch_options(ctx, 0.5);
    bo.theta = scfg.value("theta", 0.5);
    auto br = continue_branch(ctx.symbol, g, bo);
    if (br.terminated_reason != Termination::TargetHeight)
      throw IterationFailure(std::string("solve: continuation stopped: ") + to_string(br.terminated_reason),
                             br.attempted_steps, 0.0);
    p = br.profiles.back();
    extra["method"] = "newton";
    extra["continuation_steps"] = br.profiles.size();
    extra["theta"] = bo.theta;
  } else {
    throw DomainError("solve: unknown method '" + method + "'");
  }
  ctx.manifest.parameters = extra;
  atomic_write(ctx.out / "profile.csv", profile_csv(p->phi));
  atomic_write(ctx.out / "coefficients.csv", coefficients_csv(p->phi));
  auto r = solve_result(*p);
  r["converged"] = p->residual_norm <= ctx.manifest.solve_tol;
  write_report(ctx, "solve.json", "nwl/solve/1", r);
  std::cout << "solve " << ctx.symbol.label() << ": c = " << p->c << ", height ratio = " << p->height_ratio()
            << ", residual = " << p->residual_norm << "\n";
  return r["converged"].get<bool>() ? kOk : kNumerical;
}

json branch_result(const Context& ctx, const Branch& br, bool two_route, bool& ok) {
  json profiles = json::array();
  ok = br.terminated_reason == Termination::TargetHeight;
  std::optional<QuadratureKernel> qk;
  if (two_route) qk = make_quadrature_kernel(ctx.symbol, ctx.n, ctx.M);
  for (const auto& p : br.profiles) {
    json e = profile_summary(p);
    ok = ok && p.residual_norm <= ctx.manifest.solve_tol;
    if (qk) {
      const auto tr = residual_two_route(p, *qk);
      e["residual_quadrature"] = tr.residual_quadrature;
      e["route_difference"] = tr.route_difference;
      ok = ok && tr.route_difference <= 1e-6;
    }
    profiles.push_back(e);
  }
  return {{"terminated_reason", to_string(br.terminated_reason)},
          {"accepted_steps", br.profiles.size()},
          {"attempted_steps", br.attempted_steps},
          {"rejected_steps", br.rejected_steps},
          {"profiles", profiles},
          {"profile", profile_summary(br.profiles.back())}};
}

int cmd_branch(const Common& c, bool two_route) {
  auto ctx = make_context(c, "branch");
  auto bo = branch_options(ctx, 0.9);
  ctx.manifest.parameters = {{"theta", bo.theta}, {"eps", bo.eps}, {"min_steps", bo.min_steps}};
  const auto br = continue_branch(ctx.symbol, PeriodicGrid(ctx.n), bo);
  bool ok = false;
  auto r = branch_result(ctx, br, two_route, ok);
  r["passed"] = ok;
  atomic_write(ctx.out / "branch.csv", branch_csv(br));
  atomic_write(ctx.out / "profile.csv", profile_csv(br.profiles.back().phi));
  write_report(ctx, "branch.json", "nwl/branch/1", r);
  std::cout << "branch " << ctx.symbol.label() << ": " << br.profiles.size() << " profiles, "
            << to_string(br.terminated_reason) << "\n";
  return ok ? kOk : kCheckFailed;
}

int cmd_symmetry(const Common& c, const std::string& profile, const std::string& manifest) {
  auto p = load_profile(profile, manifest);
  auto ctx = make_context(c, "symmetry", false);
  ctx.symbol = p.symbol;
  ctx.manifest.symbol = p.symbol.config();
  ctx.manifest.n = p.phi.size();
  AuditOptions ao;
  ao.solve_tolerance = ctx.manifest.solve_tol;
  const auto rep = full_symmetry_audit(p, ao);
  auto r = to_json(rep);
  r["residual_norm"] = p.residual_norm;
  write_report(ctx, "symmetry.json", "nwl/symmetry/1", r);
  std::cout << "symmetry: " << rep.status << "\n";
  return rep.passed ? kOk : kCheckFailed;
}

int cmd_verify(const Common& c, const std::string& which, const std::string& profile, const std::string& manifest,
               double lambda, double xbar, double shift) {
  auto p = load_profile(profile, manifest);
  if (c.n > p.phi.size()) {
    WaveProfile q(resample(p.phi, c.n), p.c, p.b, p.symbol);
    p = newton_solve(q, Constraint::fix_height(q.height()));
  }
  if (shift != 0.0) p = with_residual(WaveProfile(translate(p.phi, shift), p.c, p.b, p.symbol));
  auto ctx = make_context(c, "verify " + which, false);
  ctx.symbol = p.symbol;
  ctx.manifest.symbol = p.symbol.config();
  ctx.manifest.n = p.phi.size();
  ctx.manifest.parameters = {{"lambda", lambda}, {"xbar", xbar}, {"shift", shift}};
  if (which == "touching") {
    KernelOptions ko;
    ko.M = std::max<long>(ctx.M, p.phi.size());
    const auto kt = build_kernel(p.symbol, p.phi.grid(), ko);
    TouchingOptions to;
    to.M = ctx.M;
    const auto rep = verify_touching(p, lambda, xbar, kt, to);
    write_report(ctx, "verify_touching.json", "nwl/verify-touching/1", to_json(rep));
    std::cout << "verify touching: " << to_string(rep.verdict) << "\n";
    return rep.verdict == TouchingVerdict::Violated ? kCheckFailed : kOk;
  }
  if (which == "boundary") {
    const int m = snap_half_grid(lambda, p.phi.size());
    const double lam = half_grid_axis(m, p.phi.size());
    WaveProfile bar(reflect(p.phi, lam), p.c, p.b, p.symbol);
    BoundaryOptions bo;
    bo.M = std::min<long>(ctx.M, 200000);
    const auto rep = verify_boundary_point(p, bar, lam, bo);
    write_report(ctx, "verify_boundary.json", "nwl/verify-boundary/1", to_json(rep));
    std::cout << "verify boundary: " << to_string(rep.verdict) << "\n";
    return rep.verdict == BoundaryVerdict::Violated ? kCheckFailed : kOk;
  }
  throw DomainError("verify: expected 'touching' or 'boundary'");
}

int cmd_evolve(const Common& c, const std::string& profile, const std::string& manifest, double dt, double t_end,
               int stride, int periods) {
  auto p = load_profile(profile, manifest);
  auto ctx = make_context(c, "evolve", false);
  ctx.symbol = p.symbol;
  ctx.manifest.symbol = p.symbol.config();
  ctx.manifest.n = p.phi.size();
  EvolutionOptions eo;
  eo.dt = dt;
  eo.t_end = periods > 0 ? periods * 2.0 * kPi / p.c : t_end;
  eo.snapshot_stride = stride;
  ctx.manifest.parameters = {{"dt", dt}, {"t_end", eo.t_end}, {"snapshot_stride", stride}, {"periods", periods}};
  const auto run = integrate(p.phi, p.symbol, eo);
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%04zu.csv", i);
    atomic_write(ctx.out / name, profile_csv(run.snapshots[i].second));
  }
  double mean_drift = 0.0;
  for (double m : run.mean) mean_drift = std::max(mean_drift, std::abs(m - run.mean.front()));
  const double drift = max_abs_difference(run.final_state, translate(p.phi, p.c * eo.t_end));
  json snaps = json::array();
  for (const auto& s : run.snapshots) snaps.push_back(s.first);
  json r = {{"dt", run.dt},           {"t_end", run.t_end},       {"steps", run.steps},
            {"snapshot_times", snaps}, {"mean_drift", mean_drift}, {"drift", drift}};
  write_report(ctx, "evolve.json", "nwl/evolve/1", r);
  std::cout << "evolve: drift against the traveling translate = " << drift << "\n";
  return kOk;
}

int cmd_all(const Common& c) {
  auto ctx = make_context(c, "all");
  json r = json::object();
  bool ok = true;
  r["symbol_check"] = symbol_check_result(ctx.symbol);
  ok = ok && r["symbol_check"]["passed"].get<bool>();
  {
    Context kctx = ctx;
    kctx.n = std::max(ctx.n, 1024);
    bool kok = false;
    auto kr = kernel_result(kctx, false, kok);
    kr["passed"] = kok;
    r["kernel"] = kr;
    ok = ok && kok;
  }
  auto bo = branch_options(ctx, 0.9);
  const auto br = continue_branch(ctx.symbol, PeriodicGrid(ctx.n), bo);
  bool bok = false;
  r["branch"] = branch_result(ctx, br, false, bok);
  r["branch"]["passed"] = bok;
  ok = ok && bok;
  // Audit the branch profiles below the near-highest cutoff.
  json audits = json::array();
  bool aok = true;
  AuditOptions ao;
  ao.solve_tolerance = ctx.manifest.solve_tol;
  for (const auto& p : br.profiles) {
    if (p.height_ratio() > 0.98) continue;
    const auto a = full_symmetry_audit(p, ao);
    audits.push_back({{"height_ratio", p.height_ratio()}, {"status", a.status}, {"defect", a.defect}, {"crest_count", a.crest_count}});
    aok = aok && (a.passed || a.status == "under_resolved");
  }
  r["symmetry"] = {{"audits", audits}, {"passed", aok}};
  ok = ok && aok;
  // Mid-branch profile for the lemma verifiers and evolution.
  const WaveProfile* mid = &br.profiles.front();
  for (const auto& p : br.profiles)
    if (std::abs(p.height_ratio() - 0.5) < std::abs(mid->height_ratio() - 0.5)) mid = &p;
  KernelOptions ko;
  ko.M = std::max<long>(ctx.M, ctx.n);
  const auto kt = build_kernel(ctx.symbol, mid->phi.grid(), ko);
  TouchingOptions to;
  to.M = ctx.M;
  const auto tr = verify_touching(*mid, -0.3, 1.0, kt, to);
  r["touching"] = to_json(tr);
  ok = ok && tr.verdict == TouchingVerdict::ContradictionConfirmed;
  // The boundary routes need n >= 512 to agree.
  WaveProfile fine = *mid;
  if (mid->phi.size() < 512) {
    WaveProfile q(resample(mid->phi, 512), mid->c, mid->b, ctx.symbol);
    fine = newton_solve(q, Constraint::fix_height(q.height()), bo.newton);
  }
  WaveProfile plus(translate(fine.phi, 0.2), fine.c, fine.b, ctx.symbol);
  WaveProfile minus(translate(fine.phi, -0.2), fine.c, fine.b, ctx.symbol);
  try {
    const auto bp = verify_boundary_point(plus, minus, 0.0);
    r["boundary"] = to_json(bp);
    ok = ok && bp.verdict == BoundaryVerdict::Positive;
  } catch (const ResolutionError& e) {
    r["boundary"] = {{"verdict", "resolution-error"}, {"error", e.what()}};
    ok = false;
  }
  const auto trv = traveling_check(*mid, 1);
  r["traveling"] = to_json(trv);
  ok = ok && trv.drift <= 1e-5;
  r["passed"] = ok;
  atomic_write(ctx.out / "branch.csv", branch_csv(br));
  atomic_write(ctx.out / "profile.csv", profile_csv(mid->phi));
  write_report(ctx, "all.json", "nwl/all/1", r);
  std::cout << "all " << ctx.symbol.label() << ": " << (ok ? "passed" : "FAILED") << "\n";
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nwl: Fourier multiplier symbols, kernels, traveling waves and symmetry checks"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", common.config, "JSON configuration file");
    s->add_option("--out", common.out, "output directory (NWL_OUT overrides)");
    s->add_option("--n", common.n, "grid size");
    s->add_option("--M", common.M, "kernel truncation");
    s->add_option("--tol", common.tol, "solver tolerance");
    s->add_option("--seed", common.seed, "seed for randomized checks");
    s->add_option("--threads", common.threads, "thread count (recorded; computations are serial)");
  };
  std::string profile, manifest, which;
  double lambda = -0.3, xbar = 1.0, shift = 0.0, dt = 0.0, t_end = 1.0;
  int stride = 0, periods = 0;
  bool origin = false, two_route = false;

  auto* sc = app.add_subcommand("symbol-check", "complete monotonicity, order and difference checks");
  auto* kc = app.add_subcommand("kernel", "build the kernel and check evenness and half-period decrease");
  kc->add_flag("--origin", origin, "also check the behaviour at the origin");
  auto* so = app.add_subcommand("solve", "compute one traveling wave");
  auto* bc = app.add_subcommand("branch", "height continuation of the wave branch");
  bc->add_flag("--two-route", two_route, "recheck residuals with kernel quadrature");
  auto* sy = app.add_subcommand("symmetry", "symmetry audit of a profile");
  auto* ve = app.add_subcommand("verify", "touching or boundary-point verifier");
  ve->add_option("which", which, "touching | boundary")->required()->check(CLI::IsMember({"touching", "boundary"}));
  ve->add_option("--lambda", lambda, "reflection axis");
  ve->add_option("--xbar", xbar, "evaluation point (touching)");
  ve->add_option("--shift", shift, "translate the profile first");
  auto* ev = app.add_subcommand("evolve", "time integration of a profile");
  ev->add_option("--dt", dt, "time step (0 = stable default)");
  ev->add_option("--t-end", t_end, "final time");
  ev->add_option("--periods", periods, "integrate this many periods 2pi/c instead of --t-end");
  ev->add_option("--snapshot-stride", stride, "steps between snapshots");
  auto* al = app.add_subcommand("all", "full pipeline for one symbol");
  for (auto* s : {sc, kc, so, bc, sy, ve, ev, al}) add_common(s);
  for (auto* s : {sy, ve, ev}) {
    s->add_option("--profile", profile, "profile CSV (x,value)");
    s->add_option("--manifest", manifest, "JSON report that produced the profile");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*sc) return cmd_symbol_check(common);
    if (*kc) return cmd_kernel(common, origin);
    if (*so) return cmd_solve(common);
    if (*bc) return cmd_branch(common, two_route);
    if (*sy) return cmd_symmetry(common, profile, manifest);
    if (*ve) return cmd_verify(common, which, profile, manifest, lambda, xbar, shift);
    if (*ev) return cmd_evolve(common, profile, manifest, dt, t_end, stride, periods);
    if (*al) return cmd_all(common);
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kInvalid;
}
