#include "onehom/annulus.hpp"
#include "onehom/cli.hpp"
#include "onehom/energy.hpp"
#include "onehom/spiral.hpp"
#include "onehom/variational.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace onehom::cli {

using json = nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double dt = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return dt;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Runs a parameter validation and reports failures as configuration errors on `key`.
template <class F>
void validate_as(const RunConfig& cfg, const std::string& key, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(key, cfg.line_of(key), e.what());
    }
}

void require(bool ok, const RunConfig& cfg, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, cfg.line_of(key), what);
}

void write_text(const RunOptions& opt, const std::string& name, const std::string& text) {
    if (!opt.write_files) return;
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream out(opt.out_dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (opt.out_dir / name).string());
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json to_json(const EnergyBreakdown& e) {
    return {{"total", e.total}, {"quadratic", e.quadratic}, {"singular", e.singular}};
}

json to_json(const FitResult& f) {
    return {{"quantity", f.quantity}, {"exponent", f.exponent}, {"prefactor", f.prefactor},
            {"theta_lo", f.theta_lo}, {"theta_hi", f.theta_hi}, {"nodes", f.nodes},
            {"residual", f.residual}};
}

json to_json(const StationarityReport& r) {
    json modes = json::array();
    for (size_t i = 0; i < r.mode_names.size(); ++i)
        modes.push_back({{"mode", r.mode_names[i]}, {"eqm", r.eqm_residuals[i]}, {"ii", r.ii_residuals[i]}});
    return {{"energy", r.energy},         {"pin_window", r.pin_window},     {"dr_constant", r.dr_constant},
            {"dr_deviation", r.dr_deviation}, {"max_eqm", r.max_eqm()},   {"max_ii", r.max_ii()},
            {"modes", modes}};
}

json to_json(const ZeroReport& z) {
    return {{"zeros", z.zeros},         {"min_d", z.min_d},       {"min_d_index", z.min_d_index},
            {"min_abs_g", z.min_abs_g}, {"verdict", z.verdict()}};
}

std::string curve_csv(const Curve& c) {
    std::ostringstream os;
    write_curve_csv(os, c);
    return os.str();
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::isnan(x) ? x : (std::isnan(m) ? m : std::max(m, std::abs(x)));
    return m;
}

// ---------------------------------------------------------------- shared parameter blocks

SeedParams seed_params(const RunConfig& cfg) {
    SeedParams p;
    p.s = cfg.get_double("s", 0.5);
    p.eps = cfg.get_double("eps", 0.25);
    p.delta = cfg.get_double("delta", 0.25);
    validate_as(cfg, "s", [&] { EnergyModel{p.s}; });
    validate_as(cfg, "eps", [&] { p.validate(); });
    return p;
}

MinimizeConfig minimize_config(const RunConfig& cfg) {
    MinimizeConfig m;
    m.max_iters = cfg.get_int("max_iters", m.max_iters);
    m.gradient_tolerance = cfg.get_double("gradient_tolerance", m.gradient_tolerance);
    m.memory = cfg.get_int("memory", m.memory);
    m.armijo = cfg.get_double("armijo", m.armijo);
    m.backtrack = cfg.get_double("backtrack", m.backtrack);
    m.max_backtracks = cfg.get_int("max_backtracks", m.max_backtracks);
    m.schedule = cfg.get_ints("grids", {128, 256, 512, 1024, 2048});
    validate_as(cfg, "grids", [&] { m.validate(); });
    require(m.schedule.front() >= 16, cfg, "grids", "grid sizes must be at least 16");
    for (size_t i = 1; i < m.schedule.size(); ++i)
        require(m.schedule[i] == 2 * m.schedule[i - 1], cfg, "grids", "each grid must double the previous one");
    return m;
}

QuadratureConfig quadrature_config(const RunConfig& cfg) {
    QuadratureConfig q;
    q.pin_window = cfg.get_int("pin_window", q.pin_window);
    require(q.pin_window >= 0, cfg, "pin_window", "pin_window must be nonnegative");
    return q;
}

int basis_size(const RunConfig& cfg) {
    const int m = cfg.get_int("modes", 8);
    require(m >= 0 && m <= 64, cfg, "modes", "modes must lie in [0, 64]");
    return m;
}

ProfileParams profile_params(const RunConfig& cfg, double tau, double theta_max_default) {
    ProfileParams p = ProfileParams::defaults(cfg.get_double("s", 0.5));
    p.c = cfg.get_double("c", p.c);
    p.tau = tau;
    p.theta_max = theta_max_default;
    p.theta_min = cfg.get_double("theta_min", 1e-11 * theta_max_default);
    p.nodes = cfg.get_int("nodes", 4000);
    p.pre_decades = cfg.get_int("pre_decades", p.pre_decades);
    validate_as(cfg, "s", [&] { EnergyModel{p.s}; });
    validate_as(cfg, "theta_min", [&] { p.validate(); });
    return p;
}

Annulus annulus_config(const RunConfig& cfg) {
    Annulus a;
    a.r_inner = cfg.get_double("r_inner", a.r_inner);
    a.r_outer = cfg.get_double("r_outer", a.r_outer);
    a.radial_nodes = cfg.get_int("radial_nodes", a.radial_nodes);
    validate_as(cfg, "r_inner", [&] { a.validate(); });
    return a;
}

Measure measure_config(const RunConfig& cfg) {
    const std::string m = cfg.get_string("measure", "r_dr_dtheta");
    if (m == "r_dr_dtheta") return Measure::r_dr_dtheta;
    if (m == "dr_dtheta") return Measure::dr_dtheta;
    throw ConfigError("measure", cfg.line_of("measure"), "measure must be r_dr_dtheta or dr_dtheta");
}

Direction direction_config(const RunConfig& cfg) {
    const std::string d = cfg.get_string("direction", "e1");
    for (Direction x : {Direction::e1, Direction::e2, Direction::eR, Direction::eTheta})
        if (d == direction_name(x)) return x;
    throw ConfigError("direction", cfg.line_of("direction"), "direction must be e1, e2, eR or etheta");
}

std::string qualifier(const std::string& name, double v) {
    std::ostringstream os;
    os << name << "=" << v;
    return os.str();
}

// Log-log interpolation of a positive profile quantity at theta inside the solution grid.
double interp_profile(const SpiralSolution& sol, const std::vector<double>& vals, double theta) {
    const auto it = std::lower_bound(sol.theta.begin(), sol.theta.end(), theta);
    if (it == sol.theta.begin()) return vals.front();
    if (it == sol.theta.end()) return vals.back();
    const size_t i = static_cast<size_t>(it - sol.theta.begin());
    const double a = std::log(sol.theta[i - 1]), b = std::log(sol.theta[i]);
    const double u = (std::log(theta) - a) / (b - a);
    return std::exp((1.0 - u) * std::log(vals[i - 1]) + u * std::log(vals[i]));
}

// ---------------------------------------------------------------- seed

RunReport run_seed(const RunConfig& cfg, const RunOptions& opt) {
    const SeedParams sp = seed_params(cfg);
    const int n = cfg.get_int("n", 2048);
    require(n >= 16, cfg, "n", "grid size must be at least 16");
    const QuadratureConfig q = quadrature_config(cfg);

    RunReport rep;
    rep.command = "seed";
    Stopwatch sw;
    const Curve c = seed_curve(sp, AngularGrid(n));
    const EnergyModel model(sp.s);
    const EnergyBreakdown e = energy_I(differentiate_exact(c), model, q);
    const ZeroReport z = classify_zeros(c);
    rep.timings["seed"] = sw.lap();

    rep.results["k"] = sp.k();
    rep.results["l"] = sp.l();
    rep.results["phase_scale"] = sp.phase_scale();
    rep.results["energy"] = to_json(e);
    rep.results["zeros"] = to_json(z);
    rep.add("energy_finite", "energy_finite", e.finite() ? 0.0 : 1.0, 0.0);
    rep.add("one_zero", "one_zero", (z.zeros.size() == 1 && z.zeros[0] == 0) ? 0.0 : 1.0, 0.0);
    write_text(opt, "seed.csv", curve_csv(c));
    write_text(opt, "energy.json", dump(to_json(e)));
    return rep;
}

// ---------------------------------------------------------------- minimize

struct MinimizeRun {
    MinimizeResult result;
    double gradient_error = 0.0;
    int pin = 0;
};

// Relative error of the objective gradient against central differences at x.
double gradient_check(const DiscreteObjective& obj, const std::vector<double>& x, int pin) {
    std::vector<double> g;
    obj.evaluate(x, &g);
    std::vector<double> xp = x;
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (static_cast<int>(i / 2) == pin) continue;
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        auto at = [&](double step) {
            xp[i] = x[i] + step;
            const double v = obj.evaluate(xp, nullptr);
            xp[i] = x[i];
            return v;
        };
        const double fd = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
        num += (fd - g[i]) * (fd - g[i]);
        den += g[i] * g[i];
    }
    return std::sqrt(num / den);
}

MinimizeRun run_minimizer(const SeedParams& sp, const MinimizeConfig& mc, bool check_gradient) {
    const EnergyModel model(sp.s);
    const Curve seed = seed_curve(sp, AngularGrid(mc.schedule.front()));
    const int pin = seed.pinned_index().value_or(0);
    double err = 0.0;
    if (check_gradient) {
        const DiscreteObjective obj(seed.size(), model, pin);
        std::vector<double> x;
        for (const Vec2& v : seed.samples()) x.push_back(v.x()), x.push_back(v.y());
        err = gradient_check(obj, x, pin);
    }
    return {minimize(seed, model, mc), err, pin};
}

int trace_violations(const std::vector<TraceEntry>& trace) {
    int bad = 0;
    for (size_t i = 1; i < trace.size(); ++i)
        if (trace[i].grid == trace[i - 1].grid && !(trace[i].energy < trace[i - 1].energy)) ++bad;
    return bad;
}

RunReport run_minimize(const RunConfig& cfg, const RunOptions& opt) {
    const SeedParams sp = seed_params(cfg);
    const MinimizeConfig mc = minimize_config(cfg);
    const QuadratureConfig q = quadrature_config(cfg);
    const int modes = basis_size(cfg);
    const double factor = cfg.get_double("residual_factor", 1e-3);
    const double grad_tol = cfg.get_double("gradient_check_tol", 1e-6);

    RunReport rep;
    rep.command = "minimize";
    const EnergyModel model(sp.s);
    Stopwatch sw;
    const MinimizeRun run = run_minimizer(sp, mc, true);
    rep.timings["minimize"] = sw.lap();
    const MinimizeResult& res = run.result;

    std::ostringstream trace;
    trace << "iter,energy,grad_norm\n" << std::setprecision(17);
    for (size_t i = 0; i < res.trace.size(); ++i)
        trace << i << "," << res.trace[i].energy << "," << res.trace[i].grad_norm << "\n";
    write_text(opt, "trace.csv", trace.str());
    write_text(opt, "curve.csv", curve_csv(res.curve));

    const TestFunctionBasis basis = TestFunctionBasis::fourier(modes);
    const StationarityReport st = stationarity_residuals(differentiate(res.curve), model, basis, q);
    write_text(opt, "stationarity.json", dump(to_json(st)));
    const ZeroReport z = classify_zeros(res.curve);

    json levels = json::array();
    std::vector<double> devs;
    for (const Curve& c : res.levels) {
        const StationarityReport s = stationarity_residuals(differentiate(c), model, basis, q);
        levels.push_back({{"n", c.size()}, {"energy", s.energy}, {"dr_constant", s.dr_constant},
                          {"dr_deviation", s.dr_deviation}});
        if (c.size() >= 512) devs.push_back(s.dr_deviation);
    }
    int dev_bad = 0;
    for (size_t i = 1; i < devs.size(); ++i)
        if (!(devs[i] < devs[i - 1])) ++dev_bad;
    rep.timings["residuals"] = sw.lap();

    rep.results["message"] = res.message;
    rep.results["final_energy"] = res.trace.empty() ? 0.0 : res.trace.back().energy;
    rep.results["trace_entries"] = res.trace.size();
    rep.results["gradient_check"] = run.gradient_error;
    rep.results["stationarity"] = to_json(st);
    rep.results["zeros"] = to_json(z);
    rep.results["levels"] = levels;

    rep.add("gradient_fd", "gradient_fd", run.gradient_error, grad_tol);
    rep.add("trace_monotone", "trace_monotone", trace_violations(res.trace), 0.0);
    rep.add("one_zero", "one_zero", (z.zeros.size() == 1 && z.zeros[0] == run.pin) ? 0.0 : 1.0, 0.0);
    rep.add("eqm", "eqm", st.max_eqm(), st.tolerance(factor));
    rep.add("ii", "ii", st.max_ii(), st.tolerance(factor));
    if (devs.size() >= 2) rep.add("dr_deviation_decreasing", "dr_deviation_decreasing", dev_bad, 0.0);
    return rep;
}

// ---------------------------------------------------------------- spiral

json solution_csv_and_fits(const SpiralSolution& sol, RunReport& rep, const RunConfig& cfg, double flo,
                           double fhi) {
    const double s = sol.params.s, tau = sol.params.tau;
    const std::string tag = qualifier("tau", tau);
    json fits = json::object();
    const FitResult fj = fit_asymptotics(sol, FitQuantity::j, flo, fhi);
    fits["j"] = to_json(fj);
    const ResidualReport vr = verify_profile(sol);
    for (const auto& e : vr.entries) rep.add(e.name, e.name + "@" + tag, e.value, e.tolerance);

    // Halving the grid should shrink the profile residuals by about 4.
    ProfileParams fine = sol.params;
    fine.nodes = 2 * fine.nodes;
    const SpiralSolution sol2 = solve_profile(fine);
    const double lo = sol.params.theta_min * 1e3, hi = 0.9 * sol.params.theta_max;
    const ProfileResiduals r1 = profile_residuals(sol, lo, hi), r2 = profile_residuals(sol2, lo, hi);
    const double o1 = std::log2(r1.max_eq1 / r2.max_eq1), o2 = std::log2(r1.max_eq2 / r2.max_eq2);
    fits["order_eq1"] = o1;
    fits["order_eq2"] = o2;
    rep.add("convergence_order", "convergence_order@" + tag, std::max(std::abs(o1 - 2.0), std::abs(o2 - 2.0)),
            cfg.get_double("order_tol", 0.25));

    if (tau == 0.0) {
        const FitResult fr = fit_asymptotics(sol, FitQuantity::r, flo, fhi);
        const FitResult fg = fit_asymptotics(sol, FitQuantity::gamma, flo, fhi);
        fits["r"] = to_json(fr);
        fits["gamma"] = to_json(fg);
        const double ib = 1.0 / sol.beta();
        rep.add("j_exponent", "j_exponent@" + tag, std::abs(fj.exponent + 1.0), 0.01);
        rep.add("j_prefactor", "j_prefactor@" + tag, std::abs(fj.prefactor / ib - 1.0), 0.02);
        rep.add("r_exponent", "r_exponent@" + tag, std::abs(fr.exponent - sol.n_of_s()), 0.01);
        rep.add("gamma_slope", "gamma_slope@" + tag, std::abs(fg.exponent / ib - 1.0), 0.05);
        double f2 = 0.0;
        for (size_t i = 0; i < sol.size(); ++i)
            f2 = std::max(f2, std::abs(sol.F2[i] - sol.n_of_s() * sol.V[i] * sol.V[i]));
        rep.add("f2_identity", "f2_identity@" + tag, f2, 1e-10);
    } else {
        const double expected = -2.0 * s / (2.0 * s + 1.0);
        rep.add("j_exponent", "j_exponent@" + tag, std::abs(fj.exponent - expected), 0.02);
        fits["gamma_theta_min"] = sol.gamma.front();
    }
    return fits;
}

RunReport run_spiral(const RunConfig& cfg, const RunOptions& opt) {
    const std::vector<double> taus = cfg.get_doubles("tau", {0.0});
    for (double t : taus) require(t >= 0.0, cfg, "tau", "tau must be nonnegative");
    const double theta_max = cfg.get_double("theta_max", 0.1);
    std::vector<ProfileParams> params;
    for (double t : taus) params.push_back(profile_params(cfg, t, theta_max));

    RunReport rep;
    rep.command = "spiral";
    json all = json::array();
    Stopwatch sw;
    for (size_t k = 0; k < params.size(); ++k) {
        const ProfileParams& p = params[k];
        const double flo = cfg.get_double("fit_lo", p.theta_min);
        const double fhi = cfg.get_double("fit_hi", p.theta_min * (p.tau == 0.0 ? 1e4 : 1e2));
        require(flo >= p.theta_min && fhi <= p.theta_max && flo < fhi, cfg, "fit_lo",
                "fit window must lie inside [theta_min, theta_max]");
        const SpiralSolution sol = solve_profile(p);
        std::ostringstream csv;
        write_spiral_csv(csv, sol);
        write_text(opt, "spiral_" + std::to_string(k) + ".csv", csv.str());
        json entry = {{"tau", p.tau}, {"c", p.c}, {"s", p.s}, {"beta", p.beta()}, {"n", p.n_of_s()}};
        entry["fits"] = solution_csv_and_fits(sol, rep, cfg, flo, fhi);
        all.push_back(entry);
    }
    rep.timings["spiral"] = sw.lap();
    rep.results["profiles"] = all;
    write_text(opt, "fits.json", dump(all));
    return rep;
}

// ---------------------------------------------------------------- verify

Curve verify_curve(const RunConfig& cfg, int n) {
    const std::string src = cfg.get_string("curve", "identity");
    if (src == "identity")
        return Curve::sample_exact(AngularGrid(n), [](double t) { return CurveJet{e_R(t), e_theta(t)}; });
    if (src == "seed") {
        return seed_curve(seed_params(cfg), AngularGrid(n));
    }
    std::ifstream in(src);
    if (!in) throw ConfigError("curve", cfg.line_of("curve"), "cannot open curve file '" + src + "'");
    try {
        return read_curve_csv(in);
    } catch (const Error& e) {
        throw ConfigError("curve", cfg.line_of("curve"), e.what());
    }
}

RunReport run_verify(const RunConfig& cfg, const RunOptions& opt) {
    const double s = cfg.get_double("s", 1.0);
    validate_as(cfg, "s", [&] { EnergyModel{s}; });
    const int n = cfg.get_int("n", 256);
    require(n >= 16, cfg, "n", "grid size must be at least 16");
    const QuadratureConfig q = quadrature_config(cfg);
    const Annulus ann = annulus_config(cfg);
    const Measure measure = measure_config(cfg);
    const int modes = basis_size(cfg);
    const double tol = cfg.get_double("verify_tol", 1e-10);
    const bool identity = cfg.get_string("curve", "identity") == "identity";
    const Curve curve = verify_curve(cfg, n);

    RunReport rep;
    rep.command = "verify";
    Stopwatch sw;
    const EnergyModel model(s);
    const DerivedCurve dc = curve.has_exact() ? differentiate_exact(curve) : differentiate(curve);
    const EnergyBreakdown e = energy_I(dc, model, q);
    rep.results["energy"] = to_json(e);

    if (identity) {
        rep.add("identity_energy", "identity_energy", std::abs(e.total - 4.0 * kPi), 1e-12);
        double dwdev = 0.0, mdev = 0.0;
        for (int i = 0; i < dc.size(); ++i) {
            const double t = curve.grid().node(i);
            dwdev = std::max(dwdev, (dw(dc.g(i), dc.dg[i], t, model) - (1.0 - s) * Mat2::Identity()).norm());
            mdev = std::max(mdev,
                            (energy_momentum(dc.g(i), dc.dg[i], t, model) + (1.0 + s) * Mat2::Identity()).norm());
        }
        rep.add("identity_dw", "identity_dw", dwdev, tol);
        rep.add("identity_momentum", "identity_momentum", mdev, tol);
    }

    const TestFunctionBasis basis = TestFunctionBasis::fourier(modes);
    std::vector<VectorTestFunction> xi;
    for (const auto& m : basis.modes)
        for (const Vec2& dir : {Vec2(1.0, 0.0), Vec2(0.0, 1.0)})
            xi.push_back({-kPi, kPi, [m, dir](double t) { return Vec2(m.phi(t) * dir); },
                          [m, dir](double t) { return Vec2(m.dphi(t) * dir); }});
    const StationarityReport st = stationarity_residuals(dc, model, basis, q);
    rep.results["stationarity"] = to_json(st);
    rep.add("eqm", "eqm", st.max_eqm(), tol);
    rep.add("ii", "ii", st.max_ii(), tol);
    try {
        const std::vector<double> el = el1d_residual(dc, model, xi);
        rep.results["el1d"] = el;
        rep.add("el1d", "el1d", max_abs(el), tol);
    } catch (const SupportViolation& ex) {
        rep.results["el1d"] = std::string("not applicable: ") + ex.what();
    }
    const ZReport z = z_diagnostics(dc, model);
    rep.results["z"] = {{"nodes_used", z.nodes_used},
                        {"residual1", z.residual1},
                        {"residual2", z.residual2},
                        {"residual2_unit_h_coefficient", z.residual2_unit_h}};
    rep.add("z_identity", "z_identity", std::max(z.residual1, z.residual2), tol);
    rep.timings["one_dimensional"] = sw.lap();

    const RadialProfile rho = RadialProfile::spanning(ann);
    json table = json::array();
    std::vector<double> eq_vals, el_vals;
    for (const auto& m : basis.modes) {
        AngularProfile ap{m.name, m.phi, m.dphi};
        for (Direction d : {Direction::e1, Direction::e2, Direction::eR, Direction::eTheta}) {
            const TestField f = TestField::single(rho, ap, d);
            const double eq = equilibrium_residual(dc, model, ann, f, q);
            const double el = euler_lagrange_residual(dc, model, ann, f, measure, q);
            eq_vals.push_back(eq);
            el_vals.push_back(el);
            table.push_back({{"mode", m.name}, {"direction", direction_name(d)}, {"radial", 0},
                             {"equilibrium", eq}, {"euler_lagrange", el}});
        }
    }
    rep.timings["two_dimensional"] = sw.lap();
    rep.results["residuals_2d"] = table;
    rep.add("equilibrium2d", "equilibrium2d", max_abs(eq_vals), tol);
    rep.add("el2d", "el2d", max_abs(el_vals), tol);
    write_text(opt, "residuals_2d.json", dump(table));
    write_text(opt, "stationarity.json", dump(to_json(st)));
    return rep;
}

// ---------------------------------------------------------------- cross

struct CrossDiscrepancy {
    double j = 0.0;
    double r = 0.0;
    int nodes = 0;
};

CrossDiscrepancy compare_profiles(const DerivedCurve& dc, const SpiralSolution& sol, double lo, double hi) {
    CrossDiscrepancy out;
    const double two_pi = 2.0 * kPi;
    for (const auto& [a, b] : {std::pair{lo, hi}, std::pair{two_pi - hi, two_pi - lo}}) {
        const PolarProfile pp = polar_decompose(dc, a, b);
        for (size_t i = 0; i < pp.theta.size(); ++i) {
            const double t = pp.theta[i] > kPi ? two_pi - pp.theta[i] : pp.theta[i];
            out.j = std::max(out.j, std::abs(pp.j[i] / interp_profile(sol, sol.j, t) - 1.0));
            out.r = std::max(out.r, std::abs(pp.r[i] / interp_profile(sol, sol.r, t) - 1.0));
            ++out.nodes;
        }
    }
    return out;
}

RunReport run_cross(const RunConfig& cfg, const RunOptions& opt) {
    const double s = cfg.get_double("s", 0.5);
    const QuadratureConfig q = quadrature_config(cfg);
    const int modes = basis_size(cfg);
    const double lo_cells = cfg.get_double("cross_lo_cells", 8.0);
    const double hi = cfg.get_double("cross_hi", 0.2);
    const double ode_max = cfg.get_double("cross_theta_max", 0.3);
    const double ctol = cfg.get_double("cross_tol", 0.05);
    require(lo_cells >= 1.0, cfg, "cross_lo_cells", "cross_lo_cells must be at least 1");
    require(hi > 0.0 && hi < ode_max && ode_max < kPi / 2, cfg, "cross_hi",
            "need 0 < cross_hi < cross_theta_max < pi/2");
    const ProfileParams base = profile_params(cfg, 0.0, ode_max);

    std::vector<Curve> curves;
    RunReport rep;
    rep.command = "cross";
    Stopwatch sw;
    if (cfg.has("curve_file")) {
        const std::string path = cfg.get_string("curve_file", "");
        std::ifstream in(path);
        if (!in) throw ConfigError("curve_file", cfg.line_of("curve_file"), "cannot open '" + path + "'");
        curves.push_back(read_curve_csv(in));
    } else {
        const SeedParams sp = seed_params(cfg);
        const MinimizeConfig mc = minimize_config(cfg);
        const MinimizeRun run = run_minimizer(sp, mc, false);
        rep.results["minimizer"] = run.result.message;
        for (const Curve& c : run.result.levels)
            if (c.size() >= 512 || &c == &run.result.levels.back()) curves.push_back(c);
        write_text(opt, "curve.csv", curve_csv(run.result.curve));
    }
    rep.timings["minimize"] = sw.lap();

    const EnergyModel model(s);
    json trend = json::array();
    CrossDiscrepancy last;
    for (const Curve& c : curves) {
        const DerivedCurve dc = differentiate(c);
        const double lo = lo_cells * c.grid().spacing();
        if (!(lo < hi)) continue;
        const StationarityReport st = stationarity_residuals(dc, model, TestFunctionBasis::fourier(modes), q);
        ProfileParams p = base;
        p.c = st.dr_constant;
        const SpiralSolution sol = solve_tau_zero(p);
        last = compare_profiles(dc, sol, lo, hi);
        trend.push_back({{"n", c.size()}, {"c", st.dr_constant}, {"theta_lo", lo}, {"theta_hi", hi},
                         {"j_discrepancy", last.j}, {"r_discrepancy", last.r}, {"nodes", last.nodes}});
    }
    if (trend.empty()) throw ConfigError("cross_lo_cells", cfg.line_of("cross_lo_cells"), "overlap window is empty");
    rep.timings["compare"] = sw.lap();
    rep.results["trend"] = trend;
    rep.add("cross_j", "cross_j", last.j, ctol);
    rep.add("cross_r", "cross_r", last.r, ctol);
    write_text(opt, "cross.json", dump(trend));
    return rep;
}

// ---------------------------------------------------------------- el-fail

RunReport run_el_fail(const RunConfig& cfg, const RunOptions& opt) {
    const double emax = cfg.get_double("embed_theta_max", 0.25);
    const ProfileParams p = profile_params(cfg, 0.0, emax);
    const int n = cfg.get_int("embed_n", 4096);
    const int refine = cfg.get_int("embed_refine", 4);
    const double wmax = cfg.get_double("width_max", 0.125);
    const int widths = cfg.get_int("widths", 5);
    const Direction dir = direction_config(cfg);
    const Measure measure = measure_config(cfg);
    const Annulus ann = annulus_config(cfg);
    const double eq_bound = cfg.get_double("eq_bound", 0.1);
    const double slope_tol = cfg.get_double("slope_tol", 0.02);
    require(n >= 16, cfg, "embed_n", "embed_n must be at least 16");
    require(refine >= 2, cfg, "embed_refine", "embed_refine must be at least 2");
    require(widths >= 2, cfg, "widths", "need at least two widths");
    require(wmax > 0.0 && wmax <= emax, cfg, "width_max", "width_max must lie in (0, embed_theta_max]");
    require(p.theta_min < 0.5 * 2.0 * kPi / (static_cast<double>(n) * refine), cfg, "theta_min",
            "theta_min must be below half the finest grid spacing");

    RunReport rep;
    rep.command = "el-fail";
    Stopwatch sw;
    const SpiralSolution sol = solve_tau_zero(p);
    const FitResult slope = fit_asymptotics(sol, FitQuantity::dw_er, p.theta_min, p.theta_min * 1e4);
    const double expected = sol.n_of_s() - 2.0;
    rep.results["dw_er_fit"] = to_json(slope);
    rep.results["dw_er_expected"] = expected;
    rep.add("dw_slope", "dw_slope", std::abs(slope.exponent - expected), slope_tol);

    const EnergyModel model(p.s);
    const RadialProfile rho = RadialProfile::spanning(ann);
    const DerivedCurve coarse = differentiate_exact(to_curve(sol, AngularGrid(n)));
    const DerivedCurve fine = differentiate_exact(to_curve(sol, AngularGrid(n * refine)));
    json table = json::array();
    std::vector<double> el, eqc, eqf;
    for (int k = 0; k < widths; ++k) {
        const double w = std::ldexp(wmax, -k);
        const TestField f = TestField::single(rho, angular_bump(0.0, w), dir);
        el.push_back(euler_lagrange_residual(fine, model, ann, f, measure));
        eqc.push_back(equilibrium_residual(coarse, model, ann, f));
        eqf.push_back(equilibrium_residual(fine, model, ann, f));
        table.push_back({{"width", w}, {"euler_lagrange", el.back()}, {"equilibrium_n", eqc.back()},
                         {"equilibrium_refined", eqf.back()}});
    }
    rep.timings["residuals"] = sw.lap();
    int nonincreasing = 0;
    double ratio = 0.0;
    for (size_t k = 0; k < el.size(); ++k) {
        if (k > 0 && !(el[k] > el[k - 1])) ++nonincreasing;
        ratio = std::max(ratio, std::abs(eqf[k]) / std::abs(eqc[k]));
    }
    rep.results["widths"] = table;
    rep.results["grid"] = {{"n", n}, {"refined", n * refine}};
    rep.add("el_growth", "el_growth", nonincreasing, 0.0);
    rep.add("eq_bounded", "eq_bounded", max_abs(eqf), eq_bound);
    rep.add("eq_refines", "eq_refines", ratio, 1.0);
    write_text(opt, "el_fail.json", dump(table));
    return rep;
}

// ---------------------------------------------------------------- plot

std::vector<std::vector<double>> read_columns(std::istream& in, std::string& header) {
    std::getline(in, header);
    std::vector<std::vector<double>> cols;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        size_t k = 0;
        while (std::getline(ls, cell, ',')) {
            if (cols.size() <= k) cols.emplace_back();
            cols[k++].push_back(std::strtod(cell.c_str(), nullptr));
        }
    }
    return cols;
}

RunReport run_plot(const RunConfig& cfg, const RunOptions& opt) {
    const std::string preset = cfg.get_string("preset", "");
    const std::string input = cfg.get_string("input", "");
    require(!preset.empty() || !input.empty(), cfg, "input", "plot needs an input file or a preset");
    require(preset.empty() || preset == "figure1", cfg, "preset", "the only preset is figure1");

    RunReport rep;
    rep.command = "plot";
    PlotArtifact art;
    PlotKind kind = PlotKind::curve;
    if (!preset.empty()) {
        // Figure preset exponents k = 3/8, l = 1/2 at s = 1/2: not reachable from any eps.
        SeedParams sp;
        sp.s = 0.5;
        sp.k_exponent = 0.375;
        sp.l_exponent = 0.5;
        art.title = "seed curve, preset s=1/2, l=1/2, k=3/8";
        art.notes.push_back("preset exponents are inconsistent with k = (1+eps)/2 > 1/2; plot only");
        PlotSeries ser{"g(theta)", {}, {}, false};
        const AngularGrid grid(2048);
        for (int i = 0; i <= grid.size(); ++i) {
            const Vec2 g = seed_jet(sp, grid.node(i)).g;
            ser.x.push_back(g.x());
            ser.y.push_back(g.y());
        }
        art.series.push_back(ser);
        rep.results["inconsistent_preset"] = true;
    } else {
        std::ifstream in(input);
        if (!in) throw ConfigError("input", cfg.line_of("input"), "cannot open '" + input + "'");
        std::string header;
        const auto cols = read_columns(in, header);
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header == "theta,gx,gy") {
            kind = PlotKind::curve;
            art.title = "planar image of g";
            PlotSeries ser{"g(theta)", cols.size() > 2 ? cols[1] : std::vector<double>{},
                           cols.size() > 2 ? cols[2] : std::vector<double>{}, false};
            if (!ser.x.empty()) ser.x.push_back(ser.x.front()), ser.y.push_back(ser.y.front());
            art.series.push_back(ser);
        } else if (header == "theta,j,w,r,d,gamma,V") {
            kind = cfg.has("kind") ? parse_plot_kind(cfg.get_string("kind", "")) : PlotKind::spiral;
            if (kind == PlotKind::loglog) {
                art.title = "j(theta), log-log";
                art.series.push_back({"j", cols[0], cols[1], false});
                if (cols[0].size() >= 20) {
                    SpiralSolution sol;
                    sol.theta = cols[0];
                    sol.j = cols[1];
                    const double lo = sol.theta.front(), hi = std::min(sol.theta.back(), lo * 1e4);
                    const FitResult f = fit_asymptotics(sol, FitQuantity::j, lo, hi);
                    PlotSeries fit{"fit slope " + std::to_string(f.exponent), {}, {}, true};
                    for (double t : sol.theta) fit.x.push_back(t), fit.y.push_back(f.prefactor * std::pow(t, f.exponent));
                    art.series.push_back(fit);
                    rep.results["fit"] = to_json(f);
                }
            } else {
                kind = PlotKind::spiral;
                art.title = "spiral r(theta) e_R(gamma(theta))";
                art.notes.push_back("radius drawn as log10(r / r_min) so that the winding stays visible");
                PlotSeries ser{"spiral", {}, {}, false};
                const double rmin = *std::min_element(cols[3].begin(), cols[3].end());
                for (size_t i = 0; i < cols[0].size(); ++i) {
                    const double rho = std::log10(cols[3][i] / rmin);
                    ser.x.push_back(rho * std::cos(cols[5][i]));
                    ser.y.push_back(rho * std::sin(cols[5][i]));
                }
                art.series.push_back(ser);
            }
        } else {
            throw ConfigError("input", cfg.line_of("input"), "unrecognised CSV header '" + header + "'");
        }
    }
    if (cfg.has("kind") && preset.empty()) {
        const PlotKind k = parse_plot_kind(cfg.get_string("kind", ""));
        if (k != kind) throw ConfigError("kind", cfg.line_of("kind"), "kind does not match the input file");
    }
    write_text(opt, "plot.svg", emit_plot(art, kind));
    return rep;
}

}  // namespace

bool Check::pass() const { return std::isfinite(value) && value <= tolerance; }

void RunReport::add(const std::string& name, const std::string& label, double value, double tolerance) {
    checks.push_back({name, label, value, tolerance, true});
}

bool RunReport::pass() const {
    for (const auto& c : checks)
        if (c.gated && !c.pass()) return false;
    return true;
}

json RunReport::to_json() const {
    json j;
    j["command"] = command;
    j["config"] = config;
    json cs = json::array();
    for (const auto& c : checks)
        cs.push_back({{"name", c.label}, {"value", c.value}, {"tolerance", c.tolerance}, {"gated", c.gated},
                      {"pass", c.pass()}});
    j["checks"] = cs;
    j["results"] = results;
    j["pass"] = pass();
    return j;
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"seed", "minimize", "spiral", "verify", "cross", "el-fail", "plot"};
    return c;
}

const std::vector<std::string>& check_names(const std::string& command) {
    static const std::map<std::string, std::vector<std::string>> names = {
        {"seed", {"energy_finite", "one_zero"}},
        {"minimize", {"gradient_fd", "trace_monotone", "one_zero", "eqm", "ii", "dr_deviation_decreasing"}},
        {"spiral",
         {"profile_eq1", "profile_eq2", "conservation", "d_equals_r2j", "convergence_order", "j_exponent",
          "j_prefactor", "r_exponent", "gamma_slope", "f2_identity"}},
        {"verify",
         {"identity_energy", "identity_dw", "identity_momentum", "eqm", "ii", "el1d", "z_identity",
          "equilibrium2d", "el2d"}},
        {"cross", {"cross_j", "cross_r"}},
        {"el-fail", {"dw_slope", "el_growth", "eq_bounded", "eq_refines"}},
        {"plot", {}}};
    const auto it = names.find(command);
    if (it == names.end()) throw ConfigError("", 0, "unknown command '" + command + "'");
    return it->second;
}

RunReport run_pipeline(const std::string& command, const RunConfig& config, const RunOptions& options) {
    const auto& known = check_names(command);
    for (const auto* list : {&options.only_checks, &options.skip_checks})
        for (const auto& name : *list)
            if (std::find(known.begin(), known.end(), name) == known.end())
                throw ConfigError("", 0, "command '" + command + "' has no check named '" + name + "'");

    RunReport rep;
    if (command == "seed") rep = run_seed(config, options);
    else if (command == "minimize") rep = run_minimize(config, options);
    else if (command == "spiral") rep = run_spiral(config, options);
    else if (command == "verify") rep = run_verify(config, options);
    else if (command == "cross") rep = run_cross(config, options);
    else if (command == "el-fail") rep = run_el_fail(config, options);
    else rep = run_plot(config, options);

    for (const auto& [k, v] : config.values()) rep.config[k] = v;
    for (auto& c : rep.checks) {
        const auto in = [&](const std::vector<std::string>& v) {
            return std::find(v.begin(), v.end(), c.name) != v.end();
        };
        c.gated = (options.only_checks.empty() || in(options.only_checks)) && !in(options.skip_checks);
    }
    write_text(options, "report.json", dump(rep.to_json()));
    json t = json::object();
    for (const auto& [k, v] : rep.timings) t[k] = v;
    write_text(options, "timings.json", dump(t));
    return rep;
}

}  // namespace onehom::cli
