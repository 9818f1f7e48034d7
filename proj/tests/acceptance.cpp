// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include "onehom/annulus.hpp"
#include "onehom/cli.hpp"
#include "onehom/energy.hpp"
#include "onehom/spiral.hpp"
#include "onehom/variational.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace onehom;

namespace {

constexpr double kPi = std::numbers::pi;

// Collects individual assertions for one criterion and remembers the first failure.
struct Ledger {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what, double value, double tol) {
        if (cond) return;
        if (ok) detail << what << " = " << value << " (tol " << tol << ")";
        ok = false;
    }
    void at_most(const std::string& what, double value, double tol) {
        expect(std::isfinite(value) && value <= tol, what, value, tol);
    }
    void note(const std::string& text) {
        if (ok) detail << (detail.tellp() > 0 ? "; " : "") << text;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

DerivedCurve identity(int n) {
    return differentiate_exact(
        Curve::sample_exact(AngularGrid(n), [](double t) { return CurveJet{e_R(t), e_theta(t)}; }));
}

std::vector<VectorTestFunction> cartesian_fields(const TestFunctionBasis& basis) {
    std::vector<VectorTestFunction> xi;
    for (const auto& mode : basis.modes)
        for (const Vec2& e : {Vec2(1.0, 0.0), Vec2(0.0, 1.0)})
            xi.push_back({-kPi, kPi, [mode, e](double t) { return Vec2(mode.phi(t) * e); },
                          [mode, e](double t) { return Vec2(mode.dphi(t) * e); }});
    return xi;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::isfinite(x) ? std::abs(x) : INFINITY);
    return m;
}

void identity_suite(Ledger& L) {
    const EnergyModel m(1.0);
    const DerivedCurve dc = identity(256);
    L.at_most("|I - 4pi|", std::abs(energy_I(dc, m).total - 4 * kPi), 1e-12);
    double dw_err = 0.0, m_err = 0.0;
    for (int i = 0; i < dc.size(); ++i) {
        const double t = dc.curve.grid().node(i);
        dw_err = std::max(dw_err, dw(dc.g(i), dc.dg[i], t, m).norm());
        m_err = std::max(m_err, (energy_momentum(dc.g(i), dc.dg[i], t, m) + 2.0 * Mat2::Identity()).norm());
    }
    L.at_most("|DW|", dw_err, 1e-12);
    L.at_most("|M + 2 Id|", m_err, 1e-12);

    const TestFunctionBasis basis = TestFunctionBasis::fourier(8);
    const StationarityReport st = stationarity_residuals(dc, m, basis, {}, cartesian_fields(basis));
    L.at_most("eqm", st.max_eqm(), 1e-10);
    L.at_most("ii", st.max_ii(), 1e-10);
    L.at_most("el1d", max_abs(st.el1d_residuals), 1e-10);

    const Annulus ann;
    const RadialProfile rho = RadialProfile::spanning(ann);
    double eq = 0.0, el = 0.0;
    for (const auto& mode : basis.modes)
        for (Direction d : {Direction::e1, Direction::e2, Direction::eR, Direction::eTheta}) {
            const TestField f = TestField::single(rho, {mode.name, mode.phi, mode.dphi}, d);
            eq = std::max(eq, std::abs(equilibrium_residual(dc, m, ann, f)));
            el = std::max(el, std::abs(euler_lagrange_residual(dc, m, ann, f)));
        }
    L.at_most("equilibrium2d", eq, 1e-10);
    L.at_most("el2d", el, 1e-10);
    L.note("max 2D residual " + fmt(std::max(eq, el)));
}

void z_identity(Ledger& L) {
    // z is constant here, so the five-point second difference only sees rounding (amplified by 1/h^2).
    const ZReport z = z_diagnostics(identity(64), EnergyModel(1.0));
    L.at_most("corrected residual", z.residual2, 1e-12);
    L.at_most("|unit-coefficient residual - 1|", std::abs(z.residual2_unit_h - 1.0), 1e-12);
    L.note("corrected " + fmt(z.residual2) + ", unit coefficient " + fmt(z.residual2_unit_h));
}

void tau_zero_asymptotics(Ledger& L) {
    for (double s : {0.5, 1.0, 2.0}) {
        const std::string tag = "s=" + fmt(s) + " ";
        const ProfileParams p = ProfileParams::defaults(s);
        const SpiralSolution sol = solve_tau_zero(p);
        const double lo = sol.theta.front(), hi = lo * 1e4;
        const FitResult fj = fit_asymptotics(sol, FitQuantity::j, lo, hi);
        const FitResult fr = fit_asymptotics(sol, FitQuantity::r, lo, hi);
        const FitResult fg = fit_asymptotics(sol, FitQuantity::gamma, lo, hi);
        L.at_most(tag + "j exponent error", std::abs(fj.exponent + 1.0), 0.01);
        L.at_most(tag + "j prefactor rel error", std::abs(fj.prefactor * sol.beta() - 1.0), 0.02);
        L.at_most(tag + "r exponent error", std::abs(fr.exponent - sol.n_of_s()), 0.01);
        L.at_most(tag + "gamma slope rel error", std::abs(fg.exponent * sol.beta() - 1.0), 0.05);
        L.at_most(tag + "conservation", conservation_residual(sol.r, sol.d, s, 0.0), 1e-12);

        ProfileParams q = p;
        q.nodes = 2 * p.nodes;
        const SpiralSolution fine = solve_tau_zero(q);
        const double a = p.theta_min * 1e3, b = 0.9 * p.theta_max;
        const ProfileResiduals rc = profile_residuals(sol, a, b), rf = profile_residuals(fine, a, b);
        const double o1 = std::log2(rc.max_eq1 / rf.max_eq1), o2 = std::log2(rc.max_eq2 / rf.max_eq2);
        L.at_most(tag + "eq1 order deviation", std::abs(o1 - 2.0), 0.25);
        L.at_most(tag + "eq2 order deviation", std::abs(o2 - 2.0), 0.25);
        L.note(tag + "j " + fmt(fj.exponent) + " r " + fmt(fr.exponent) + " orders " + fmt(o1) + "/" + fmt(o2));
    }
}

void tau_positive(Ledger& L) {
    for (double tau : {1e-2, 1e-1}) {
        ProfileParams p = ProfileParams::defaults(1.0);
        p.tau = tau;
        const SpiralSolution sol = solve_tau_positive(p);
        const FitResult fj = fit_asymptotics(sol, FitQuantity::j, sol.theta.front(), sol.theta.front() * 100);
        L.at_most("tau=" + fmt(tau) + " j exponent error", std::abs(fj.exponent + 2.0 / 3.0), 0.02);
        std::vector<double> g;
        for (double tm : {1e-7, 1e-8, 1e-9, 1e-10, 1e-11}) {
            ProfileParams q = p;
            q.theta_min = tm;
            g.push_back(solve_tau_positive(q).gamma.front());
        }
        double worst = 0.0;
        for (size_t k = 2; k < g.size(); ++k) worst = std::max(worst, std::abs(g[k] - g[k - 1]) / std::abs(g[k - 1] - g[k - 2]));
        L.at_most("tau=" + fmt(tau) + " winding increment ratio", worst, 0.6);
        L.note("tau=" + fmt(tau) + " j " + fmt(fj.exponent) + " winding " + fmt(g.back()));
    }
    ProfileParams p = ProfileParams::defaults(1.0);
    const SpiralSolution zero = solve_tau_zero(p);
    p.tau = 1e-6;
    const SpiralSolution small = solve_tau_positive(p);
    double dev = small.size() == zero.size() ? 0.0 : INFINITY;
    for (size_t i = 0; i < zero.size() && std::isfinite(dev); ++i)
        if (zero.theta[i] >= 1e-2) dev = std::max(dev, std::abs(small.j[i] / zero.j[i] - 1.0));
    L.at_most("tau=1e-6 vs tau=0 j deviation", dev, 0.01);
    L.note("tau=1e-6 deviation " + fmt(dev));
}

void reduction_identity(Ledger& L) {
    for (double s : {0.5, 1.0, 2.0}) {
        const SpiralSolution sol = solve_tau_zero(ProfileParams::defaults(s));
        double err = 0.0;
        for (size_t i = 0; i < sol.size(); ++i) {
            const double e = std::abs(sol.F2[i] - sol.n_of_s() * sol.V[i] * sol.V[i]);
            err = std::max(err, std::isfinite(e) ? e : INFINITY);
        }
        L.at_most("s=" + fmt(s) + " |F^2 - n V^2|", err, 1e-10);
        L.note("s=" + fmt(s) + " " + fmt(err));
    }
}

void el_failure(Ledger& L) {
    const double s = 0.5;
    ProfileParams p = ProfileParams::defaults(s);
    p.theta_max = 0.25;
    const SpiralSolution sol = solve_tau_zero(p);
    const FitResult slope = fit_asymptotics(sol, FitQuantity::dw_er, p.theta_min, p.theta_min * 1e4);
    const double expected = -1.0 - s / (2.0 * (s + 1.0));
    L.at_most("|DW e_R| slope error", std::abs(slope.exponent - expected), 0.02);

    const EnergyModel m(s);
    const Annulus ann;
    const RadialProfile rho = RadialProfile::spanning(ann);
    const DerivedCurve coarse = differentiate_exact(to_curve(sol, AngularGrid(4096)));
    const DerivedCurve fine = differentiate_exact(to_curve(sol, AngularGrid(16384)));
    std::vector<double> el;
    double eq_max = 0.0, eq_ratio = 0.0;
    for (int k = 3; k <= 7; ++k) {
        const TestField f = TestField::single(rho, angular_bump(0.0, std::ldexp(1.0, -k)), Direction::e1);
        el.push_back(euler_lagrange_residual(fine, m, ann, f));
        const double ec = equilibrium_residual(coarse, m, ann, f), ef = equilibrium_residual(fine, m, ann, f);
        eq_max = std::max(eq_max, std::abs(ef));
        eq_ratio = std::max(eq_ratio, std::abs(ef) / std::abs(ec));
    }
    int non_increasing = 0;
    for (size_t k = 1; k < el.size(); ++k)
        if (!(el[k] > el[k - 1])) ++non_increasing;
    L.expect(non_increasing == 0, "EL non-increases", non_increasing, 0);
    L.at_most("max |equilibrium|", eq_max, 0.1);
    L.at_most("equilibrium refinement ratio", eq_ratio, 1.0);
    L.note("slope " + fmt(slope.exponent) + " vs " + fmt(expected) + ", EL " + fmt(el.front()) + " -> " +
           fmt(el.back()) + ", eq max " + fmt(eq_max));
}

double gradient_error(const Curve& c, const EnergyModel& m, int pin) {
    const DiscreteObjective obj(c.size(), m, pin);
    std::vector<double> x, g;
    for (const Vec2& v : c.samples()) x.push_back(v.x()), x.push_back(v.y());
    obj.evaluate(x, &g);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (static_cast<int>(i / 2) == pin) continue;
        const double xi = x[i], h = 1e-6 * std::max(1.0, std::abs(xi));
        auto at = [&](double step) {
            x[i] = xi + step;
            const double v = obj.evaluate(x, nullptr);
            x[i] = xi;
            return v;
        };
        const double fd = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
        num += std::pow(fd - g[i], 2);
        den += g[i] * g[i];
    }
    return std::sqrt(num / den);
}

void minimization(Ledger& L) {
    const SeedParams sp;
    const EnergyModel m(sp.s);
    MinimizeConfig cfg;
    cfg.schedule = {128, 256, 512, 1024, 2048};
    const Curve seed = seed_curve(sp, AngularGrid(128));
    const int pin = seed.pinned_index().value_or(0);
    L.at_most("gradient FD error (n=128)", gradient_error(seed, m, pin), 1e-6);
    const Curve seed_fine = seed_curve(sp, AngularGrid(2048));
    L.at_most("gradient FD error (n=2048)", gradient_error(seed_fine, m, seed_fine.pinned_index().value_or(0)), 1e-6);

    const MinimizeResult res = minimize(seed, m, cfg);
    int violations = 0;
    for (size_t i = 1; i < res.trace.size(); ++i)
        if (res.trace[i].grid == res.trace[i - 1].grid && !(res.trace[i].energy < res.trace[i - 1].energy)) ++violations;
    L.expect(violations == 0, "trace increases", violations, 0);
    L.expect(res.curve.size() == 2048, "final grid", res.curve.size(), 2048);

    const ZeroReport z = classify_zeros(res.curve);
    L.expect(z.zeros == std::vector<int>{pin}, "zero count", static_cast<double>(z.zeros.size()), 1);
    L.expect(z.min_d > 0.0, "min d off the pin", z.min_d, 0.0);

    const TestFunctionBasis basis = TestFunctionBasis::fourier(8);
    const StationarityReport st = stationarity_residuals(differentiate(res.curve), m, basis);
    L.at_most("eqm", st.max_eqm(), st.tolerance());
    L.at_most("ii", st.max_ii(), st.tolerance());

    std::vector<double> devs;
    for (const Curve& c : res.levels)
        if (c.size() >= 512) devs.push_back(stationarity_residuals(differentiate(c), m, basis).dr_deviation);
    int dev_up = 0;
    for (size_t i = 1; i < devs.size(); ++i)
        if (!(devs[i] < devs[i - 1])) ++dev_up;
    L.expect(devs.size() >= 2 && dev_up == 0, "DuBois-Reymond deviation increases", dev_up, 0);
    L.note("I " + fmt(st.energy) + ", eqm " + fmt(st.max_eqm()) + ", ii " + fmt(st.max_ii()) + " (tol " +
           fmt(st.tolerance()) + "), DR deviation " + fmt(devs.front()) + " -> " + fmt(devs.back()));
}

void cross_validation(Ledger& L) {
    std::istringstream text("s = 0.5\n");
    const cli::RunConfig cfg = cli::RunConfig::parse(text, "acceptance");
    cli::RunOptions opt;
    opt.write_files = false;
    const cli::RunReport rep = cli::run_pipeline("cross", cfg, opt);
    for (const cli::Check& c : rep.checks) L.at_most(c.label, c.value, 0.05);
    std::string trend;
    for (const auto& row : rep.results["trend"])
        trend += (trend.empty() ? "" : ", ") + std::to_string(row["n"].get<int>()) + ": j " +
                 fmt(row["j_discrepancy"].get<double>()) + " r " + fmt(row["r_discrepancy"].get<double>());
    L.note("trend " + trend);
}

void orders(Ledger& L) {
    auto jet = [](double t) {
        const double r = 1.0 + 0.3 * std::cos(t), dr = -0.3 * std::sin(t);
        const double a = t + 0.2 * std::sin(t), da = 1.0 + 0.2 * std::cos(t);
        return CurveJet{r * e_R(a), dr * e_R(a) + r * da * e_theta(a)};
    };
    auto g = [&](double t) { return jet(t).g; };
    std::vector<double> derr, qerr;
    const EnergyModel m(0.5);
    const double ref = energy_I(differentiate_exact(Curve::sample_exact(AngularGrid(8192), jet)), m).total;
    for (int n : {64, 128, 256}) {
        const DerivedCurve dc = differentiate(Curve::sample(AngularGrid(n), g));
        double e = 0.0;
        for (int i = 0; i < n; ++i) e = std::max(e, (dc.dg[i] - jet(dc.curve.grid().node(i)).dg).norm());
        derr.push_back(e);
    }
    for (int n : {32, 64, 128}) qerr.push_back(std::abs(energy_I(differentiate(Curve::sample(AngularGrid(n), g)), m).total - ref));
    const double d1 = std::log2(derr[0] / derr[1]), d2 = std::log2(derr[1] / derr[2]);
    const double q1 = std::log2(qerr[0] / qerr[1]), q2 = std::log2(qerr[1] / qerr[2]);
    L.expect(std::min(d1, d2) >= 3.8, "derivative order", std::min(d1, d2), 3.8);
    L.expect(std::min(q1, q2) >= 1.9, "quadrature order", std::min(q1, q2), 1.9);

    std::vector<double> sing;
    for (int n : {512, 1024, 2048, 4096})
        sing.push_back(energy_I(differentiate_exact(seed_curve(SeedParams{}, AngularGrid(n))), EnergyModel(0.5)).singular);
    double spread = 0.0;
    for (double v : sing) spread = std::max(spread, std::abs(v / sing.back() - 1.0));
    L.at_most("seed singular part relative spread", spread, 5e-4);
    L.note("derivative orders " + fmt(d1) + "/" + fmt(d2) + ", quadrature orders " + fmt(q1) + "/" + fmt(q2) +
           ", singular part " + fmt(sing.back()) + " spread " + fmt(spread));
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Ledger&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "identity-map suite", identity_suite},
        {2, "z-identity coefficient", z_identity},
        {3, "tau = 0 spiral asymptotics", tau_zero_asymptotics},
        {4, "tau > 0 branch", tau_positive},
        {5, "reduction identity F^2 = n V^2", reduction_identity},
        {6, "Euler-Lagrange failure at the singular ray", el_failure},
        {7, "minimization pipeline", minimization},
        {8, "cross-validation against the profile ODE", cross_validation},
        {9, "differentiation and quadrature orders", orders},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        Ledger L;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(L);
        } catch (const std::exception& e) {
            L.ok = false;
            L.detail.str("");
            L.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= 60.0) {
            if (L.ok) L.detail.str("");
            L.ok = false;
            L.detail << " exceeded 60 s";
        }
        if (!L.ok) ++failed;
        std::printf("%s %d %s [%.1f s] %s\n", L.ok ? "PASS" : "FAIL", c.id, c.name, secs, L.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
