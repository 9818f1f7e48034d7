#include "onehom/variational.hpp"

#include "onehom/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>

namespace onehom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wrap_centered(double t) {
    const double two_pi = 2.0 * std::numbers::pi;
    t = std::fmod(t, two_pi);
    if (t > std::numbers::pi) t -= two_pi;
    if (t <= -std::numbers::pi) t += two_pi;
    return t;
}

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double smooth_step_derivative(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    const double ab = a + b;
    return a * b * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x))) / (ab * ab);
}

}  // namespace

double SeedParams::phase_scale() const {
    const double ll = l();
    return ll < 1.0 ? std::min(1.0, std::pow(delta, 1.0 - ll)) : 1.0;
}

void SeedParams::validate() const {
    if (!(s > 0.0)) throw InvalidArgument("seed: s must be positive");
    if (!(eps > 0.0 && eps < 2.0 / (3.0 * s)))
        throw InvalidArgument("seed: eps must satisfy 0 < eps < 2/(3s) (integrability of the seed)");
    if (!(delta > 0.0 && delta < 0.5)) throw InvalidArgument("seed: delta must lie in (0, 1/2)");
    if (!((2.0 * k() + l()) * s < 1.0))
        throw InvalidArgument("seed: (2k + l) s < 1 violated");
    if (!(l() > 0.0))
        throw InfeasibleSeed("seed: phase exponent l = 1/s - (1 + 2 eps) must be positive");
}

double seed_bump(double t, double delta) {
    return smooth_step((2.0 * delta - std::abs(wrap_centered(t))) / delta);
}

double seed_bump_derivative(double t, double delta) {
    const double c = wrap_centered(t);
    const double sign = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
    return -sign / delta * smooth_step_derivative((2.0 * delta - std::abs(c)) / delta);
}

CurveJet seed_jet(const SeedParams& p, double theta) {
    const double t = wrap_centered(theta);
    const double at = std::abs(t);
    if (at == 0.0) return {Vec2::Zero(), Vec2::Zero()};
    const double sign = t > 0.0 ? 1.0 : -1.0;
    const double k = p.k(), l = p.l(), a = p.phase_scale();
    const double psi = a * sign * std::pow(at, l);
    const double dpsi = a * l * std::pow(at, l - 1.0);
    const double rk = std::pow(at, k);
    const Vec2 g0 = rk * e_R(psi);
    const Vec2 dg0 = k * sign * rk / at * e_R(psi) + rk * dpsi * e_theta(psi);
    const double eta = seed_bump(t, p.delta), deta = seed_bump_derivative(t, p.delta);
    const Vec2 circ = e_R(t);
    return {eta * g0 + (1.0 - eta) * circ, deta * (g0 - circ) + eta * dg0 + (1.0 - eta) * e_theta(t)};
}

Curve seed_curve(const SeedParams& params, const AngularGrid& grid) {
    params.validate();
    Curve c = Curve::sample_exact(grid, [params](double t) { return seed_jet(params, t); }, 0);
    const int n = grid.size();
    for (int i = 1; i < n; ++i) {
        const CurveJet jet = seed_jet(params, grid.node(i));
        if (!(jacobian(jet.g, jet.dg) > 0.0)) {
            std::ostringstream msg;
            msg << "seed has d <= 0 at theta = " << grid.centered(i);
            throw InfeasibleSeed(msg.str());
        }
    }
    for (int i = 1; i + 1 < n; ++i) {
        const Vec2 &a = c[i], &b = c[i + 1];
        if (!(a.x() * b.y() - a.y() * b.x() > 0.0)) {
            std::ostringstream msg;
            msg << "seed chord between nodes " << i << " and " << i + 1 << " is not positively oriented";
            throw InfeasibleSeed(msg.str());
        }
    }
    return c;
}

void MinimizeConfig::validate() const {
    if (max_iters <= 0) throw InvalidArgument("minimize: max_iters must be positive");
    if (!(gradient_tolerance > 0.0)) throw InvalidArgument("minimize: gradient_tolerance must be positive");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidArgument("minimize: backtrack must be in (0,1)");
    if (max_backtracks <= 0) throw InvalidArgument("minimize: max_backtracks must be positive");
    if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidArgument("minimize: armijo must be in (0,1)");
    if (memory <= 0) throw InvalidArgument("minimize: memory must be positive");
    for (size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] <= schedule[i - 1])
            throw InvalidArgument("minimize: schedule must be strictly increasing");
}

DiscreteObjective::DiscreteObjective(int n, const EnergyModel& model, int pinned_index)
    : n_(n), model_(model), pin_(((pinned_index % n) + n) % n), h_(2.0 * std::numbers::pi / n) {
    const double p = model.pin_exponent();
    pin_factor_ = std::pow(1.5, p) / (1.0 - p);
}

double DiscreteObjective::evaluate(const std::vector<double>& x, std::vector<double>* grad) const {
    const double s = model_.s();
    const auto n = static_cast<size_t>(n_);
    if (grad) grad->assign(2 * n, 0.0);
    std::vector<double> parts(n);
    const auto pin = static_cast<size_t>(pin_);
    const size_t before = (pin + n - 1) % n, after = (pin + 1) % n, before2 = (pin + n - 2) % n;
    for (size_t i = 0; i < n; ++i) {
        const size_t ip = (i + 1) % n;
        const double ax = x[2 * i], ay = x[2 * i + 1], bx = x[2 * ip], by = x[2 * ip + 1];
        const double mx = 0.5 * (ax + bx), my = 0.5 * (ay + by);
        const double dx = (bx - ax) / h_, dy = (by - ay) / h_;
        double e = 0.5 * (mx * mx + my * my + dx * dx + dy * dy);
        double w = 1.0;
        if (i == pin || i == before) w = 0.0;
        if (i == after || i == before2) w += pin_factor_;
        double hp = 0.0;
        if (w > 0.0) {
            const double d = (ax * by - ay * bx) / h_;
            if (!(d > 0.0)) return kInf;
            const double hd = std::pow(d, -s);
            e += w * hd;
            hp = -s * w * hd / d;
        }
        parts[i] = h_ * e;
        if (grad) {
            auto& G = *grad;
            G[2 * i] += h_ * (0.5 * mx - dx / h_ + hp * by / h_);
            G[2 * i + 1] += h_ * (0.5 * my - dy / h_ - hp * bx / h_);
            G[2 * ip] += h_ * (0.5 * mx + dx / h_ - hp * ay / h_);
            G[2 * ip + 1] += h_ * (0.5 * my + dy / h_ + hp * ax / h_);
        }
    }
    if (grad) (*grad)[2 * pin] = (*grad)[2 * pin + 1] = 0.0;
    return pairwise_sum(parts);
}

Curve prolong(const Curve& curve) {
    const int n = curve.size();
    const AngularGrid fine(2 * n);
    const auto pin = curve.pinned_index();
    std::vector<Vec2> v(static_cast<size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<size_t>(2 * i)] = curve[i];
        v[static_cast<size_t>(2 * i + 1)] = (-curve[i - 1] + 9.0 * curve[i] + 9.0 * curve[i + 1] - curve[i + 2]) / 16.0;
    }
    auto cross = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
    auto rotate = [](const Vec2& u, double alpha) {
        return Vec2(std::cos(alpha) * u.x() - std::sin(alpha) * u.y(), std::sin(alpha) * u.x() + std::cos(alpha) * u.y());
    };
    auto turn = [](const Vec2& u, const Vec2& w) {
        return std::clamp(std::abs(std::atan2(u.x() * w.y() - u.y() * w.x(), u.dot(w))), 1e-3, std::numbers::pi / 4);
    };
    for (int i = 0; i < n; ++i) {
        const Vec2 &a = curve[i], &b = curve[i + 1];
        Vec2& m = v[static_cast<size_t>(2 * i + 1)];
        const bool starts_at_pin = pin && *pin == i;
        const bool ends_at_pin = pin && *pin == curve.grid().wrap(i + 1);
        const bool left_ok = starts_at_pin || cross(a, m) > 0.0;
        const bool right_ok = ends_at_pin || cross(m, b) > 0.0;
        if (left_ok && right_ok) continue;
        // Near the pin a chord midpoint is collinear with the pin; turn it by the local winding.
        if (starts_at_pin) m = 0.5 * rotate(b, -turn(b, curve[i + 2]));
        else if (ends_at_pin) m = 0.5 * rotate(a, turn(curve[i - 1], a));
        else if (cross(a, b) > 0.0) m = 0.5 * (a + b);
    }
    std::optional<int> fine_pin;
    if (pin) fine_pin = 2 * *pin;
    return Curve(fine, std::move(v), fine_pin);
}

namespace {

struct LevelResult {
    std::vector<double> x;
    bool converged = false;
    bool stalled = false;
};

LevelResult lbfgs_level(const DiscreteObjective& obj, std::vector<double> x, const MinimizeConfig& cfg,
                        int grid, std::vector<TraceEntry>& trace) {
    std::vector<double> g;
    double f = obj.evaluate(x, &g);
    if (!std::isfinite(f)) throw InvalidArgument("minimize: starting curve has infinite energy");
    const size_t m = x.size();
    auto dot = [m](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (size_t i = 0; i < m; ++i) s += a[i] * b[i];
        return s;
    };
    auto supnorm = [](const std::vector<double>& a) {
        double s = 0.0;
        for (double v : a) s = std::max(s, std::abs(v));
        return s;
    };
    std::deque<std::vector<double>> S, Y;
    std::vector<double> q(m), xn(m), gn;
    LevelResult res;
    trace.push_back({grid, 0, f, supnorm(g)});
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const double gnorm = supnorm(g);
        if (gnorm <= cfg.gradient_tolerance) {
            res.converged = true;
            break;
        }
        q = g;
        std::vector<double> alpha(S.size());
        for (size_t k = S.size(); k-- > 0;) {
            alpha[k] = dot(S[k], q) / dot(Y[k], S[k]);
            for (size_t i = 0; i < m; ++i) q[i] -= alpha[k] * Y[k][i];
        }
        const double scale = S.empty() ? 1.0 / (100.0 * std::max(1.0, gnorm))
                                       : dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
        for (double& v : q) v *= scale;
        for (size_t k = 0; k < S.size(); ++k) {
            const double beta = dot(Y[k], q) / dot(Y[k], S[k]);
            for (size_t i = 0; i < m; ++i) q[i] += S[k][i] * (alpha[k] - beta);
        }
        double slope = -dot(q, g);
        if (!(slope < 0.0)) {
            S.clear();
            Y.clear();
            q = g;
            for (double& v : q) v /= 100.0 * std::max(1.0, gnorm);
            slope = -dot(q, g);
        }
        double t = 1.0, fn = kInf;
        bool accepted = false;
        for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
            for (size_t i = 0; i < m; ++i) xn[i] = x[i] - t * q[i];
            fn = obj.evaluate(xn, &gn);
            if (std::isfinite(fn) && fn <= f + cfg.armijo * t * slope && fn < f) {
                accepted = true;
                break;
            }
            t *= cfg.backtrack;
        }
        if (!accepted) {
            res.stalled = true;
            break;
        }
        std::vector<double> sv(m), yv(m);
        for (size_t i = 0; i < m; ++i) {
            sv[i] = xn[i] - x[i];
            yv[i] = gn[i] - g[i];
        }
        const double sy = dot(sv, yv);
        if (sy > 1e-14 * std::sqrt(dot(sv, sv) * dot(yv, yv))) {
            S.push_back(std::move(sv));
            Y.push_back(std::move(yv));
            if (static_cast<int>(S.size()) > cfg.memory) {
                S.pop_front();
                Y.pop_front();
            }
        }
        x.swap(xn);
        g.swap(gn);
        f = fn;
        trace.push_back({grid, it, f, supnorm(g)});
    }
    if (!res.stalled && !res.converged) res.converged = supnorm(g) <= cfg.gradient_tolerance;
    res.x = std::move(x);
    return res;
}

std::vector<double> pack(const Curve& c) {
    std::vector<double> x(static_cast<size_t>(2 * c.size()));
    for (int i = 0; i < c.size(); ++i) {
        x[static_cast<size_t>(2 * i)] = c[i].x();
        x[static_cast<size_t>(2 * i + 1)] = c[i].y();
    }
    return x;
}

Curve unpack(const AngularGrid& grid, const std::vector<double>& x, int pin) {
    std::vector<Vec2> v(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i)
        v[static_cast<size_t>(i)] = Vec2(x[static_cast<size_t>(2 * i)], x[static_cast<size_t>(2 * i + 1)]);
    return Curve(grid, std::move(v), pin);
}

}  // namespace

MinimizeResult minimize(const Curve& seed, const EnergyModel& model, const MinimizeConfig& cfg) {
    cfg.validate();
    std::vector<int> schedule = cfg.schedule;
    if (schedule.empty()) schedule.push_back(seed.size());
    if (schedule.front() != seed.size())
        throw InvalidArgument("minimize: seed grid does not match the first schedule entry");
    for (size_t i = 1; i < schedule.size(); ++i)
        if (schedule[i] != 2 * schedule[i - 1])
            throw InvalidArgument("minimize: continuation schedule must double the grid at each step");
    int pin = seed.pinned_index().value_or(cfg.pinned_index);
    Curve current(seed.grid(), seed.samples(), pin);

    MinimizeResult out{current, {}, {}, false, false, {}};
    for (size_t level = 0; level < schedule.size(); ++level) {
        if (level > 0) {
            current = prolong(current);
            pin = *current.pinned_index();
        }
        const DiscreteObjective obj(current.size(), model, pin);
        LevelResult lr = lbfgs_level(obj, pack(current), cfg, current.size(), out.trace);
        current = unpack(current.grid(), lr.x, pin);
        out.levels.push_back(current);
        out.converged = lr.converged;
        out.stalled = lr.stalled;
    }
    out.curve = current;
    std::ostringstream msg;
    msg << (out.converged ? "converged" : (out.stalled ? "stalled: line search exhausted backtracks"
                                                       : "iteration limit reached"))
        << " at n=" << current.size() << " after " << out.trace.size() << " trace entries";
    out.message = msg.str();
    return out;
}

TestFunctionBasis TestFunctionBasis::fourier(int M) {
    TestFunctionBasis b;
    b.modes.push_back({"1", [](double) { return 1.0; }, [](double) { return 0.0; }});
    for (int m = 1; m <= M; ++m) {
        const double k = m;
        b.modes.push_back({"cos" + std::to_string(m), [k](double t) { return std::cos(k * t); },
                           [k](double t) { return -k * std::sin(k * t); }});
        b.modes.push_back({"sin" + std::to_string(m), [k](double t) { return std::sin(k * t); },
                           [k](double t) { return k * std::cos(k * t); }});
    }
    return b;
}

double StationarityReport::max_eqm() const {
    double m = 0.0;
    for (double v : eqm_residuals) m = std::max(m, std::abs(v));
    return m;
}

double StationarityReport::max_ii() const {
    double m = 0.0;
    for (double v : ii_residuals) m = std::max(m, std::abs(v));
    return m;
}

StationarityReport stationarity_residuals(const DerivedCurve& curve, const EnergyModel& model,
                                          const TestFunctionBasis& basis, const QuadratureConfig& cfg,
                                          const std::vector<VectorTestFunction>& xi) {
    const AngularRule rule(curve, model, cfg);
    StationarityReport rep;
    rep.energy = energy_I(curve, model, cfg).total;
    rep.pin_window = rule.excluded_half_width();
    for (const auto& mode : basis.modes) {
        rep.mode_names.push_back(mode.name);
        rep.eqm_residuals.push_back(
            rule.integrate([&](const PointState& p) { return p.dr * mode.dphi(p.theta); }));
        rep.ii_residuals.push_back(rule.integrate([&](const PointState& p) {
            const double bulk = 2.0 * p.dr + 2.0 * p.g2 + 2.0 * p.h;
            return bulk * mode.phi(p.theta) + p.gg * mode.dphi(p.theta);
        }));
    }
    rep.dr_constant = rule.integrate([](const PointState& p) { return p.dr; }) / (2.0 * std::numbers::pi);
    const double c = rep.dr_constant;
    rep.dr_deviation = rule.integrate([c](const PointState& p) { return std::abs(p.dr - c); });
    if (!xi.empty()) rep.el1d_residuals = el1d_residual(curve, model, xi);
    return rep;
}

ZReport z_diagnostics(const DerivedCurve& curve, const EnergyModel& model, double lo, double hi) {
    const int n = curve.size();
    const auto& grid = curve.curve.grid();
    const double h = grid.spacing();
    std::vector<double> z(static_cast<size_t>(n), kNaN);
    for (int i = 0; i < n; ++i) {
        const double d = curve.jac[static_cast<size_t>(i)];
        if (d > 0.0) z[static_cast<size_t>(i)] = 0.5 * curve.dg[static_cast<size_t>(i)].squaredNorm() + h_family(d, model).f;
    }
    auto at = [&](int i) { return z[static_cast<size_t>(grid.wrap(i))]; };
    ZReport rep;
    rep.n_nodes = n;
    for (int i = 0; i < n; ++i) {
        const double t = grid.centered(i);
        if (t < lo || t > hi) continue;
        bool ok = true;
        for (int k = -2; k <= 2; ++k) ok = ok && std::isfinite(at(i + k));
        if (!ok) continue;
        const double dz = (8.0 * (at(i + 1) - at(i - 1)) - (at(i + 2) - at(i - 2))) / (12.0 * h);
        const double d2z = (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2)) / (12.0 * h * h);
        const Vec2& g = curve.g(i);
        const double gg = g.dot(curve.dg[static_cast<size_t>(i)]);
        const double hv = h_family(curve.jac[static_cast<size_t>(i)], model).h;
        const double base = 2.0 * at(i) + g.squaredNorm();
        rep.residual1 = std::max(rep.residual1, std::abs(dz - gg));
        rep.residual2 = std::max(rep.residual2, std::abs(d2z - (base + 2.0 * hv)));
        rep.residual2_unit_h = std::max(rep.residual2_unit_h, std::abs(d2z - (base + hv)));
        ++rep.nodes_used;
    }
    return rep;
}

std::vector<double> el1d_residual(const DerivedCurve& curve, const EnergyModel& model,
                                  const std::vector<VectorTestFunction>& xi, double r_min) {
    const auto& grid = curve.curve.grid();
    const double h = grid.spacing();
    std::vector<double> out;
    for (const auto& f : xi) {
        std::vector<double> parts;
        for (int i = 0; i < grid.size(); ++i) {
            const double t = grid.centered(i);
            if (t < f.lo || t > f.hi) continue;
            const Vec2& g = curve.g(i);
            if (!(g.norm() >= r_min)) {
                std::ostringstream msg;
                msg << "test function support [" << f.lo << ", " << f.hi << "] meets a zero of g at theta = " << t;
                throw SupportViolation(msg.str());
            }
            const Mat2 D = dw(g, curve.dg[static_cast<size_t>(i)], t, model);
            parts.push_back(h * ((D * e_R(t)).dot(f.xi(t)) + (D * e_theta(t)).dot(f.dxi(t))));
        }
        out.push_back(pairwise_sum(parts));
    }
    return out;
}

std::vector<Vec2> el1d_strong(const DerivedCurve& curve, const EnergyModel& model) {
    const int n = curve.size();
    const auto& grid = curve.curve.grid();
    const double h = grid.spacing();
    std::vector<Vec2> q(static_cast<size_t>(n));
    std::vector<bool> ok(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto u = static_cast<size_t>(i);
        const double d = curve.jac[u];
        ok[u] = d > 0.0;
        q[u] = ok[u] ? Vec2(curve.dg[u] + h_family(d, model).dh * quarter_turn(curve.g(i))) : Vec2::Zero();
    }
    std::vector<Vec2> out(static_cast<size_t>(n), Vec2::Constant(kNaN));
    for (int i = 0; i < n; ++i) {
        bool good = true;
        for (int k = -2; k <= 2; ++k) good = good && ok[static_cast<size_t>(grid.wrap(i + k))];
        if (!good) continue;
        auto Q = [&](int k) { return q[static_cast<size_t>(grid.wrap(k))]; };
        const Vec2 dq = (8.0 * (Q(i + 1) - Q(i - 1)) - (Q(i + 2) - Q(i - 2))) / (12.0 * h);
        const auto u = static_cast<size_t>(i);
        const double dh = h_family(curve.jac[u], model).dh;
        out[u] = curve.g(i) - dh * quarter_turn(curve.dg[u]) - dq;
    }
    return out;
}

ZeroReport classify_zeros(const Curve& curve, double threshold) {
    const DerivedCurve dc = differentiate(curve);
    ZeroReport rep;
    rep.min_d = kInf;
    rep.min_abs_g = kInf;
    for (int i = 0; i < curve.size(); ++i) {
        const double r = curve[i].norm();
        if (r < rep.min_abs_g) {
            rep.min_abs_g = r;
            rep.min_abs_g_index = i;
        }
        if (r <= threshold) {
            rep.zeros.push_back(i);
            continue;
        }
        const double d = dc.jac[static_cast<size_t>(i)];
        if (d < rep.min_d) {
            rep.min_d = d;
            rep.min_d_index = i;
        }
    }
    rep.lipschitz_candidate = rep.zeros.empty() && rep.min_d > 0.0;
    return rep;
}

}  // namespace onehom
