#include "onehom/spiral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

namespace onehom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Fritsch-Carlson monotone cubic on strictly increasing abscissae.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const size_t n = x_.size();
        m_.assign(n, 0.0);
        std::vector<double> delta(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_[0] = delta[0];
        m_[n - 1] = delta[n - 2];
        for (size_t i = 1; i + 1 < n; ++i)
            m_[i] = delta[i - 1] * delta[i] <= 0.0 ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
        for (size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0.0) {
                m_[i] = m_[i + 1] = 0.0;
                continue;
            }
            const double a = m_[i] / delta[i], b = m_[i + 1] / delta[i];
            const double q = a * a + b * b;
            if (q > 9.0) {
                const double t = 3.0 / std::sqrt(q);
                m_[i] = t * a * delta[i];
                m_[i + 1] = t * b * delta[i];
            }
        }
    }

    // Value and derivative at x (clamped to the data range).
    std::pair<double, double> operator()(double x) const {
        const size_t n = x_.size();
        size_t i = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        i = std::clamp<size_t>(i, 1, n - 1) - 1;
        const double h = x_[i + 1] - x_[i];
        const double u = std::clamp((x - x_[i]) / h, 0.0, 1.0);
        const double u2 = u * u, u3 = u2 * u;
        const double v = (2 * u3 - 3 * u2 + 1) * y_[i] + (u3 - 2 * u2 + u) * h * m_[i] +
                         (-2 * u3 + 3 * u2) * y_[i + 1] + (u3 - u2) * h * m_[i + 1];
        const double dv = ((6 * u2 - 6 * u) * y_[i] + (3 * u2 - 4 * u + 1) * h * m_[i] +
                           (-6 * u2 + 6 * u) * y_[i + 1] + (3 * u2 - 2 * u) * h * m_[i + 1]) /
                          h;
        return {v, dv};
    }

private:
    std::vector<double> x_, y_, m_;
};

std::vector<double> graded_grid(const ProfileParams& p, int extra) {
    const double q = p.grid_ratio();
    const int total = p.nodes + extra;
    std::vector<double> t(static_cast<size_t>(total));
    for (int k = 0; k < total; ++k) t[static_cast<size_t>(k)] = p.theta_max * std::pow(q, total - 1 - k);
    t.back() = p.theta_max;
    return t;
}

int prefix_nodes(const ProfileParams& p) {
    return static_cast<int>(std::ceil(p.pre_decades * std::log(10.0) / -std::log(p.grid_ratio())));
}

// Classical RK4 for y' = f(y) (autonomous) along the grid, starting from y(0) = 0.
std::vector<double> rk4_from_zero(const std::vector<double>& t, const std::function<double(double)>& f) {
    std::vector<double> y(t.size());
    double t0 = 0.0, y0 = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
        const double h = t[i] - t0;
        const double k1 = f(y0), k2 = f(y0 + 0.5 * h * k1), k3 = f(y0 + 0.5 * h * k2), k4 = f(y0 + h * k3);
        y0 += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t0 = t[i];
        y[i] = y0;
    }
    return y;
}

double f2_formula(double r, double j, double d, double s, double c, double tau) {
    const double tt = tau + d;
    const double a = 2.0 * (1.0 + 1.0 / s);
    return 1.0 + (r * r + 2.0 * c) / (a * tt * j) -
           std::pow(s, 1.0 / s) / a * std::pow(tt, -(1.0 + 1.0 / s)) * std::pow(j, -1.0 / s);
}

double v_formula(double r, double d, double s, double c) {
    const double v2 = 1.0 + std::pow(d, s) * (r * r + 2.0 * c) / (s + 2.0);
    return v2 >= 0.0 ? std::sqrt(v2) : kNaN;
}

// gamma with gamma(theta_max) = 0 by the trapezoid rule in ln theta on j*theta.
std::vector<double> integrate_gamma(const std::vector<double>& t, const std::vector<double>& j) {
    const size_t n = t.size();
    std::vector<double> g(n, 0.0);
    for (size_t k = n - 1; k-- > 0;) {
        const double dx = std::log(t[k + 1]) - std::log(t[k]);
        g[k] = g[k + 1] - 0.5 * dx * (j[k] * t[k] + j[k + 1] * t[k + 1]);
    }
    return g;
}

void fill_common(SpiralSolution& sol) {
    const auto& p = sol.params;
    const size_t n = sol.theta.size();
    sol.V.resize(n);
    sol.F2.resize(n);
    for (size_t i = 0; i < n; ++i) {
        sol.V[i] = v_formula(sol.r[i], sol.d[i], p.s, p.c);
        sol.F2[i] = f2_formula(sol.r[i], sol.j[i], sol.d[i], p.s, p.c, p.tau);
    }
    sol.gamma = integrate_gamma(sol.theta, sol.j);
}

}  // namespace

double ProfileParams::beta() const { return 2.0 * (s + 1.0) / std::sqrt(s * (s + 2.0)); }
double ProfileParams::n_of_s() const { return (s + 2.0) / (2.0 * (s + 1.0)); }
double ProfileParams::grid_ratio() const { return std::pow(theta_min / theta_max, 1.0 / (nodes - 1)); }

void ProfileParams::validate() const {
    if (!(s > 0.0)) throw InvalidArgument("profile: s must be positive");
    if (!(tau >= 0.0)) throw InvalidArgument("profile: tau must be nonnegative");
    if (!(theta_min > 0.0 && theta_min < theta_max)) throw InvalidArgument("profile: need 0 < theta_min < theta_max");
    if (nodes < 20) throw InvalidArgument("profile: at least 20 nodes");
    if (pre_decades < 0) throw InvalidArgument("profile: pre_decades must be nonnegative");
    if (!std::isfinite(c)) throw InvalidArgument("profile: c must be finite");
}

ProfileParams ProfileParams::defaults(double s) {
    ProfileParams p;
    p.s = s;
    p.c = -(s + 1.0);
    p.theta_max = 0.1;
    p.theta_min = 1e-11 * p.theta_max;
    return p;
}

double solve_d_implicit(double j, double s, double tau) {
    if (std::isinf(j)) return 0.0;
    if (!(j > 0.0)) throw NewtonFailure("implicit d(j) needs j > 0");
    const double root0 = std::pow(s, 1.0 / (s + 1.0)) * std::pow(j, -1.0 / (s + 1.0));
    const double upper = root0 * (1.0 + 1e-9);
    const double lower = std::min(root0, std::pow(s / (j * (tau + upper)), 1.0 / s)) * (1.0 - 1e-9);
    // psi(y) = -s y - ln((tau + e^y) j / s), decreasing in y = ln d
    auto psi = [&](double y) { return -s * y - std::log((tau + std::exp(y)) * j / s); };
    double ylo = std::log(lower), yhi = std::log(upper);
    double plo = psi(ylo), phi = psi(yhi);
    if (plo == 0.0) return lower;
    if (phi == 0.0) return upper;
    if (!(plo > 0.0 && phi < 0.0)) {
        std::ostringstream msg;
        msg << "no sign change for d(j) at j = " << j;
        throw NewtonFailure(msg.str());
    }
    double y = 0.5 * (ylo + yhi);
    for (int it = 0; it < 200; ++it) {
        const double py = psi(y);
        if (py > 0.0) ylo = y;
        else yhi = y;
        const double e = std::exp(y);
        const double dpsi = -s - e / (tau + e);
        double yn = y - py / dpsi;
        if (!(yn > ylo && yn < yhi)) yn = 0.5 * (ylo + yhi);
        if (std::abs(yn - y) < 1e-15 * std::max(1.0, std::abs(y)) || yhi - ylo < 1e-15) {
            y = yn;
            break;
        }
        y = yn;
    }
    return std::exp(y);
}

double y_factor(double j, double s, double c, double tau) {
    const double d = solve_d_implicit(j, s, tau);
    const double tt = tau + d;
    double F2 = 1.0;
    if (std::isfinite(j)) {
        const double r = std::pow(s / tt, 1.0 / (2.0 * s)) * std::pow(j, -(s + 1.0) / (2.0 * s));
        F2 = f2_formula(r, j, d, s, c, tau);
    }
    if (!(F2 > 0.0)) {
        std::ostringstream msg;
        msg << "F^2 = " << F2 << " <= 0 at j = " << j;
        throw NonpositiveF2(msg.str());
    }
    return 2.0 * std::pow(s, -1.0 / (2.0 * s)) * std::sqrt(2.0 * (1.0 + 1.0 / s)) * std::sqrt(F2) *
           std::pow(tt, 0.5 + 1.0 / (2.0 * s)) * (1.0 - tt / ((s + 1.0) * tau + (s + 2.0) * d));
}

SpiralSolution solve_tau_zero(const ProfileParams& params) {
    params.validate();
    if (params.tau != 0.0) throw InvalidArgument("solve_tau_zero requires tau = 0");
    const double s = params.s, c = params.c, beta = params.beta(), n = params.n_of_s();
    const int extra = prefix_nodes(params);
    const std::vector<double> t = graded_grid(params, extra);
    const double sp = std::pow(s, s / (s + 1.0));
    auto vsq = [&](double w) {
        w = std::max(w, 0.0);
        return 1.0 + (s * w * w + 2.0 * c * sp * std::pow(w, s / (s + 1.0))) / (s + 2.0);
    };
    std::vector<double> w(t.size());
    {
        double t0 = 0.0, w0 = 0.0;
        auto f = [&](double y) {
            const double v2 = vsq(y);
            return v2 > 0.0 ? beta * std::sqrt(v2) : kNaN;
        };
        for (size_t i = 0; i < t.size(); ++i) {
            const double h = t[i] - t0;
            const double k1 = f(w0), k2 = f(w0 + 0.5 * h * k1), k3 = f(w0 + 0.5 * h * k2), k4 = f(w0 + h * k3);
            w0 += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (!std::isfinite(w0) || !(vsq(w0) > 0.0)) {
                std::ostringstream msg;
                msg << "V^2 <= 0 at theta = " << t[i] << " (c = " << c << " too negative for this window)";
                throw NonpositiveV(msg.str());
            }
            t0 = t[i];
            w[i] = w0;
        }
    }
    SpiralSolution sol;
    sol.params = params;
    const auto skip = static_cast<size_t>(extra);
    sol.theta.assign(t.begin() + static_cast<long>(skip), t.end());
    sol.w.assign(w.begin() + static_cast<long>(skip), w.end());
    const size_t m = sol.theta.size();
    sol.j.resize(m);
    sol.d.resize(m);
    sol.r.resize(m);
    sol.rprime.resize(m);
    for (size_t i = 0; i < m; ++i) {
        const double wi = sol.w[i];
        sol.j[i] = 1.0 / wi;
        sol.d[i] = std::pow(s, 1.0 / (s + 1.0)) * std::pow(wi, 1.0 / (s + 1.0));
        sol.r[i] = std::pow(s, 1.0 / (2.0 * (s + 1.0))) * std::pow(wi, n);
        sol.rprime[i] = n * sol.r[i] * beta * std::sqrt(vsq(wi)) * sol.j[i];
    }
    fill_common(sol);
    return sol;
}

SpiralSolution solve_tau_positive(const ProfileParams& params) {
    params.validate();
    if (!(params.tau > 0.0)) throw InvalidArgument("solve_tau_positive requires tau > 0");
    const double s = params.s, c = params.c, tau = params.tau;
    const double ej = -2.0 * s / (2.0 * s + 1.0);  // j = v^ej
    const double lead = (2.0 * s + 1.0) / (2.0 * s);
    const int extra = prefix_nodes(params);
    const std::vector<double> t = graded_grid(params, extra);
    const std::vector<double> v = rk4_from_zero(t, [&](double y) {
        const double j = y > 0.0 ? std::pow(y, ej) : kInf;
        return lead * y_factor(j, s, c, tau);
    });
    SpiralSolution sol;
    sol.params = params;
    const auto skip = static_cast<size_t>(extra);
    sol.theta.assign(t.begin() + static_cast<long>(skip), t.end());
    const size_t m = sol.theta.size();
    sol.j.resize(m);
    sol.w.resize(m);
    sol.d.resize(m);
    sol.r.resize(m);
    sol.rprime.resize(m);
    for (size_t i = 0; i < m; ++i) {
        const double j = std::pow(v[i + skip], ej);
        const double d = solve_d_implicit(j, s, tau);
        const double r = std::pow(s / (tau + d), 1.0 / (2.0 * s)) * std::pow(j, -(s + 1.0) / (2.0 * s));
        sol.j[i] = j;
        sol.w[i] = 1.0 / j;
        sol.d[i] = d;
        sol.r[i] = r;
        const double rp2 = 2.0 * c + r * r + 2.0 * (s + 1.0) * std::pow(d, -s) - r * r * j * j;
        sol.rprime[i] = std::sqrt(std::max(rp2, 0.0));
    }
    fill_common(sol);
    return sol;
}

SpiralSolution solve_profile(const ProfileParams& params) {
    return params.tau > 0.0 ? solve_tau_positive(params) : solve_tau_zero(params);
}

bool ResidualReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const ResidualEntry& e) { return e.pass(); });
}

const ResidualEntry* ResidualReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

double conservation_residual(const std::vector<double>& r, const std::vector<double>& d, double s,
                             double tau) {
    double m = 0.0;
    for (size_t i = 0; i < r.size(); ++i) {
        const double sr2 = s * r[i] * r[i];
        m = std::max(m, std::abs(sr2 - tau * std::pow(d[i], s + 1.0) - std::pow(d[i], s + 2.0)) / sr2);
    }
    return m;
}

ProfileResiduals profile_residuals(const SpiralSolution& sol, double lo, double hi) {
    const auto& p = sol.params;
    const double s = p.s, c = p.c;
    ProfileResiduals out;
    const size_t n = sol.size();
    for (size_t i = 1; i + 1 < n; ++i) {
        const double t = sol.theta[i];
        if (t < lo || t > hi) continue;
        const double xm = std::log(sol.theta[i - 1]), x0 = std::log(t), xp = std::log(sol.theta[i + 1]);
        const double hm = x0 - xm, hp = xp - x0;
        // non-uniform three-point derivatives in x = ln theta
        auto d1 = [&](double ym, double y0, double yp) {
            return (-hp / (hm * (hm + hp))) * ym + ((hp - hm) / (hm * hp)) * y0 + (hm / (hp * (hm + hp))) * yp;
        };
        auto d2 = [&](double ym, double y0, double yp) {
            return 2.0 * (ym / (hm * (hm + hp)) - y0 / (hm * hp) + yp / (hp * (hm + hp)));
        };
        const double r = sol.r[i], j = sol.j[i], d = sol.d[i];
        const double rp = d1(sol.r[i - 1], r, sol.r[i + 1]) / t;
        const double q0 = r * r, qm = sol.r[i - 1] * sol.r[i - 1], qp = sol.r[i + 1] * sol.r[i + 1];
        const double q2 = (d2(qm, q0, qp) - d1(qm, q0, qp)) / (t * t);
        const double hd = std::pow(d, -s);
        const double e1 = 0.5 * (rp * rp + r * r * j * j) - (c + 0.5 * r * r + (s + 1.0) * hd);
        const double n1 = 0.5 * (rp * rp + r * r * j * j) + std::abs(c) + 0.5 * r * r + (s + 1.0) * hd;
        const double e2 = 0.25 * q2 - (c + r * r + hd);
        const double n2 = 0.25 * std::abs(q2) + std::abs(c) + r * r + hd;
        const double sr2 = s * r * r;
        const double cons = std::abs(sr2 - p.tau * std::pow(d, s + 1.0) - std::pow(d, s + 2.0)) / sr2;
        out.theta.push_back(t);
        out.eq1.push_back(e1 / n1);
        out.eq2.push_back(e2 / n2);
        out.conservation.push_back(cons);
        out.max_eq1 = std::max(out.max_eq1, std::abs(e1 / n1));
        out.max_eq2 = std::max(out.max_eq2, std::abs(e2 / n2));
        out.max_conservation = std::max(out.max_conservation, cons);
    }
    return out;
}

ResidualReport verify_profile(const SpiralSolution& sol, double tolerance) {
    const ProfileResiduals pr = profile_residuals(sol);
    ResidualReport rep;
    rep.entries.push_back({"profile_eq1", pr.max_eq1, tolerance});
    rep.entries.push_back({"profile_eq2", pr.max_eq2, tolerance});
    rep.entries.push_back({"conservation", conservation_residual(sol.r, sol.d, sol.params.s, sol.params.tau), 1e-12});
    double dr2j = 0.0;
    for (size_t i = 0; i < sol.size(); ++i)
        dr2j = std::max(dr2j, std::abs(sol.d[i] - sol.r[i] * sol.r[i] * sol.j[i]) / sol.d[i]);
    rep.entries.push_back({"d_equals_r2j", dr2j, 1e-12});
    return rep;
}

std::vector<double> dw_er_magnitude(const SpiralSolution& sol) {
    std::vector<double> out(sol.size());
    for (size_t i = 0; i < sol.size(); ++i) {
        const double a = sol.r[i] * (1.0 - sol.j[i] * sol.j[i]);
        const double b = sol.rprime[i] * sol.j[i];
        out[i] = std::hypot(a, b);
    }
    return out;
}

FitResult fit_asymptotics(const SpiralSolution& sol, FitQuantity q, double theta_lo, double theta_hi) {
    const double slack = 1e-12;
    if (!(theta_lo >= sol.theta.front() * (1.0 - slack) && theta_hi <= sol.theta.back() * (1.0 + slack) &&
          theta_lo < theta_hi))
        throw WindowTooSmall("fit window must lie inside the solution domain");
    FitResult f;
    f.theta_lo = theta_lo;
    f.theta_hi = theta_hi;
    std::vector<double> vals;
    switch (q) {
        case FitQuantity::j: f.quantity = "j"; vals = sol.j; break;
        case FitQuantity::r: f.quantity = "r"; vals = sol.r; break;
        case FitQuantity::gamma: f.quantity = "gamma"; vals = sol.gamma; break;
        case FitQuantity::dw_er: f.quantity = "dw_er"; vals = dw_er_magnitude(sol); break;
    }
    const bool loglog = q != FitQuantity::gamma;
    std::vector<double> xs, ys;
    for (size_t i = 0; i < sol.size(); ++i) {
        const double t = sol.theta[i];
        if (t < theta_lo * (1.0 - slack) || t > theta_hi * (1.0 + slack)) continue;
        xs.push_back(std::log(t));
        ys.push_back(loglog ? std::log(vals[i]) : vals[i]);
    }
    f.nodes = static_cast<int>(xs.size());
    if (f.nodes < 20) throw WindowTooSmall("fit window holds fewer than 20 nodes");
    const double N = xs.size();
    double sx = 0, sy = 0;
    for (size_t i = 0; i < xs.size(); ++i) sx += xs[i], sy += ys[i];
    const double mx = sx / N, my = sy / N;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    f.exponent = sxy / sxx;
    const double intercept = my - f.exponent * mx;
    f.prefactor = loglog ? std::exp(intercept) : intercept;
    double rr = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (intercept + f.exponent * xs[i]);
        rr += e * e;
    }
    f.residual = std::sqrt(rr / N);
    return f;
}

EnergyWindow energy_window(const SpiralSolution& sol, double theta_lo, double theta_hi) {
    EnergyWindow out;
    if (!(theta_lo >= sol.theta.front() && theta_hi <= sol.theta.back() && theta_lo <= theta_hi))
        throw DomainMismatch("energy window must lie inside the solution domain");
    if (theta_lo == theta_hi) return out;
    const auto& p = sol.params;
    const double s = p.s;
    const size_t n = sol.size();
    std::vector<double> x(n), A(n), B(n), T(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = sol.theta[i], j = sol.j[i], r = sol.r[i], d = sol.d[i], tt = p.tau + d;
        x[i] = std::log(t);
        T[i] = t * ((s + 1.0) * sol.F2[i] + 1.0) * tt * j / s;
        A[i] = T[i] + t * 0.5 * std::pow(s, 1.0 / s) * std::pow(tt, -1.0 / s) * std::pow(j, -(s + 1.0) / s) * (1.0 + j * j);
        B[i] = t * (0.5 * (r * r + sol.rprime[i] * sol.rprime[i] + r * r * j * j) + std::pow(d, -s));
    }
    // trapezoid in ln theta with linear interpolation at the window ends
    auto integrate = [&](const std::vector<double>& y) {
        const double a = std::log(theta_lo), b = std::log(theta_hi);
        double total = 0.0;
        for (size_t i = 0; i + 1 < n; ++i) {
            const double l = std::max(a, x[i]), h = std::min(b, x[i + 1]);
            if (!(h > l)) continue;
            const double slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            const double yl = y[i] + slope * (l - x[i]), yh = y[i] + slope * (h - x[i]);
            total += 0.5 * (h - l) * (yl + yh);
        }
        return total;
    };
    out.closed_form = integrate(A);
    out.direct = integrate(B);
    out.tau_j_share = integrate(T) / out.closed_form;
    return out;
}

Curve to_curve(const SpiralSolution& sol, const AngularGrid& grid, const EmbedOptions& opts) {
    const double tmax = sol.theta.back(), tmin = sol.theta.front();
    if (!(tmax >= 2.0 * grid.spacing())) throw DomainMismatch("profile window shorter than two grid spacings");
    if (!(tmax < (opts.mirror ? 0.5 : 1.0) * std::numbers::pi)) throw DomainMismatch("profile window too wide to embed");
    if (!(tmin < 0.5 * grid.spacing())) throw DomainMismatch("profile does not reach the first grid node");

    const size_t n = sol.size();
    std::vector<double> x(n), lj(n);
    for (size_t i = 0; i < n; ++i) {
        x[i] = std::log(sol.theta[i]);
        lj[i] = std::log(sol.j[i]);
    }
    auto R = std::make_shared<MonotoneCubic>(x, sol.r);
    auto G = std::make_shared<MonotoneCubic>(x, sol.gamma);
    auto LJ = std::make_shared<MonotoneCubic>(x, lj);
    auto RP = std::make_shared<MonotoneCubic>(x, sol.rprime);
    // power-law continuation below theta_min
    const double pr = (std::log(sol.r[1]) - std::log(sol.r[0])) / (x[1] - x[0]);
    const double pj = (lj[1] - lj[0]) / (x[1] - x[0]);
    const double pg = (sol.gamma[1] - sol.gamma[0]) / (x[1] - x[0]);
    const double r0 = sol.r[0], j0 = sol.j[0], g0 = sol.gamma[0], x0 = x[0];

    auto profile = [=](double a) -> CurveJet {
        double r, gam, j, rp;
        const double xa = std::log(a);
        if (xa < x0) {
            r = r0 * std::exp(pr * (xa - x0));
            j = j0 * std::exp(pj * (xa - x0));
            gam = g0 + pg * (xa - x0);
            rp = pr * r / a;
        } else {
            r = (*R)(xa).first;
            gam = (*G)(xa).first;
            j = std::exp((*LJ)(xa).first);
            rp = (*RP)(xa).first;
        }
        return {r * e_R(gam), rp * e_R(gam) + r * j * e_theta(gam)};
    };
    const CurveJet end = profile(tmax);
    Mat2 S;
    S << 1.0, 0.0, 0.0, -1.0;
    const double two_pi = 2.0 * std::numbers::pi;
    const double bridge_end = opts.mirror ? two_pi - tmax : two_pi;
    const double L = bridge_end - tmax;
    const Vec2 P0 = end.g, T0 = end.dg;
    const Vec2 P1 = opts.mirror ? Vec2(S * end.g) : Vec2::Zero();
    const Vec2 T1 = opts.mirror ? Vec2(-S * end.dg) : Vec2::Zero();
    const bool mirror = opts.mirror;
    // polar bridge for the mirrored closure: arg rises by one turn, ln r returns to its start
    const double arg0 = std::atan2(P0.y(), P0.x());
    const double lr0 = std::log(P0.norm());
    const double arg_slope = L * P0.x() * T0.y() - L * P0.y() * T0.x();
    const double m_arg = arg_slope / P0.squaredNorm();
    const double m_lr = L * P0.dot(T0) / P0.squaredNorm();
    if (mirror && !(m_arg > 0.0 && m_arg < 3.0 * two_pi))
        throw DomainMismatch("profile end cannot be bridged with positive Jacobian");

    CurveEvaluator ev = [=](double theta) -> CurveJet {
        double t = std::fmod(theta, two_pi);
        if (t < 0.0) t += two_pi;
        if (t == 0.0) return {Vec2::Zero(), Vec2::Zero()};
        if (t <= tmax) return profile(t);
        if (mirror && t >= two_pi - tmax) {
            const CurveJet j = profile(two_pi - t);
            return {S * j.g, -S * j.dg};
        }
        const double u = (t - tmax) / L, u2 = u * u, u3 = u2 * u;
        if (mirror) {
            const double h10 = u3 - 2 * u2 + u, h11 = u3 - u2, h01 = -2 * u3 + 3 * u2;
            const double d10 = 3 * u2 - 4 * u + 1, d11 = 3 * u2 - 2 * u, d01 = -6 * u2 + 6 * u;
            const double a = arg0 + h01 * two_pi + (h10 + h11) * m_arg;
            const double da = (d01 * two_pi + (d10 + d11) * m_arg) / L;
            const double lr = lr0 + (h10 - h11) * m_lr;
            const double dlr = (d10 - d11) * m_lr / L;
            const double r = std::exp(lr);
            return {r * e_R(a), r * (dlr * e_R(a) + da * e_theta(a))};
        }
        const Vec2 g = (2 * u3 - 3 * u2 + 1) * P0 + (u3 - 2 * u2 + u) * L * T0 + (-2 * u3 + 3 * u2) * P1 +
                       (u3 - u2) * L * T1;
        const Vec2 dg = ((6 * u2 - 6 * u) * P0 + (3 * u2 - 4 * u + 1) * L * T0 + (-6 * u2 + 6 * u) * P1 +
                         (3 * u2 - 2 * u) * L * T1) /
                        L;
        return {g, dg};
    };
    return Curve::sample_exact(grid, std::move(ev), 0);
}

void write_spiral_csv(std::ostream& os, const SpiralSolution& sol) {
    os << "theta,j,w,r,d,gamma,V\n" << std::setprecision(17);
    for (size_t i = 0; i < sol.size(); ++i)
        os << sol.theta[i] << ',' << sol.j[i] << ',' << sol.w[i] << ',' << sol.r[i] << ',' << sol.d[i] << ','
           << sol.gamma[i] << ',' << sol.V[i] << '\n';
}

}  // namespace onehom
