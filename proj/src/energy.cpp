#include "onehom/energy.hpp"

#include "onehom/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace onehom {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

EnergyModel::EnergyModel(double s) : s_(s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("energy exponent s must be positive");
}

HValues h_family(double t, const EnergyModel& model) {
    const double s = model.s();
    HValues v;
    if (!(t > 0.0)) {
        v.h = kInf;
        v.dh = -kInf;
        v.d2h = kInf;
        v.f = -kInf;
        v.feasible = false;
        return v;
    }
    const double ts = std::pow(t, -s);
    v.h = ts;
    v.dh = -s * ts / t;
    v.d2h = s * (s + 1.0) * ts / (t * t);
    v.f = -(s + 1.0) * ts;
    return v;
}

double stored_energy(const Mat2& F, const EnergyModel& model) {
    const HValues hv = h_family(F.determinant(), model);
    if (!hv.feasible) return kInf;
    return 0.5 * F.squaredNorm() + hv.h;
}

Mat2 dw(const Vec2& g, const Vec2& dg, double theta, const EnergyModel& model) {
    const double d = jacobian(g, dg);
    if (!(d > 0.0)) throw NonpositiveJacobian("DW requires Jg.g' > 0");
    const double dh = h_family(d, model).dh;
    const Vec2 er = e_R(theta), et = e_theta(theta);
    return g * er.transpose() + dg * et.transpose() +
           dh * (quarter_turn(g) * et.transpose() - quarter_turn(dg) * er.transpose());
}

Mat2 dw_matrix(const Mat2& F, const EnergyModel& model) {
    const double det = F.determinant();
    if (!(det > 0.0)) throw NonpositiveJacobian("DW requires det F > 0");
    return F + h_family(det, model).dh * cofactor(F);
}

Mat2 energy_momentum(const Vec2& g, const Vec2& dg, double theta, const EnergyModel& model) {
    const Mat2 F = one_homogeneous_gradient(g, dg, theta);
    const Mat2 D = dw(g, dg, theta, model);
    return F.transpose() * D - stored_energy(F, model) * Mat2::Identity();
}

MomentumContractions momentum_closed_form(const Vec2& g, const Vec2& dg, double theta,
                                          const EnergyModel& model) {
    const double d = jacobian(g, dg);
    if (!(d > 0.0)) throw NonpositiveJacobian("M requires Jg.g' > 0");
    const double f = h_family(d, model).f;
    const Vec2 er = e_R(theta), et = e_theta(theta);
    const double g2 = g.squaredNorm(), dg2 = dg.squaredNorm(), gg = g.dot(dg);
    MomentumContractions m;
    m.m_er = 0.5 * g2 * er + gg * et + (f - 0.5 * dg2) * er;
    m.m_etheta = 0.5 * dg2 * et + gg * er + (f - 0.5 * g2) * et;
    return m;
}

PointState point_state(const Vec2& g, const Vec2& dg, double theta, const EnergyModel& model) {
    PointState p;
    p.theta = theta;
    p.d = jacobian(g, dg);
    const HValues hv = h_family(p.d, model);
    p.g2 = g.squaredNorm();
    p.gg = g.dot(dg);
    p.h = hv.h;
    p.dr = hv.feasible ? hv.f + 0.5 * dg.squaredNorm() - 0.5 * p.g2
                       : std::numeric_limits<double>::quiet_NaN();
    p.has_vectors = true;
    p.g = g;
    p.dg = dg;
    return p;
}

AngularRule::AngularRule(const DerivedCurve& curve, const EnergyModel& model, QuadratureConfig cfg)
    : curve_(&curve), model_(model), cfg_(cfg), pin_(curve.curve.pinned_index()) {
    if (cfg_.pin_window < 0) throw InvalidArgument("pin_window must be nonnegative");
    const auto& grid = curve.curve.grid();
    exact_ = pin_ && cfg_.prefer_exact && curve.curve.has_exact();
    k_ = pin_ ? (exact_ ? 0 : cfg_.pin_window) : 0;
    if (pin_ && 2 * (k_ + 1) >= grid.size()) throw InvalidArgument("pin window covers the circle");
    if (!(cfg_.exact_span >= 0.0)) throw InvalidArgument("exact_span must be nonnegative");
    kg_ = k_;
    if (exact_) {
        const long span = std::lround(cfg_.exact_span / grid.spacing() - 0.5);
        kg_ = static_cast<int>(std::clamp<long>(span, k_, grid.size() / 4));
    }
    nodes_.reserve(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i)
        nodes_.push_back(point_state(curve.g(i), curve.dg[static_cast<size_t>(i)], grid.centered(i), model_));
}

double AngularRule::window_half_width() const {
    return pin_ ? (k_ + 0.5) * curve_->curve.grid().spacing() : 0.0;
}

double AngularRule::graded_half_width() const {
    return pin_ ? (kg_ + 0.5) * curve_->curve.grid().spacing() : 0.0;
}

int AngularRule::pin_offset(int i) const {
    const int n = curve_->size();
    const int off = std::abs(curve_->curve.grid().wrap(i) - *pin_);
    return std::min(off, n - off);
}

bool AngularRule::node_in_window(int i) const {
    return pin_ && pin_offset(i) <= k_;
}

PointState AngularRule::window_state(int side, double t) const {
    const auto& grid = curve_->curve.grid();
    const double theta = grid.centered(*pin_) + side * t;
    if (exact_) {
        const CurveJet jet = curve_->curve.exact()(theta);
        return point_state(jet.g, jet.dg, theta, model_);
    }
    const PointState& base = nodes_[static_cast<size_t>(grid.wrap(*pin_ + side * (k_ + 1)))];
    const double ratio = t / ((k_ + 1) * grid.spacing());
    PointState p = base;
    p.theta = theta;
    p.h = base.h * std::pow(ratio, -model_.pin_exponent());
    p.d = base.d * std::pow(ratio, 1.0 / (model_.s() + 1.0));
    p.has_vectors = false;
    return p;
}

double AngularRule::sum_nodes(const Integrand& f, int half_width) const {
    const double h = curve_->curve.grid().spacing();
    std::vector<double> parts;
    parts.reserve(nodes_.size());
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
        if (pin_ && pin_offset(i) <= half_width) continue;
        parts.push_back(h * f(nodes_[static_cast<size_t>(i)]));
    }
    return pairwise_sum(parts);
}

double AngularRule::integrate_nodes(const Integrand& f) const { return sum_nodes(f, k_); }

double AngularRule::integrate(const Integrand& f) const {
    double total = sum_nodes(f, kg_);
    if (!pin_) return total;
    const double a = graded_half_width();
    // keep the innermost panel at least as fine as for the half-cell window
    const int levels = cfg_.graded_levels + static_cast<int>(std::ceil(std::log2((kg_ + 0.5) / (k_ + 0.5))));
    for (int side : {1, -1}) {
        total += graded_integral([&](double t) { return f(window_state(side, t)); }, a, levels, cfg_.gauss_points,
                                 curve_->curve.grid().spacing())
                     .value;
    }
    return total;
}

EnergyBreakdown energy_I(const DerivedCurve& curve, const EnergyModel& model,
                         const QuadratureConfig& cfg) {
    const AngularRule rule(curve, model, cfg);
    EnergyBreakdown e;
    const auto pin = curve.curve.pinned_index();
    bool feasible = true;
    for (int i = 0; i < curve.size(); ++i) {
        if (pin && *pin == i) continue;
        if (!(curve.jac[static_cast<size_t>(i)] > 0.0)) feasible = false;
    }
    if (!feasible) {
        e.quadratic = rule.integrate_nodes(
            [](const PointState& p) { return 0.5 * (p.g2 + p.dg.squaredNorm()); });
        e.singular = kInf;
        e.total = kInf;
        return e;
    }
    const double s = model.s();
    e.quadratic = rule.integrate([s](const PointState& p) {
        if (p.has_vectors) return 0.5 * (p.g2 + p.dg.squaredNorm());
        return p.dr + p.g2 + (s + 1.0) * p.h;
    });
    e.singular = rule.integrate([](const PointState& p) { return p.h; });
    e.total = e.quadratic + e.singular;
    return e;
}

}  // namespace onehom
