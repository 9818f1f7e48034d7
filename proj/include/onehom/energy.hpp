#pragma once

#include "onehom/curve.hpp"

#include <functional>
#include <limits>

namespace onehom {

struct NonpositiveJacobian : Error {
    using Error::Error;
};

class EnergyModel {
public:
    explicit EnergyModel(double s);
    double s() const { return s_; }
    // Decay exponent of h(d) toward an isolated zero of g: h ~ t^(-s/(s+1)).
    double pin_exponent() const { return s_ / (s_ + 1.0); }

private:
    double s_;
};

struct HValues {
    double h = 0.0;
    double dh = 0.0;
    double d2h = 0.0;
    double f = 0.0;  // t h'(t) - h(t)
    bool feasible = true;
};

// h(t) = t^-s for t > 0, +inf (infeasible) otherwise.
HValues h_family(double t, const EnergyModel& model);

double stored_energy(const Mat2& F, const EnergyModel& model);

inline Mat2 cofactor(const Mat2& F) {
    Mat2 c;
    c << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
    return c;
}

// DW at the one-homogeneous gradient, tensor form.
Mat2 dw(const Vec2& g, const Vec2& dg, double theta, const EnergyModel& model);
// DW(F) = F + h'(det F) cof F.
Mat2 dw_matrix(const Mat2& F, const EnergyModel& model);

// M = F^T DW - W Id.
Mat2 energy_momentum(const Vec2& g, const Vec2& dg, double theta, const EnergyModel& model);

struct MomentumContractions {
    Vec2 m_er;      // M e_R
    Vec2 m_etheta;  // M e_theta
};
// Closed forms for M e_R and M e_theta in terms of g, g', f(d).
MomentumContractions momentum_closed_form(const Vec2& g, const Vec2& dg, double theta,
                                          const EnergyModel& model);

struct EnergyBreakdown {
    double total = 0.0;
    double quadratic = 0.0;
    double singular = 0.0;
    bool finite() const { return std::isfinite(total); }
};

struct QuadratureConfig {
    // Nodes on each side of the pin left out of the node sum when no exact evaluator exists.
    int pin_window = 3;
    int graded_levels = 16;
    // With an exact evaluator, integrate() grades over this angular half-width around the pin.
    double exact_span = 0.05;
    int gauss_points = 4;
    bool prefer_exact = true;
};

// Local scalars of a curve at one angle. `dr` is f(d) + |g'|^2/2 - |g|^2/2, `gg` is g.g'.
// Every weak integrand in the library is a combination of these, h(d), and the angle.
struct PointState {
    double theta = 0.0;  // in (-pi, pi] for nodes, pin angle +/- t inside the window
    double d = 0.0;
    double dr = 0.0;
    double g2 = 0.0;
    double gg = 0.0;
    double h = 0.0;
    bool has_vectors = false;
    Vec2 g = Vec2::Zero();
    Vec2 dg = Vec2::Zero();
};

PointState point_state(const Vec2& g, const Vec2& dg, double theta, const EnergyModel& model);

// Periodic angular quadrature. Without a pin it is the trapezoid rule. With a pin p, nodes
// with |i - p| <= K are dropped and the window of half-width (K + 1/2) spacing on either
// side is integrated by the graded rule. Inside the window the integrand sees either exact
// states (curve evaluator, K = 0) or a model: dr, g2, gg frozen at node p +/- (K+1) and
// h(d) continued as a power law with the pin exponent.
class AngularRule {
public:
    AngularRule(const DerivedCurve& curve, const EnergyModel& model, QuadratureConfig cfg = {});

    using Integrand = std::function<double(const PointState&)>;
    double integrate(const Integrand& f) const;
    // Node sum over nodes outside the window only (no window contribution).
    double integrate_nodes(const Integrand& f) const;

    bool pinned() const { return pin_.has_value(); }
    bool exact_window() const { return exact_; }
    int excluded_half_width() const { return k_; }
    double window_half_width() const;
    // Half-width of the region handled by the graded rule in integrate().
    double graded_half_width() const;
    const std::vector<PointState>& node_states() const { return nodes_; }
    bool node_in_window(int i) const;

private:
    PointState window_state(int side, double t) const;
    int pin_offset(int i) const;
    double sum_nodes(const Integrand& f, int half_width) const;

    const DerivedCurve* curve_;
    EnergyModel model_;
    QuadratureConfig cfg_;
    std::optional<int> pin_;
    bool exact_ = false;
    int k_ = 0;
    int kg_ = 0;
    std::vector<PointState> nodes_;
};

EnergyBreakdown energy_I(const DerivedCurve& curve, const EnergyModel& model,
                         const QuadratureConfig& cfg = {});

}  // namespace onehom
