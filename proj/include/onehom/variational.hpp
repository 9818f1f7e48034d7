#pragma once

#include "onehom/curve.hpp"
#include "onehom/energy.hpp"

#include <optional>
#include <string>
#include <vector>

namespace onehom {

struct InfeasibleSeed : Error {
    using Error::Error;
};
struct SupportViolation : Error {
    using Error::Error;
};

// Seed in the singular class: g0(t) = |t|^k e_R(psi(t)), psi(t) = a sign(t) |t|^l with
// a = min(1, delta^(1-l)), blended into e_R(t) by
//   eta(t) = S((2 delta - |t|) / delta),  S(x) = e^(-1/x) / (e^(-1/x) + e^(-1/(1-x))),
// with S = 0 for x <= 0 and S = 1 for x >= 1. Angles t are taken in (-pi, pi].
struct SeedParams {
    double s = 0.5;
    double eps = 0.25;
    double delta = 0.25;
    // Explicit exponents replace the eps formulas; validate() still checks the result.
    std::optional<double> k_exponent;
    std::optional<double> l_exponent;

    double k() const { return k_exponent.value_or(0.5 * (1.0 + eps)); }
    double l() const { return l_exponent.value_or(1.0 / s - (1.0 + 2.0 * eps)); }
    double phase_scale() const;
    // Throws InvalidArgument naming the violated constraint.
    void validate() const;
};

double seed_bump(double t, double delta);
double seed_bump_derivative(double t, double delta);
CurveJet seed_jet(const SeedParams& params, double theta);
Curve seed_curve(const SeedParams& params, const AngularGrid& grid);

struct MinimizeConfig {
    int max_iters = 100000;
    double gradient_tolerance = 1e-9;
    double backtrack = 0.5;
    int max_backtracks = 60;
    double armijo = 1e-4;
    int memory = 20;
    int pinned_index = 0;
    std::vector<int> schedule;  // grid sizes; empty means "the seed's grid only"
    void validate() const;
};

// Discretization of I used by the minimizer: panels [i, i+1] with midpoint values, chord
// derivatives and d = (g_i x g_{i+1}) / spacing. The two panels touching the pin keep their
// quadratic part; their h-part is replaced by a t^(-s/(s+1)) continuation of the next panel.
class DiscreteObjective {
public:
    DiscreteObjective(int n, const EnergyModel& model, int pinned_index);

    int size() const { return n_; }
    // Energy of the node array (2n values, x0 y0 x1 y1 ...); gradient w.r.t. all nodes with
    // the pinned entries zeroed. Returns +inf for infeasible configurations.
    double evaluate(const std::vector<double>& x, std::vector<double>* grad) const;
    double pin_factor() const { return pin_factor_; }

private:
    int n_;
    EnergyModel model_;
    int pin_;
    double h_;
    double pin_factor_;
};

struct TraceEntry {
    int grid = 0;
    int iter = 0;
    double energy = 0.0;
    double grad_norm = 0.0;
};

struct MinimizeResult {
    Curve curve;
    std::vector<TraceEntry> trace;
    std::vector<Curve> levels;  // final iterate of each grid level
    bool converged = false;
    bool stalled = false;
    std::string message;
};

// Cubic midpoint prolongation n -> 2n with (-1, 9, 9, -1)/16 weights. Midpoints whose
// adjacent half-panels would lose orientation fall back to the chord midpoint.
Curve prolong(const Curve& curve);

MinimizeResult minimize(const Curve& seed, const EnergyModel& model, const MinimizeConfig& cfg);

struct TestMode {
    std::string name;
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
};

struct TestFunctionBasis {
    std::vector<TestMode> modes;
    // {1, cos m t, sin m t : m = 1..M}
    static TestFunctionBasis fourier(int M = 8);
};

struct VectorTestFunction {
    double lo = 0.0;  // support [lo, hi] in centered angle
    double hi = 0.0;
    std::function<Vec2(double)> xi;
    std::function<Vec2(double)> dxi;
};

struct StationarityReport {
    std::vector<std::string> mode_names;
    std::vector<double> eqm_residuals;
    std::vector<double> ii_residuals;
    double dr_constant = 0.0;
    double dr_deviation = 0.0;
    std::vector<double> el1d_residuals;
    double energy = 0.0;
    int pin_window = 0;

    double max_eqm() const;
    double max_ii() const;
    double tolerance(double factor = 1e-3) const { return factor * (1.0 + energy); }
};

StationarityReport stationarity_residuals(const DerivedCurve& curve, const EnergyModel& model,
                                          const TestFunctionBasis& basis = TestFunctionBasis::fourier(),
                                          const QuadratureConfig& cfg = {},
                                          const std::vector<VectorTestFunction>& xi = {});

struct ZReport {
    int n_nodes = 0;
    int nodes_used = 0;
    double residual1 = 0.0;          // max |z' - g.g'|
    double residual2 = 0.0;          // max |z'' - (2z + |g|^2 + 2h)|
    double residual2_unit_h = 0.0;  // same with coefficient 1 on h
};

// Nodes with centered angle in [lo, hi] whose whole stencil has d > 0.
ZReport z_diagnostics(const DerivedCurve& curve, const EnergyModel& model, double lo = -10.0,
                      double hi = 10.0);

std::vector<double> el1d_residual(const DerivedCurve& curve, const EnergyModel& model,
                                  const std::vector<VectorTestFunction>& xi, double r_min = 1e-12);
// g - h'(d) J g' - (g' + h'(d) J g)' per node; NaN where the stencil meets d <= 0.
std::vector<Vec2> el1d_strong(const DerivedCurve& curve, const EnergyModel& model);

struct ZeroReport {
    std::vector<int> zeros;
    double min_d = 0.0;
    int min_d_index = -1;
    double min_abs_g = 0.0;
    int min_abs_g_index = -1;
    bool lipschitz_candidate = false;
    std::string verdict() const { return lipschitz_candidate ? "Lipschitz candidate" : "singular"; }
};

ZeroReport classify_zeros(const Curve& curve, double threshold = 1e-12);

}  // namespace onehom
