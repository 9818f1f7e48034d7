#pragma once

#include "onehom/curve.hpp"

#include <string>
#include <vector>

namespace onehom {

struct NonpositiveV : Error {
    using Error::Error;
};
struct NewtonFailure : Error {
    using Error::Error;
};
struct NonpositiveF2 : Error {
    using Error::Error;
};
struct WindowTooSmall : Error {
    using Error::Error;
};
struct DomainMismatch : Error {
    using Error::Error;
};

struct ProfileParams {
    double s = 0.5;
    double c = -1.5;
    double tau = 0.0;
    double theta_min = 1e-12;
    double theta_max = 0.1;
    int nodes = 2000;
    // RK4 starts from theta = 0 and runs through this many extra decades below theta_min.
    int pre_decades = 6;

    double beta() const;
    double n_of_s() const;
    // Grid ratio implied by nodes and theta_min / theta_max.
    double grid_ratio() const;
    void validate() const;
    static ProfileParams defaults(double s);
};

struct SpiralSolution {
    ProfileParams params;
    std::vector<double> theta;  // increasing, theta_min .. theta_max
    std::vector<double> j;
    std::vector<double> w;      // 1/j
    std::vector<double> r;
    std::vector<double> rprime;
    std::vector<double> d;
    std::vector<double> gamma;  // gamma(theta_max) = 0
    std::vector<double> V;      // NaN where V^2 < 0
    std::vector<double> F2;

    size_t size() const { return theta.size(); }
    double beta() const { return params.beta(); }
    double n_of_s() const { return params.n_of_s(); }
};

// d from d^-s = (tau + d) j / s.
double solve_d_implicit(double j, double s, double tau);

SpiralSolution solve_tau_zero(const ProfileParams& params);
SpiralSolution solve_tau_positive(const ProfileParams& params);
SpiralSolution solve_profile(const ProfileParams& params);

// Right-hand side factor Y of j' + Y j^(2+1/(2s)) = 0 on the tau > 0 branch, given j.
double y_factor(double j, double s, double c, double tau);

struct ResidualEntry {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass() const { return std::isfinite(value) && value <= tolerance; }
};

struct ResidualReport {
    std::vector<ResidualEntry> entries;
    bool all_pass() const;
    const ResidualEntry* find(const std::string& name) const;
};

struct ProfileResiduals {
    std::vector<double> theta;
    std::vector<double> eq1;  // normalized pointwise residuals
    std::vector<double> eq2;
    std::vector<double> conservation;
    double max_eq1 = 0.0;
    double max_eq2 = 0.0;
    double max_conservation = 0.0;
};

// Pointwise profile-equation residuals on nodes with theta in [lo, hi] (graded-grid FD).
ProfileResiduals profile_residuals(const SpiralSolution& sol, double lo = 0.0, double hi = 1e300);
ResidualReport verify_profile(const SpiralSolution& sol, double tolerance = 1e-3);

// Conservation residual max |s r^2 - tau d^(s+1) - d^(s+2)| / (s r^2) for raw profile arrays.
double conservation_residual(const std::vector<double>& r, const std::vector<double>& d, double s,
                             double tau);

enum class FitQuantity { j, r, gamma, dw_er };

struct FitResult {
    std::string quantity;
    double exponent = 0.0;
    double prefactor = 0.0;
    double theta_lo = 0.0;
    double theta_hi = 0.0;
    int nodes = 0;
    double residual = 0.0;  // rms of the fit
};

FitResult fit_asymptotics(const SpiralSolution& sol, FitQuantity q, double theta_lo, double theta_hi);
// |DW e_R| = |r (1 - j^2) e_R + r' j e_theta|
std::vector<double> dw_er_magnitude(const SpiralSolution& sol);

struct EnergyWindow {
    double closed_form = 0.0;
    double direct = 0.0;
    double tau_j_share = 0.0;  // share of the tau~ j term in the closed form
};

EnergyWindow energy_window(const SpiralSolution& sol, double theta_lo, double theta_hi);

struct EmbedOptions {
    // Reflect the profile to negative angles with diag(1,-1); otherwise only the subarc is set.
    bool mirror = true;
};

// Samples g = r e_R(gamma) on the grid (monotone cubic in ln theta), pin at node 0, closes the
// curve with a Hermite bridge (in polar form when mirrored) and attaches an exact evaluator.
Curve to_curve(const SpiralSolution& sol, const AngularGrid& grid, const EmbedOptions& opts = {});

void write_spiral_csv(std::ostream& os, const SpiralSolution& sol);

}  // namespace onehom
