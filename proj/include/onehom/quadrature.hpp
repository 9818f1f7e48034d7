#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace onehom {

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Gauss-Legendre rule with n points, nodes by Newton iteration on P_n.
const GaussRule& gauss_legendre(int n);

// Fixed-order pairwise summation (reproducible, O(eps log n) error).
double pairwise_sum(std::span<const double> v);

struct GradedResult {
    double value = 0.0;
    double tail = 0.0;
    double tail_exponent = 0.0;
    bool tail_divergent = false;
};

// Integral of f over (0, a] for f with an integrable power-law singularity at 0.
// Dyadic levels [a 2^-(k+1), a 2^-k], k < levels, each with a Gauss-Legendre rule in ln t,
// then an analytic tail U (t/eps)^-q on (0, eps] with q read off f(eps) and f(eps/2).
// Levels wider than max_panel are split into equal pieces in ln t.
GradedResult graded_integral(const std::function<double(double)>& f, double a, int levels = 16,
                             int points = 4, double max_panel = std::numeric_limits<double>::infinity());

}  // namespace onehom
