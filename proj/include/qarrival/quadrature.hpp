#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace qarrival::quadrature {

// Gauss-Legendre rule on [-1, 1], n nodes.  Nodes ascending.
struct GLRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GLRule& gauss_legendre(int n);  // cached, thread-safe after first call

// Composite rule: `panels` equal Gauss-Legendre panels of `n` nodes each on [a, b].
struct PanelRule {
    std::vector<double> nodes;    // ascending
    std::vector<double> weights;  // positive
};

PanelRule panel_rule(double a, double b, int nodes_per_panel, int panels);

// Integrate f over [a, b] with node doubling until two successive rules agree
// to `tol` (absolute, or relative to the larger magnitude when that exceeds 1).
// Throws ConvergenceError when max_nodes is exceeded.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_nodes = 1 << 14);
std::complex<double> integrate_c(const std::function<std::complex<double>(double)>& f,
                                 double a, double b, double tol, int max_nodes = 1 << 14);

}  // namespace qarrival::quadrature
