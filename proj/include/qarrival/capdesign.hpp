#pragma once

#include <cstdint>
#include <vector>

#include "qarrival/capscatter.hpp"

namespace qarrival::capdesign {

struct DesignSpec {
    double L = 0.01;
    int N = 4;
    double p1 = 260.0, p2 = 740.0;  // absorption band
    int s = 49;                     // evenly spaced training momenta
    int max_restarts = 24;
    double tolerance = 1e-3;  // target max survival on the check grid

    void validate() const;
    std::vector<double> training_grid() const;  // s points, evenly spaced
    std::vector<double> check_grid() const;     // 10x finer
};

struct DesignResult {
    LayeredPotential potential;
    double f = 0.0;                   // sum of survivals on the training grid
    double max_check_survival = 0.0;  // max survival on the check grid
    int restarts_run = 0;
    int best_restart = -1;
    std::uint64_t seed = 0;
    bool target_reached = false;
};

// f = sum over the training grid of survival |T|^2 + |R|^2
double objective(const LayeredPotential& pot, const DesignSpec& spec);

// per layer: re = df/dRe(V_j), im = df/dIm(V_j), via analytic transfer-matrix
// differentiation
std::vector<cplx> gradient(const LayeredPotential& pot, const DesignSpec& spec);

// survival at a single momentum plus its complex sensitivity
// X_j = conj(T) dT/dV_j + conj(R) dR/dV_j  (so dS/dReV = 2 Re X, dS/dImV = -2 Im X)
double survival_with_grad(const LayeredPotential& pot, double p, std::vector<cplx>& X);

// deterministic multi-start quasi-Newton minimization with Im V_j = -exp(u_j);
// a second polishing stage flattens the band maximum.  Throws ConvergenceError
// if no restart reaches the tolerance.
DesignResult optimize(const DesignSpec& spec, std::uint64_t seed);

}  // namespace qarrival::capdesign
