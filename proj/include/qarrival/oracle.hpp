#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "qarrival/capscatter.hpp"

namespace qarrival::oracle {

using cplx = std::complex<double>;

// uniform spatial grid for the implicit propagator; the defaults are the
// certification configuration (exact analytic boundary values, no pads)
struct GridSpec {
    double x_min = -1.0;
    double x_max = 0.5;
    int points = 156001;
    double dt = 5e-9;
    double pad = 0.0;            // absorbing-pad width at each end
    double pad_strength = 4.5e4; // peak |Im| of the quadratic pad ramp
    double p_hi = 1000.0;        // fastest momentum the grid must resolve

    void validate() const;  // throws ValidationError
    double dx() const { return (x_max - x_min) / (points - 1); }
    std::vector<double> x() const;
};

struct Checkpoint {
    double t = 0.0;             // snapped to an integer number of steps
    std::vector<cplx> psi;      // all grid points, boundaries included
    double norm = 0.0;          // M-weighted discrete norm
    double dndt_grid = 0.0;     // centered difference of the norm across one step
    double rate_cap = 0.0;      // (2/hbar) sum |Im V_j| int_layer |psi|^2
    double rate_pad = 0.0;      // same for the boundary pads
};

struct OracleRun {
    GridSpec grid;
    std::vector<Checkpoint> checkpoints;
    double initial_pad_amplitude = 0.0;  // max |psi(x,0)| inside the pads
    double pad_absorbed = 0.0;           // cumulative norm removed by the pads
};

// Crank-Nicolson stepping of i hbar psi_t = -(hbar^2/2m) psi_xx + V psi with
// Numerov fourth-order spatial weighting.  Walls are Dirichlet (behind the
// pads, if any); alternatively `boundary(x_wall, t)` prescribes exact
// time-dependent wall values, which removes domain-truncation error when the
// far-field solution is known analytically.  Pads and `boundary` are mutually
// exclusive.  `times` must be nondecreasing; each is snapped to the nearest
// step.
OracleRun propagate(const GridSpec& grid, const LayeredPotential& pot,
                    const std::function<cplx(double)>& initial,
                    const std::vector<double>& times, Units units = {},
                    bool renormalize = false,
                    const std::function<cplx(double, double)>& boundary = {});

// one line per grid point: "x Re(psi) Im(psi)" at 17 significant digits
void save_checkpoint(const std::string& path, const std::vector<double>& x,
                     const std::vector<cplx>& psi);

}  // namespace qarrival::oracle
