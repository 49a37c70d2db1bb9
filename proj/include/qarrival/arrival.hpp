#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qarrival/wavepacket.hpp"

namespace qarrival::arrival {

// sampled t-grid with named real-valued columns
struct TimeSeries {
    std::vector<double> t;
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;

    void add_channel(const std::string& name, std::vector<double> data);
    const std::vector<double>& channel(const std::string& name) const;
    bool has_channel(const std::string& name) const;
    void validate() const;  // t strictly increasing, equal lengths
};

struct BackflowInterval {
    double t_start = 0.0, t_end = 0.0;
    double magnitude = 0.0;  // int (-J) dt over the interval, > 0
};

struct BackflowReport {
    std::vector<BackflowInterval> intervals;  // disjoint, ordered
    double total = 0.0;
};

// Kijowski's arrival-time distribution at x = 0:
//   |(1/sqrt(m h)) int_0^inf sqrt(p) e^{-i p^2 t/(2 m hbar)} <p|psi'(0)> dp|^2
double kijowski(const WavePacket& wp, double t, double tol = 1e-8, int max_nodes = 1 << 14);

// generalized to arrival point x (insert e^{i p x / hbar}); used to probe the
// non-covariance of the transform under a boost
double kijowski_at(const WavePacket& wp, double x, double t, double tol = 1e-8,
                   int max_nodes = 1 << 14);

// int_0^{t_max} |J(0,t)| dt  =  int J dt + 2 * total backflow
double bohm_denominator(const WavePacket& wp, double t_max = 0.05);

// Pi_B(t) = |J(0,t)| / denom
double bohm_distribution(const WavePacket& wp, double t, double denom);

// flux-sign analysis on the grid with bisection refinement to 1e-12 in t
BackflowReport backflow_report(const WavePacket& wp, const std::vector<double>& t_grid);

// x such that int_x^inf |psi(x,0)|^2 dx = q (Born quantile of the initial density)
double quantile_start(const WavePacket& wp, double q);

// dx/dt = J(x,t)/|psi|^2, adaptive RK with local tolerance `tol`; returns the
// accepted (t, x) samples.  Throws ConvergenceError if the trajectory enters a
// region of vanishing density.
std::vector<std::pair<double, double>> bohm_trajectory(const WavePacket& wp, double x_start,
                                                       std::pair<double, double> t_span,
                                                       double tol = 1e-10);

// (mean, normalization) of a sampled channel by trapezoidal quadrature;
// signed_channel permits negative values (J changes sign under backflow)
std::pair<double, double> distribution_moments(const TimeSeries& series,
                                               const std::string& channel,
                                               bool signed_channel = false);

}  // namespace qarrival::arrival
