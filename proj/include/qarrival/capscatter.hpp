#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "qarrival/quadrature.hpp"
#include "qarrival/wavepacket.hpp"

namespace qarrival {

using cplx = std::complex<double>;

// N equal-width complex square barriers on [0, L]; zero outside.
struct LayeredPotential {
    double L = 0.0;
    std::vector<cplx> V;

    int N() const { return static_cast<int>(V.size()); }
    double layer_width() const { return L / static_cast<double>(V.size()); }
    cplx at(double x) const;

    // Im V_j <= 0 required everywhere (absorption only); strict < 0 when
    // strict_absorbing is set (the design-result invariant).
    void validate(bool strict_absorbing = false) const;

    // plain-text interchange format: "L <value>\nN <count>\n" then one
    // "Re(V_j) Im(V_j)" line per layer, 17 significant digits
    void save(const std::string& path) const;
    static LayeredPotential load(const std::string& path);
};

// 2x2 transfer matrix acting on (psi, psi') column vectors, row-major.
using Mat2 = std::array<cplx, 4>;

Mat2 mat2_mul(const Mat2& a, const Mat2& b);

// Propagator across a uniform slab of width d with q = k^2 = 2m(E-V)/hbar^2:
//   [cos(kd), sin(kd)/k; -q sin(kd)/k, cos(kd)]
// Entries are even in k, so the branch of k is immaterial.
Mat2 layer_matrix(cplx q, double d);
// d/dq of layer_matrix at fixed d
Mat2 layer_matrix_dq(cplx q, double d);

struct ScatterSolution {
    double p = 0.0;
    cplx R, T;
    double survival = 0.0;    // |T|^2 + |R|^2
    double absorption = 0.0;  // 1 - |T|^2 - |R|^2
    double L = 0.0;
    std::vector<cplx> k;       // layer wavenumbers, principal branch
    std::vector<cplx> A, B;    // layer coefficients in local coordinates
    std::vector<cplx> psi_if;  // psi at layer left edges and at x = L (N+1 values)
    std::vector<cplx> dpsi_if;
};

// Stationary scattering solution for unit incidence from the left.
ScatterSolution solve_scatter(const LayeredPotential& pot, double p, Units units = {});

// <x|p+> without the 1/sqrt(2 pi hbar) factor: piecewise plane-wave evaluation.
cplx eigenfunction(const ScatterSolution& sol, double x, Units units = {});

// Wave-packet evolution under the CAP via momentum quadrature of the
// scattering eigenstates.  Precomputes per-node solutions once.
class CapEvolution {
  public:
    CapEvolution(LayeredPotential pot, WavePacket packet, double conv_tol = 1e-8,
                 int max_nodes = 1 << 14, Units units = {});

    const LayeredPotential& potential() const { return pot_; }
    const WavePacket& packet() const { return packet_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }

    cplx psi(double x, double t) const;
    cplx psi_dx(double x, double t) const;
    // per-node eigenfunction samples at a fixed x, for cheap repeated-t psi
    std::vector<cplx> eigen_samples(double x) const;
    cplx psi_from_samples(const std::vector<cplx>& samples, double t) const;
    double density(double x, double t) const { return std::norm(psi(x, t)); }
    double flux(double x, double t) const;

    struct Norms {
        double N = 0.0, N_minus = 0.0, N_plus = 0.0;
    };
    // x_lo: left truncation of the numerically resolved window; the omitted
    // tail is bounded by the free-packet envelope
    Norms norms(double t, double x_lo = -30.0) const;

    double norm_in_detector(double t) const;  // int_0^L |psi|^2 dx
    // -dN/dt via (2/hbar) sum_j |Im V_j| int_layer |psi|^2 dx (exact identity)
    double absorption_rate(double t) const;
    // cross-check: central finite difference of norms().N
    double absorption_rate_fd(double t, double x_lo = -30.0, double h = 1e-7) const;

    double dwell_time(double t_max = 5e-3, double tol = 1e-9) const;
    // 1 - N(inf) computed in momentum space: int |<p|psi'(0)>|^2 A(p) dp
    double total_absorption_momentum() const;

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    const ScatterSolution& solution(int i) const { return sols_[i]; }

  private:
    void build(int n);
    std::vector<cplx> coeffs(double t) const;  // w_k <p_k|psi'(0)> e^{-i p_k^2 t/2m hbar}/sqrt(2 pi hbar)

    LayeredPotential pot_;
    WavePacket packet_;
    Units units_;
    double p_lo_ = 0.0, p_hi_ = 0.0;
    std::vector<double> nodes_, weights_;
    std::vector<ScatterSolution> sols_;
    // eigenfunction table on the in-detector Gauss-Legendre grid
    std::vector<double> xdet_, wdet_, imv_at_xdet_;
    std::vector<std::vector<cplx>> eig_table_;  // [node][det point]
};

}  // namespace qarrival
