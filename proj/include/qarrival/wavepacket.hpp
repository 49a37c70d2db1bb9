#pragma once

#include <complex>
#include <string>
#include <vector>

namespace qarrival {

// Atomic units throughout the shipped configurations.
struct Units {
    double hbar = 1.0;
    double mass = 1.0;
};

// Parameters of the analytic packet
//   <p|psi(0)> = C (1-e^{-alpha p^2/hbar^2}) e^{-delta^2(p-p0)^2/hbar^2 - i p x0/hbar} Theta(p)
// plus the boost momentum b applied at t=0: <p|psi'(0)> = <p-b|psi(0)>.
struct PacketParams {
    double alpha = 1.4;    // length^2
    double delta = 0.007;  // length
    double p0 = 1.0;       // momentum
    double x0 = -0.22;     // length
    double b = 300.0;      // boost momentum

    void validate() const;                   // throws ValidationError on hard violations
    std::vector<std::string> warnings() const;  // soft advisories (e.g. x0 not << -delta)
};

class WavePacket {
  public:
    explicit WavePacket(PacketParams params, Units units = {});

    const PacketParams& params() const { return params_; }
    const Units& units() const { return units_; }

    // numerically determined normalization constant C
    double norm_constant() const { return C_; }
    // closed-form expression for C-prime, recorded as a cross-check only
    double closed_form_cprime() const;
    // C' derived from the numerical C
    double cprime() const { return Cp_; }
    // integral of the momentum density with the stored C (== 1 by construction)
    double momentum_norm() const;

    // boosted momentum amplitude; exactly 0 for p <= b
    std::complex<double> momentum_amplitude(double p) const;

    // boosted position amplitude via the analytic w-function form
    std::complex<double> position_amplitude(double x, double t) const;
    std::complex<double> position_amplitude_dx(double x, double t) const;
    double density(double x, double t) const;

    // probability current J(x,t) of the boosted packet, closed form
    double flux(double x, double t) const;

    // |J_{psi'}(0,t) - J_psi(-bt/m,t) - (b/m)|psi(-bt/m,t)|^2|
    double boost_flux_residual(double t) const;

    // momentum interval outside of which the boosted density is < tail_tol of peak
    std::pair<double, double> momentum_support(double tail_tol = 1e-12) const;

  private:
    std::complex<double> amp0(double x, double t) const;     // unboosted packet
    std::complex<double> damp0(double x, double t) const;    // d/dx of amp0
    double flux0(double x, double t) const;                  // unboosted current

    PacketParams params_;
    Units units_;
    double C_ = 0.0;
    double Cp_ = 0.0;  // C' = C sqrt(hbar/2) e^{-k0^2 delta^2} / 2
};

}  // namespace qarrival
