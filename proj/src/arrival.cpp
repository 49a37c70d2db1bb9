#include "qarrival/arrival.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "qarrival/errors.hpp"
#include "qarrival/quadrature.hpp"

namespace qarrival::arrival {

using cplx = std::complex<double>;

void TimeSeries::add_channel(const std::string& name, std::vector<double> data) {
    if (data.size() != t.size())
        throw ValidationError("TimeSeries: channel '" + name + "' length mismatch");
    names.push_back(name);
    cols.push_back(std::move(data));
}

const std::vector<double>& TimeSeries::channel(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return cols[i];
    throw ValidationError("TimeSeries: no channel '" + name + "'");
}

bool TimeSeries::has_channel(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

void TimeSeries::validate() const {
    for (size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw ValidationError("TimeSeries: t grid not strictly increasing");
    for (const auto& c : cols)
        if (c.size() != t.size()) throw ValidationError("TimeSeries: ragged channels");
}

double kijowski_at(const WavePacket& wp, double x, double t, double tol, int max_nodes) {
    const double hbar = wp.units().hbar, m = wp.units().mass;
    auto [plo, phi] = wp.momentum_support(1e-26);
    const cplx amp = quadrature::integrate_c(
        [&](double p) -> cplx {
            const double phase = (p * x - p * p * t / (2.0 * m)) / hbar;
            return std::sqrt(p) * wp.momentum_amplitude(p) *
                   cplx(std::cos(phase), std::sin(phase));
        },
        plo, phi, tol, max_nodes);
    const double h = 2.0 * M_PI * hbar;
    return std::norm(amp) / (m * h);
}

double kijowski(const WavePacket& wp, double t, double tol, int max_nodes) {
    return kijowski_at(wp, 0.0, t, tol, max_nodes);
}

BackflowReport backflow_report(const WavePacket& wp, const std::vector<double>& t_grid) {
    BackflowReport rep;
    if (t_grid.size() < 2) return rep;
    auto J = [&](double t) { return wp.flux(0.0, t); };

    // bisection to 1e-12 in t on a sign-change bracket
    auto refine = [&](double a, double b) {
        double fa = J(a);
        for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = J(mid);
            if ((fa < 0.0) == (fm < 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        return 0.5 * (a + b);
    };

    double prev_t = t_grid[0];
    double prev_J = J(prev_t);
    bool inside = prev_J < 0.0;
    double start = inside ? prev_t : 0.0;
    for (size_t i = 1; i < t_grid.size(); ++i) {
        const double cur_t = t_grid[i];
        const double cur_J = J(cur_t);
        if (!inside && cur_J < 0.0) {
            start = refine(prev_t, cur_t);
            inside = true;
        } else if (inside && cur_J >= 0.0) {
            const double end = refine(prev_t, cur_t);
            BackflowInterval iv;
            iv.t_start = start;
            iv.t_end = end;
            iv.magnitude = quadrature::integrate([&](double t) { return -J(t); }, start, end,
                                                 1e-12, 1 << 14);
            rep.intervals.push_back(iv);
            rep.total += iv.magnitude;
            inside = false;
        }
        prev_t = cur_t;
        prev_J = cur_J;
    }
    if (inside) {
        BackflowInterval iv;
        iv.t_start = start;
        iv.t_end = t_grid.back();
        iv.magnitude = quadrature::integrate([&](double t) { return -J(t); }, start,
                                             iv.t_end, 1e-12, 1 << 14);
        rep.intervals.push_back(iv);
        rep.total += iv.magnitude;
    }
    return rep;
}

double bohm_denominator(const WavePacket& wp, double t_max) {
    const double net = quadrature::integrate([&](double t) { return wp.flux(0.0, t); }, 0.0,
                                             t_max, 1e-9, 1 << 16);
    // |J| = J + 2 (-J)^+ ; locate the negative intervals on a fine scan grid
    std::vector<double> grid(4001);
    for (size_t i = 0; i < grid.size(); ++i)
        grid[i] = t_max * static_cast<double>(i) / (grid.size() - 1);
    const BackflowReport rep = backflow_report(wp, grid);
    return net + 2.0 * rep.total;
}

double bohm_distribution(const WavePacket& wp, double t, double denom) {
    if (!(denom > 0.0)) throw ValidationError("bohm_distribution: denominator must be positive");
    return std::fabs(wp.flux(0.0, t)) / denom;
}

double quantile_start(const WavePacket& wp, double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantile_start: q must be in (0,1)");
    // tail mass above x: T(x) = int_x^inf rho(x',0) dx'
    const double far = 30.0;
    auto tail = [&](double x) {
        return quadrature::integrate([&](double xp) { return wp.density(xp, 0.0); }, x, far,
                                     1e-10, 1 << 15);
    };
    double lo = wp.params().x0 - 5.0, hi = far - 1.0;
    // tail is decreasing in x
    for (int it = 0; it < 200 && (hi - lo) > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) > q) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> bohm_trajectory(const WavePacket& wp, double x_start,
                                                       std::pair<double, double> t_span,
                                                       double tol) {
    const double rho0 = wp.density(x_start, t_span.first);
    if (!(rho0 > 1e-12))
        throw ValidationError("bohm_trajectory: vanishing density at the start point");

    auto v = [&](double t, double x) {
        const double rho = wp.density(x, t);
        if (!(rho > 1e-30))
            throw ConvergenceError("bohm_trajectory: trajectory entered vanishing density");
        return wp.flux(x, t) / rho;
    };

    // classic adaptive RK45 (Cash-Karp) with deterministic step control
    static constexpr double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
    static constexpr double b21 = 1.0 / 5;
    static constexpr double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static constexpr double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static constexpr double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static constexpr double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                            b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static constexpr double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594,
                            c6 = 512.0 / 1771;
    static constexpr double d1 = 2825.0 / 27648, d3 = 18575.0 / 48384, d4 = 13525.0 / 55296,
                            d5 = 277.0 / 14336, d6 = 1.0 / 4;

    std::vector<std::pair<double, double>> path;
    double t = t_span.first, x = x_start;
    path.emplace_back(t, x);
    const double h_max = (t_span.second - t_span.first) / 500.0;
    double h = h_max / 2.0;
    int guard = 0;
    while (t < t_span.second) {
        if (++guard > 2000000)
            throw ConvergenceError("bohm_trajectory: step limit exceeded");
        if (t + h > t_span.second) h = t_span.second - t;
        const double k1 = v(t, x);
        const double k2 = v(t + a2 * h, x + h * b21 * k1);
        const double k3 = v(t + a3 * h, x + h * (b31 * k1 + b32 * k2));
        const double k4 = v(t + a4 * h, x + h * (b41 * k1 + b42 * k2 + b43 * k3));
        const double k5 = v(t + a5 * h, x + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
        const double k6 =
            v(t + a6 * h, x + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
        const double x5 = x + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
        const double x4 = x + h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
        const double err = std::fabs(x5 - x4);
        const double scale = tol * std::max(1e-3, std::fabs(x));
        if (err <= scale || h <= 1e-15) {
            t += h;
            x = x5;
            path.emplace_back(t, x);
            if (err > 0.0) h = std::min(5.0 * h, 0.9 * h * std::pow(scale / err, 0.2));
            h = std::min(h, h_max);
        } else {
            h = std::max(1e-15, 0.9 * h * std::pow(scale / err, 0.25));
        }
    }
    return path;
}

std::pair<double, double> distribution_moments(const TimeSeries& series,
                                               const std::string& channel,
                                               bool signed_channel) {
    series.validate();
    const auto& c = series.channel(channel);
    if (!signed_channel) {
        for (double v : c)
            if (v < -1e-12)
                throw ValidationError("distribution_moments: negative values in unsigned channel '" +
                                      channel + "'");
    }
    double norm = 0.0, first = 0.0;
    for (size_t i = 1; i < series.t.size(); ++i) {
        const double dt = series.t[i] - series.t[i - 1];
        norm += 0.5 * dt * (c[i] + c[i - 1]);
        first += 0.5 * dt * (series.t[i] * c[i] + series.t[i - 1] * c[i - 1]);
    }
    if (!(norm > 0.0))
        throw ValidationError("distribution_moments: nonpositive normalization");
    return {first / norm, norm};
}

}  // namespace qarrival::arrival
