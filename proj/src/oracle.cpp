#include "qarrival/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "qarrival/errors.hpp"

namespace qarrival::oracle {

namespace {

// average of the layered potential over [a, b] (zero outside [0, L])
cplx cell_average(const LayeredPotential& pot, double a, double b) {
    const double d = pot.layer_width();
    cplx acc(0.0, 0.0);
    for (int j = 0; j < pot.N(); ++j) {
        const double lo = std::max(a, j * d);
        const double hi = std::min(b, (j + 1) * d);
        if (hi > lo) acc += pot.V[j] * (hi - lo);
    }
    return acc / (b - a);
}

}  // namespace

void GridSpec::validate() const {
    if (!(x_max > x_min)) throw ValidationError("GridSpec: x_max must exceed x_min");
    if (points < 33) throw ValidationError("GridSpec: too few grid points");
    if (!(dt > 0.0)) throw ValidationError("GridSpec: dt must be positive");
    if (pad < 0.0 || 2.0 * pad >= x_max - x_min)
        throw ValidationError("GridSpec: pads must fit inside the domain");
    if (pad > 0.0 && !(pad_strength > 0.0))
        throw ValidationError("GridSpec: pad_strength must be positive with pads");
    if (!(p_hi > 0.0)) throw ValidationError("GridSpec: p_hi must be positive");
    // resolve the shortest wavelength: dx <= 2 pi hbar / (10 p_hi), atomic units
    if (dx() > 2.0 * M_PI / (10.0 * p_hi))
        throw ValidationError("GridSpec: dx does not resolve the shortest wavelength");
}

std::vector<double> GridSpec::x() const {
    std::vector<double> out(points);
    for (int j = 0; j < points; ++j) out[j] = x_min + j * dx();
    return out;
}

OracleRun propagate(const GridSpec& grid, const LayeredPotential& pot,
                    const std::function<cplx(double)>& initial,
                    const std::vector<double>& times, Units units, bool renormalize,
                    const std::function<cplx(double, double)>& boundary) {
    grid.validate();
    pot.validate();
    if (boundary && grid.pad > 0.0)
        throw ValidationError("oracle: prescribed boundary values exclude pads");
    for (size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1])
            throw ValidationError("oracle: checkpoint times must be nondecreasing");
    if (!times.empty() && times.front() < 0.0)
        throw ValidationError("oracle: checkpoint times must be nonnegative");

    const int n = grid.points;
    const double h = grid.dx();
    const double hbar = units.hbar, m = units.mass;
    const std::vector<double> xg = grid.x();

    // segment-averaged potential (value of V between adjacent nodes) plus the
    // quadratic absorbing pads; coupling the potential through segments keeps
    // the scheme Hermitian for real V and avoids the O(1) Numerov row defect
    // at layer interfaces that node-centered averaging would introduce
    std::vector<double> u_cap_im(n), u_pad(n);
    std::vector<cplx> U(n, cplx(0.0, 0.0));
    for (int j = 0; j + 1 < n; ++j) {
        const cplx vc = cell_average(pot, xg[j], xg[j + 1]);
        const double xm = 0.5 * (xg[j] + xg[j + 1]);
        double w = 0.0;
        if (grid.pad > 0.0) {
            const double dl = (grid.x_min + grid.pad) - xm;
            const double dr = xm - (grid.x_max - grid.pad);
            if (dl > 0.0) w = grid.pad_strength * (dl / grid.pad) * (dl / grid.pad);
            if (dr > 0.0) w = grid.pad_strength * (dr / grid.pad) * (dr / grid.pad);
        }
        u_cap_im[j] = vc.imag();
        u_pad[j] = w;
        U[j] = vc - cplx(0.0, w);
    }

    // Numerov-weighted Crank-Nicolson:  (M + zK) psi+ = (M - zK) psi,
    // c = hbar^2/(2 m dx^2),  z = i dt/(2 hbar); row j couples U_{j-1}, U_j
    const double c = hbar * hbar / (2.0 * m * h * h);
    const cplx z(0.0, grid.dt / (2.0 * hbar));
    std::vector<cplx> alo(n), adi(n), aup(n), blo(n), bdi(n), bup(n);
    for (int j = 1; j + 1 < n; ++j) {
        const cplx klo = -c + U[j - 1] / 12.0;
        const cplx kdi = 2.0 * c + (10.0 / 12.0) * 0.5 * (U[j - 1] + U[j]);
        const cplx kup = -c + U[j] / 12.0;
        alo[j] = 1.0 / 12.0 + z * klo;
        adi[j] = 10.0 / 12.0 + z * kdi;
        aup[j] = 1.0 / 12.0 + z * kup;
        blo[j] = 1.0 / 12.0 - z * klo;
        bdi[j] = 10.0 / 12.0 - z * kdi;
        bup[j] = 1.0 / 12.0 - z * kup;
    }
    // precomputed Thomas factorization of the constant matrix A
    std::vector<cplx> cp(n), inv(n);
    {
        cplx den = adi[1];
        inv[1] = 1.0 / den;
        cp[1] = aup[1] * inv[1];
        for (int j = 2; j + 1 < n; ++j) {
            den = adi[j] - alo[j] * cp[j - 1];
            inv[j] = 1.0 / den;
            cp[j] = aup[j] * inv[j];
        }
    }

    // sample and (optionally) renormalize the initial state
    std::vector<cplx> psi(n), g(n), r(n);
    for (int j = 0; j < n; ++j) psi[j] = initial(xg[j]);
    if (boundary) {
        psi[0] = boundary(xg[0], 0.0);
        psi[n - 1] = boundary(xg[n - 1], 0.0);
    } else {
        psi[0] = psi[n - 1] = cplx(0.0, 0.0);
    }

    auto m_norm = [&](const std::vector<cplx>& u) {
        double acc = 0.0;
        for (int j = 0; j + 1 < n; ++j)
            acc += (10.0 / 12.0) * std::norm(u[j]) +
                   (1.0 / 6.0) * (u[j].real() * u[j + 1].real() + u[j].imag() * u[j + 1].imag());
        acc += (10.0 / 12.0) * std::norm(u[n - 1]);
        return acc * h;
    };
    // exact discrete counterpart of (2/hbar) int |Im V| |psi|^2: the quadratic
    // form of the anti-Hermitian part of K, summed per absorbing segment
    std::vector<int> cap_idx, pad_idx;
    for (int j = 0; j + 1 < n; ++j) {
        if (u_cap_im[j] != 0.0) cap_idx.push_back(j);
        if (u_pad[j] != 0.0) pad_idx.push_back(j);
    }
    auto weighted_rate = [&](const std::vector<cplx>& u, const std::vector<double>& w_im,
                             const std::vector<int>& idx) {
        double acc = 0.0;
        for (int j : idx) {
            const double seg =
                (10.0 / 24.0) * (std::norm(u[j]) + std::norm(u[j + 1])) +
                (1.0 / 6.0) *
                    (u[j].real() * u[j + 1].real() + u[j].imag() * u[j + 1].imag());
            acc += std::fabs(w_im[j]) * seg;
        }
        return 2.0 / hbar * acc * h;
    };

    OracleRun run;
    run.grid = grid;
    if (renormalize) {
        const double n0 = m_norm(psi);
        if (!(n0 > 0.0)) throw ValidationError("oracle: initial state has zero norm");
        const double s = 1.0 / std::sqrt(n0);
        for (auto& u : psi) u *= s;
    }
    for (int j = 0; j < n; ++j)
        if (xg[j] < grid.x_min + grid.pad || xg[j] > grid.x_max - grid.pad)
            run.initial_pad_amplitude = std::max(run.initial_pad_amplitude, std::abs(psi[j]));

    // map checkpoint times onto step indices
    std::vector<long> steps(times.size());
    long last = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        steps[i] = std::llround(times[i] / grid.dt);
        last = std::max(last, steps[i]);
    }
    run.checkpoints.resize(times.size());
    std::vector<double> norm_hist(last + 2, 0.0);
    norm_hist[0] = m_norm(psi);

    auto record = [&](long k) {
        for (size_t i = 0; i < steps.size(); ++i) {
            if (steps[i] != k) continue;
            Checkpoint& ck = run.checkpoints[i];
            ck.t = k * grid.dt;
            ck.psi = psi;
            ck.norm = norm_hist[k];
            ck.rate_cap = weighted_rate(psi, u_cap_im, cap_idx);
            ck.rate_pad = weighted_rate(psi, u_pad, pad_idx);
        }
    };
    record(0);

    for (long k = 1; k <= last + 1; ++k) {
        // r = B psi, then solve A psi+ = r with the cached factorization;
        // prescribed wall values at the new time move to the right-hand side
        for (int j = 1; j + 1 < n; ++j)
            r[j] = blo[j] * psi[j - 1] + bdi[j] * psi[j] + bup[j] * psi[j + 1];
        if (boundary) {
            const double tk = k * grid.dt;
            psi[0] = boundary(xg[0], tk);
            psi[n - 1] = boundary(xg[n - 1], tk);
            r[1] -= alo[1] * psi[0];
            r[n - 2] -= aup[n - 2] * psi[n - 1];
        }
        g[1] = r[1] * inv[1];
        for (int j = 2; j + 1 < n; ++j) g[j] = (r[j] - alo[j] * g[j - 1]) * inv[j];
        psi[n - 2] = g[n - 2];
        for (int j = n - 3; j >= 1; --j) psi[j] = g[j] - cp[j] * psi[j + 1];

        norm_hist[k] = m_norm(psi);
        if (!pad_idx.empty()) run.pad_absorbed += grid.dt * weighted_rate(psi, u_pad, pad_idx);
        record(k);
    }
    for (size_t i = 0; i < steps.size(); ++i) {
        const long k = steps[i];
        if (k >= 1)
            run.checkpoints[i].dndt_grid =
                (norm_hist[k + 1] - norm_hist[k - 1]) / (2.0 * grid.dt);
        else
            run.checkpoints[i].dndt_grid = (norm_hist[1] - norm_hist[0]) / grid.dt;
    }
    return run;
}

void save_checkpoint(const std::string& path, const std::vector<double>& x,
                     const std::vector<cplx>& psi) {
    if (x.size() != psi.size()) throw ValidationError("save_checkpoint: length mismatch");
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ValidationError("save_checkpoint: cannot open " + path);
    for (size_t j = 0; j < x.size(); ++j)
        std::fprintf(f, "%.17g %.17g %.17g\n", x[j], psi[j].real(), psi[j].imag());
    std::fclose(f);
}

}  // namespace qarrival::oracle
