#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "qarrival/capdesign.hpp"
#include "qarrival/errors.hpp"
#include "qarrival/oracle.hpp"
#include "qarrival/wavepacket.hpp"

using namespace qarrival;
using namespace qarrival::oracle;

namespace {

// free Gaussian with width sigma0, carrier k0, centered at x0
struct FreeGaussian {
    double sigma0, k0, x0;
    cplx operator()(double x, double t) const {
        const cplx A(sigma0 * sigma0, 0.5 * t);
        const double xc = x0 + k0 * t;
        const cplx expo = cplx(0.0, k0 * (x - x0) - 0.5 * k0 * k0 * t) -
                          (x - xc) * (x - xc) / (4.0 * A);
        return std::pow(2.0 * M_PI * sigma0 * sigma0, -0.25) * (sigma0 / std::sqrt(A)) *
               std::exp(expo);
    }
};

LayeredPotential zero_pot() {
    LayeredPotential pot;
    pot.L = 0.01;
    pot.V = {cplx(0, 0)};
    return pot;
}

LayeredPotential test_cap() {
    LayeredPotential pot;
    pot.L = 0.01;
    pot.V = {cplx(-2e4, -5e4), cplx(-6e4, -2e5), cplx(-5e4, -6e5), cplx(8e5, -1.2e6)};
    return pot;
}

double window_l2(const GridSpec& g, const std::vector<cplx>& a, const std::vector<cplx>& b,
                 double xlo, double xhi) {
    const auto x = g.x();
    double acc = 0.0;
    for (int j = 0; j < g.points; ++j)
        if (x[j] >= xlo && x[j] <= xhi) acc += std::norm(a[j] - b[j]);
    return std::sqrt(acc * g.dx());
}

}  // namespace

TEST_CASE("grid validation") {
    GridSpec g;
    CHECK_NOTHROW(g.validate());
    g.points = 10;
    CHECK_THROWS_AS(g.validate(), ValidationError);
    g = GridSpec{};
    g.points = 1001;  // dx too coarse for p_hi = 1000
    CHECK_THROWS_AS(g.validate(), ValidationError);
    g = GridSpec{};
    g.pad = 1.2;
    CHECK_THROWS_AS(g.validate(), ValidationError);
    g = GridSpec{};
    g.dt = 0.0;
    CHECK_THROWS_AS(g.validate(), ValidationError);
    CHECK_THROWS_AS(propagate(GridSpec{}, zero_pot(), [](double) { return cplx(0, 0); },
                              {3e-4, 1e-4}),
                    ValidationError);
    g = GridSpec{};
    g.pad = 0.1;
    CHECK_THROWS_AS(propagate(g, zero_pot(), [](double) { return cplx(0, 0); }, {1e-5}, {},
                              false, [](double, double) { return cplx(0, 0); }),
                    ValidationError);
}

TEST_CASE("free Gaussian matches the closed form") {
    const FreeGaussian gauss{0.01, 300.0, -0.1};
    GridSpec g;
    g.x_min = -0.25;
    g.x_max = 0.25;
    g.points = 10001;
    g.dt = 2e-9;
    g.pad = 0.03;
    const auto run = propagate(g, zero_pot(), [&](double x) { return gauss(x, 0.0); },
                               {0.0, 5e-4}, {}, true);
    CHECK(run.initial_pad_amplitude < 1e-10);
    CHECK(std::fabs(run.checkpoints[0].norm - 1.0) < 1e-10);  // after renormalization
    // the run is renormalized to unit conserved (M-weighted) norm; apply the
    // same convention to the analytic target so only propagation error remains
    const auto x = g.x();
    const double scale =
        std::abs(run.checkpoints[0].psi[g.points / 2] / gauss(x[g.points / 2], 0.0));
    std::vector<cplx> exact(g.points);
    for (int j = 0; j < g.points; ++j) exact[j] = scale * gauss(x[j], 5e-4);
    const double err =
        window_l2(g, run.checkpoints[1].psi, exact, g.x_min + g.pad, g.x_max - g.pad);
    MESSAGE("free Gaussian L2 error at 5e-4: ", err);
    CHECK(std::fabs(scale - 1.0) < 1e-4);  // grid-sampling normalization shift is tiny
    CHECK(err < 1e-7);
    CHECK(run.checkpoints[1].rate_cap == 0.0);
    CHECK(run.pad_absorbed < 1e-10);
}

TEST_CASE("norm is conserved for a real potential") {
    const FreeGaussian gauss{0.01, 300.0, -0.08};
    LayeredPotential pot;
    pot.L = 0.01;
    pot.V = {cplx(2e4, 0), cplx(-1e4, 0)};
    GridSpec g;
    g.x_min = -0.3;
    g.x_max = 0.3;
    g.points = 9601;
    g.dt = 1e-8;
    g.pad = 0.0;
    const auto run = propagate(g, pot, [&](double x) { return gauss(x, 0.0); },
                               {0.0, 2e-4, 4e-4}, {}, true);
    for (const auto& ck : run.checkpoints) {
        CHECK(std::fabs(ck.norm - 1.0) < 1e-10);
        CHECK(ck.rate_cap == 0.0);
    }
    CHECK(run.pad_absorbed == 0.0);
}

TEST_CASE("norm loss matches the volume-integral rate") {
    const FreeGaussian gauss{0.01, 300.0, -0.08};
    GridSpec g;
    g.x_min = -0.3;
    g.x_max = 0.3;
    g.points = 9601;
    g.dt = 5e-9;
    g.pad = 0.05;
    const auto run = propagate(g, test_cap(), [&](double x) { return gauss(x, 0.0); },
                               {2.2e-4, 2.7e-4, 3.2e-4}, {}, true);
    double peak = 0.0;
    for (const auto& ck : run.checkpoints) peak = std::max(peak, ck.rate_cap);
    CHECK(peak > 0.0);
    for (const auto& ck : run.checkpoints) {
        const double resid = std::fabs(-ck.dndt_grid - ck.rate_cap - ck.rate_pad);
        MESSAGE("t=", ck.t, " rate=", ck.rate_cap, " resid=", resid / peak);
        CHECK(resid <= 1e-6 * peak);
    }
}

TEST_CASE("step-halving converges below 1e-7") {
    // the layer-interface truncation error is second order in dx, so this
    // needs a fine grid; interfaces stay node-aligned (dx divides 0.0025)
    const FreeGaussian gauss{0.01, 300.0, -0.08};
    GridSpec coarse;
    coarse.x_min = -0.25;
    coarse.x_max = 0.2;
    coarse.points = 108001;
    coarse.dt = 5e-9;
    coarse.pad = 0.05;
    GridSpec fine = coarse;
    fine.points = 2 * (coarse.points - 1) + 1;
    fine.dt = 0.5 * coarse.dt;
    // no renormalization: the two grids would get slightly different scales
    auto init = [&](double x) { return gauss(x, 0.0); };
    const auto a = propagate(coarse, test_cap(), init, {3e-4});
    const auto b = propagate(fine, test_cap(), init, {3e-4});
    double acc = 0.0;
    for (int j = 0; j < coarse.points; ++j)
        acc += std::norm(a.checkpoints[0].psi[j] - b.checkpoints[0].psi[2 * j]);
    const double diff = std::sqrt(acc * coarse.dx());
    MESSAGE("step-halving L2 change: ", diff);
    CHECK(diff < 1e-7);
}

TEST_CASE("checkpoint dump format") {
    const std::vector<double> x = {0.0, 0.5};
    const std::vector<cplx> psi = {cplx(1.0 / 3.0, -2.0), cplx(0.0, 1e-30)};
    const std::string path = "test_oracle_dump.txt";
    save_checkpoint(path, x, psi);
    FILE* f = std::fopen(path.c_str(), "r");
    REQUIRE(f != nullptr);
    double xa, re, im;
    REQUIRE(std::fscanf(f, "%lf %lf %lf", &xa, &re, &im) == 3);
    CHECK(xa == 0.0);
    CHECK(re == 1.0 / 3.0);  // 17 significant digits survive the round trip
    CHECK(im == -2.0);
    REQUIRE(std::fscanf(f, "%lf %lf %lf", &xa, &re, &im) == 3);
    CHECK(im == 1e-30);
    std::fclose(f);
    std::remove(path.c_str());
    CHECK_THROWS_AS(save_checkpoint(path, x, {psi[0]}), ValidationError);
}

TEST_CASE("grid propagation certifies the quadrature evolution") {
    LayeredPotential pot;
    try {
        pot = LayeredPotential::load("optimized_cap.txt");
    } catch (const ValidationError&) {
        capdesign::DesignSpec spec;
        pot = capdesign::optimize(spec, 20240817ULL).potential;
        pot.save("optimized_cap.txt");
    }
    WavePacket wp({1.4, 0.007, 1.0, -0.22, 300.0});
    CapEvolution ev(pot, wp);
    // the quadrature state is an exact superposition of exact stationary
    // solutions, hence an exact solution of the time-dependent equation; the
    // grid propagator re-evolves the same initial data with the same (exact)
    // wall values, so any disagreement is scheme error alone
    GridSpec g;  // defaults are tuned for exactly this configuration
    const auto wall_l = ev.eigen_samples(g.x_min);
    const auto wall_r = ev.eigen_samples(g.x_min + (g.points - 1) * g.dx());
    const double x_mid = 0.5 * (g.x_min + g.x_max);
    const auto run = propagate(
        g, pot, [&](double x) { return ev.psi(x, 0.0); },
        {3e-4, 7e-4, 1.2e-3}, {}, false,
        [&](double x, double t) {
            return ev.psi_from_samples(x < x_mid ? wall_l : wall_r, t);
        });
    const auto x = g.x();
    for (const auto& ck : run.checkpoints) {
        double acc = 0.0;
        for (int j = 0; j < g.points; ++j)
            if (x[j] >= -0.5 && x[j] <= pot.L) acc += std::norm(ck.psi[j] - ev.psi(x[j], ck.t));
        const double err = std::sqrt(acc * g.dx());
        MESSAGE("t=", ck.t, " cross-method L2 = ", err);
        CHECK(err < 1e-6);
    }
}
