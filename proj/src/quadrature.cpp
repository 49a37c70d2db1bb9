#include "qarrival/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "qarrival/errors.hpp"

namespace qarrival::quadrature {

namespace {

// Newton iteration on Legendre polynomials; standard Golub-free construction.
GLRule make_rule(int n) {
    GLRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-like initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

std::map<int, GLRule> g_cache;
std::mutex g_cache_mutex;

}  // namespace

const GLRule& gauss_legendre(int n) {
    if (n < 1) throw ValidationError("gauss_legendre: n < 1");
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_cache.find(n);
    if (it == g_cache.end()) it = g_cache.emplace(n, make_rule(n)).first;
    return it->second;
}

PanelRule panel_rule(double a, double b, int nodes_per_panel, int panels) {
    if (!(b > a)) throw ValidationError("panel_rule: empty interval");
    if (panels < 1) throw ValidationError("panel_rule: panels < 1");
    const GLRule& base = gauss_legendre(nodes_per_panel);
    PanelRule out;
    out.nodes.reserve(static_cast<size_t>(nodes_per_panel) * panels);
    out.weights.reserve(static_cast<size_t>(nodes_per_panel) * panels);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        for (int i = 0; i < nodes_per_panel; ++i) {
            out.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
            out.weights.push_back(0.5 * h * base.weights[i]);
        }
    }
    return out;
}

namespace {

template <typename T, typename F>
T integrate_impl(const F& f, double a, double b, double tol, int max_nodes) {
    T prev{};
    bool have_prev = false;
    for (int n = 16; n <= max_nodes; n *= 2) {
        const PanelRule r = panel_rule(a, b, 16, n / 16);
        T acc{};
        for (size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(r.nodes[i]);
        if (have_prev) {
            const double scale = std::max(1.0, std::abs(acc));
            if (std::abs(acc - prev) <= tol * scale) return acc;
        }
        prev = acc;
        have_prev = true;
    }
    throw ConvergenceError("integrate: node doubling did not converge");
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_nodes) {
    return integrate_impl<double>(f, a, b, tol, max_nodes);
}

std::complex<double> integrate_c(const std::function<std::complex<double>(double)>& f,
                                 double a, double b, double tol, int max_nodes) {
    return integrate_impl<std::complex<double>>(f, a, b, tol, max_nodes);
}

}  // namespace qarrival::quadrature
