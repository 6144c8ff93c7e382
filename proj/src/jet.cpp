#include "germforge/jet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "germforge/errors.hpp"

namespace germforge {

namespace {

// (a * b)[n] for series with no constant term, degrees up to `order`.
// Written degree-by-degree so that results at a lower truncation order are
// bit-identical prefixes of results at a higher one.
std::vector<Complex> multiply_series(const std::vector<Complex>& a,
                                     const std::vector<Complex>& b,
                                     int order) {
    std::vector<Complex> out(static_cast<std::size_t>(order), Complex(0.0, 0.0));
    for (int n = 2; n <= order; ++n) {
        Complex acc(0.0, 0.0);
        for (int i = 1; i <= n - 1; ++i) {
            acc += a[static_cast<std::size_t>(i - 1)] * b[static_cast<std::size_t>(n - i - 1)];
        }
        out[static_cast<std::size_t>(n - 1)] = acc;
    }
    return out;
}

} // namespace

Jet Jet::identity(int order) {
    Jet j(order);
    if (order >= 1) j.coeff(1) = Complex(1.0, 0.0);
    return j;
}

Jet compose(const Jet& f, const Jet& g) {
    if (f.order() != g.order()) {
        throw OrderMismatch("compose: jet orders differ (" + std::to_string(f.order()) +
                            " vs " + std::to_string(g.order()) + ")");
    }
    const int order = f.order();
    Jet result(order);
    // result = sum_k f_k * g^k; g^k has lowest degree k, so the sum is triangular.
    std::vector<Complex> g_power = g.coeffs();
    for (int k = 1; k <= order; ++k) {
        const Complex fk = f.coeff(k);
        for (int n = k; n <= order; ++n) {
            result.coeff(n) += fk * g_power[static_cast<std::size_t>(n - 1)];
        }
        if (k < order) g_power = multiply_series(g_power, g.coeffs(), order);
    }
    return result;
}

Jet invert(const Jet& f) {
    const int order = f.order();
    if (order < 1 || f.coeff(1) == Complex(0.0, 0.0)) {
        throw NotInvertible("invert: jet has vanishing linear coefficient");
    }
    Jet g(order);
    g.coeff(1) = Complex(1.0, 0.0) / f.coeff(1);
    // With g filled through degree n-1 and g_n = 0, the degree-n coefficient of
    // f(g(z)) - z is off by exactly f_1 * g_n; solve for g_n one degree at a time.
    for (int n = 2; n <= order; ++n) {
        const Jet fg = compose(f, g);
        g.coeff(n) = -fg.coeff(n) / f.coeff(1);
    }
    return g;
}

Jet conjugate(const Jet& g, const Jet& h) {
    return compose(invert(h), compose(g, h));
}

Jet power(const Jet& f, int k) {
    const int order = f.order();
    if (k == 0) return Jet::identity(order);
    Jet base = k > 0 ? f : invert(f);
    int reps = std::abs(k);
    Jet result = base;
    for (int i = 1; i < reps; ++i) result = compose(base, result);
    return result;
}

Jet truncate(const Jet& f, int new_order) {
    if (new_order > f.order()) {
        throw OrderMismatch("truncate: requested order exceeds jet order");
    }
    std::vector<Complex> c(f.coeffs().begin(), f.coeffs().begin() + new_order);
    return Jet(std::move(c));
}

bool is_identity(const Jet& f, double tol) {
    if (f.order() < 1) return true;
    if (std::abs(f.coeff(1) - Complex(1.0, 0.0)) > tol) return false;
    for (int k = 2; k <= f.order(); ++k) {
        if (std::abs(f.coeff(k)) > tol) return false;
    }
    return true;
}

double max_coeff_magnitude(const Jet& f) {
    double m = 0.0;
    for (int k = 1; k <= f.order(); ++k) m = std::max(m, std::abs(f.coeff(k)));
    return m;
}

Complex eval_polynomial(const std::vector<Complex>& coeffs, Complex z) {
    Complex acc(0.0, 0.0);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = (acc + *it) * z;
    }
    return acc;
}

double sup_norm_on_disc(const std::vector<Complex>& coeffs, double r) {
    constexpr int kSamples = 4096;
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    double best = 0.0;
    for (int i = 0; i < kSamples; ++i) {
        const double t = kTwoPi * static_cast<double>(i) / kSamples;
        const Complex z = std::polar(r, t);
        best = std::max(best, std::abs(eval_polynomial(coeffs, z)));
    }
    return best;
}

} // namespace germforge
