#include "germforge/map_expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "germforge/errors.hpp"

namespace germforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kCircleScan = 256;
constexpr double kDerivFloor = 0.1;   // univalence heuristic threshold
constexpr double kRadiusCap = 1.0e6;  // stand-in for "unbounded" in sweeps
constexpr double kSafety = 1.0 - 1e-3;

Complex poly_eval(const std::vector<Complex>& c, Complex z) {
    return eval_polynomial(c, z);
}

Complex poly_deriv_eval(const std::vector<Complex>& c, Complex z) {
    Complex acc(0.0, 0.0);
    for (int k = static_cast<int>(c.size()); k >= 1; --k) {
        acc = acc * z + static_cast<double>(k) * c[static_cast<std::size_t>(k - 1)];
    }
    return acc;
}

// min over a 256-point circle of |p'(z)|.
double min_deriv_on_circle(const std::vector<Complex>& c, double r) {
    double m = kInf;
    for (int i = 0; i < kCircleScan; ++i) {
        const Complex z = std::polar(r, kTwoPi * i / kCircleScan);
        m = std::min(m, std::abs(poly_deriv_eval(c, z)));
    }
    return m;
}

double polynomial_radius(const std::vector<Complex>& c) {
    if (c.size() <= 1) return kInf; // linear: univalent everywhere
    double r = 1e-3;
    while (r < kRadiusCap) {
        if (min_deriv_on_circle(c, r) < kDerivFloor) return r;
        r *= 1.02;
    }
    return kRadiusCap;
}

// Circle extrema of |e| via sampled evaluation; failures count as +inf for
// sup and are skipped for inf (nullopt when nothing evaluates).
double sup_on_circle(const ExprPtr& e, double r) {
    double s = 0.0;
    for (int i = 0; i < kCircleScan; ++i) {
        const Complex z = std::polar(r, kTwoPi * i / kCircleScan);
        try {
            s = std::max(s, std::abs(eval_at(e, z)));
        } catch (const NumericalError&) {
            return kInf;
        }
    }
    return s;
}

double inf_on_circle(const ExprPtr& e, double r) {
    double s = kInf;
    for (int i = 0; i < kCircleScan; ++i) {
        const Complex z = std::polar(r, kTwoPi * i / kCircleScan);
        try {
            s = std::min(s, std::abs(eval_at(e, z)));
        } catch (const NumericalError&) {
            return 0.0;
        }
    }
    return s;
}

// Largest sampled radius r <= hint(g) with sup |g| on the circle below
// inner_limit (so g maps B_r inside f's validity disc). The circle sup of a
// holomorphic map is monotone in r (maximum principle), so bisect.
double compose_radius(const ExprPtr& g, double inner_limit) {
    const double r_top = std::min(radius_hint(g), kRadiusCap) * 0.999;
    if (inner_limit == kInf) return radius_hint(g);
    if (sup_on_circle(g, r_top) < inner_limit * kSafety) return r_top;
    double lo = 0.0, hi = r_top;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (sup_on_circle(g, mid) < inner_limit * kSafety) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::max(lo, 1e-12);
}

double inverse_radius(const ExprPtr& inner) {
    double r = std::min(radius_hint(inner), kRadiusCap) * 0.999;
    for (int k = 0; k < 64 && r > 1e-12; ++k) {
        const double m = inf_on_circle(inner, r);
        // Rouche: an injective germ with |f| >= m on |z| = r covers B_m.
        if (m > 0.0) return m * kSafety;
        r *= 0.9;
    }
    return 0.0;
}

Complex newton_invert(const ExprPtr& inner, Complex target) {
    const double tol = 1e-13 * std::max(1.0, std::abs(target));
    const double gate = radius_hint(inner);

    // Seed at the target itself, clipped into the inner validity disc.
    Complex w = target;
    if (std::isfinite(gate) && std::abs(w) >= gate) {
        w *= 0.9 * gate / std::abs(w);
    }

    double residual = kInf;
    Complex value(0.0, 0.0);
    try {
        value = eval_at(inner, w);
        residual = std::abs(value - target);
    } catch (const NumericalError&) {
        w = Complex(0.0, 0.0);
        value = Complex(0.0, 0.0);
        residual = std::abs(target);
    }

    for (int iter = 0; iter < 100; ++iter) {
        if (residual <= tol) return w;
        Complex dw;
        try {
            dw = eval_with_deriv(inner, w).second;
        } catch (const NumericalError&) {
            throw NewtonDivergence("inverse evaluation: derivative unavailable");
        }
        if (std::abs(dw) < 1e-300) {
            throw NewtonDivergence("inverse evaluation: derivative vanished");
        }
        Complex step = (target - value) / dw;
        bool advanced = false;
        for (int h = 0; h < 42; ++h) {
            const Complex w_try = w + step;
            if (!(std::isfinite(gate) && std::abs(w_try) >= gate)) {
                try {
                    const Complex v_try = eval_at(inner, w_try);
                    const double r_try = std::abs(v_try - target);
                    if (r_try < residual) {
                        w = w_try;
                        value = v_try;
                        residual = r_try;
                        advanced = true;
                        break;
                    }
                } catch (const NumericalError&) {
                    // fall through to damping
                }
            }
            step *= 0.5;
        }
        if (!advanced) {
            throw NewtonDivergence("inverse evaluation: damped Newton stalled");
        }
    }
    if (residual <= tol) return w;
    throw NewtonDivergence("inverse evaluation: no convergence in 100 iterations");
}

} // namespace

ExprPtr make_rotation(double angle) {
    return std::make_shared<MapExpr>(Rotation{angle}, kInf);
}

ExprPtr make_polynomial(std::vector<Complex> coeffs) {
    while (!coeffs.empty() && coeffs.back() == Complex(0.0, 0.0)) coeffs.pop_back();
    if (coeffs.empty() || coeffs.front() == Complex(0.0, 0.0)) {
        throw SemanticError("polynomial germ needs a nonzero linear coefficient");
    }
    const double r = polynomial_radius(coeffs);
    return std::make_shared<MapExpr>(Polynomial{std::move(coeffs)}, r);
}

ExprPtr make_moebius(Complex a, Complex b, Complex c, Complex d) {
    if (b != Complex(0.0, 0.0)) {
        throw SemanticError("Moebius germ must fix the origin (b = 0)");
    }
    if (a * d == Complex(0.0, 0.0)) {
        throw SemanticError("Moebius germ must be invertible (a d != 0)");
    }
    const double r = (c == Complex(0.0, 0.0)) ? kInf : std::abs(d / c) * kSafety;
    return std::make_shared<MapExpr>(Moebius{a, b, c, d}, r);
}

ExprPtr make_compose(ExprPtr f, ExprPtr g) {
    const double r = compose_radius(g, radius_hint(f));
    return std::make_shared<MapExpr>(Compose{std::move(f), std::move(g)}, r);
}

ExprPtr make_inverse(ExprPtr inner) {
    if (const auto* inv = std::get_if<Inverse>(&inner->node())) {
        return inv->inner;
    }
    // Rotations and Moebius germs invert in closed form; this keeps tight
    // evaluation loops (itineraries, Newton sweeps) off the damped solver.
    if (const auto* rot = std::get_if<Rotation>(&inner->node())) {
        return make_rotation(-rot->angle);
    }
    if (const auto* m = std::get_if<Moebius>(&inner->node())) {
        // w = a z / (c z + d)  <=>  z = d w / (-c w + a)
        return make_moebius(m->d, Complex(0.0, 0.0), -m->c, m->a);
    }
    // Structural identities (f o g)^-1 = g^-1 o f^-1 and
    // (h^-1 o b o h)^-1 = h^-1 o b^-1 o h push the Newton solver down to the
    // leaves and give the inverse the same validity sweep as a forward chain,
    // instead of the much coarser covered-disc bound below.
    if (const auto* cp = std::get_if<Compose>(&inner->node())) {
        return make_compose(make_inverse(cp->g), make_inverse(cp->f));
    }
    if (const auto* cj = std::get_if<Conjugate>(&inner->node())) {
        ExprPtr base_inv = make_inverse(cj->base);
        const double r = radius_hint(
            make_compose(cj->by_inverse, make_compose(base_inv, cj->by)));
        return std::make_shared<MapExpr>(
            Conjugate{std::move(base_inv), cj->by, cj->by_inverse}, r);
    }
    const double r = inverse_radius(inner);
    return std::make_shared<MapExpr>(Inverse{std::move(inner)}, r);
}

ExprPtr make_conjugate(ExprPtr base, ExprPtr by) {
    ExprPtr by_inverse = make_inverse(by);
    // Same validity sweep as the equivalent by_inverse ∘ base ∘ by chain.
    const double r = radius_hint(make_compose(by_inverse, make_compose(base, by)));
    return std::make_shared<MapExpr>(Conjugate{std::move(base), std::move(by), std::move(by_inverse)}, r);
}

ExprPtr make_identity() {
    return make_polynomial({Complex(1.0, 0.0)});
}

double radius_hint(const ExprPtr& e) {
    return e->radius_hint();
}

Complex eval_at(const ExprPtr& e, Complex z) {
    if (!(std::abs(z) < e->radius_hint())) {
        throw OutOfDomain("evaluation outside validity radius");
    }
    const auto& node = e->node();
    if (const auto* r = std::get_if<Rotation>(&node)) {
        return std::polar(1.0, r->angle) * z;
    }
    if (const auto* p = std::get_if<Polynomial>(&node)) {
        return poly_eval(p->coeffs, z);
    }
    if (const auto* m = std::get_if<Moebius>(&node)) {
        return (m->a * z) / (m->c * z + m->d);
    }
    if (const auto* c = std::get_if<Compose>(&node)) {
        return eval_at(c->f, eval_at(c->g, z));
    }
    if (const auto* i = std::get_if<Inverse>(&node)) {
        return newton_invert(i->inner, z);
    }
    const auto& cj = std::get<Conjugate>(node);
    return eval_at(cj.by_inverse, eval_at(cj.base, eval_at(cj.by, z)));
}

std::pair<Complex, Complex> eval_with_deriv(const ExprPtr& e, Complex z) {
    if (!(std::abs(z) < e->radius_hint())) {
        throw OutOfDomain("evaluation outside validity radius");
    }
    const auto& node = e->node();
    if (const auto* r = std::get_if<Rotation>(&node)) {
        const Complex u = std::polar(1.0, r->angle);
        return {u * z, u};
    }
    if (const auto* p = std::get_if<Polynomial>(&node)) {
        return {poly_eval(p->coeffs, z), poly_deriv_eval(p->coeffs, z)};
    }
    if (const auto* m = std::get_if<Moebius>(&node)) {
        const Complex den = m->c * z + m->d;
        return {(m->a * z) / den, (m->a * m->d) / (den * den)};
    }
    if (const auto* c = std::get_if<Compose>(&node)) {
        const auto [gv, gd] = eval_with_deriv(c->g, z);
        const auto [fv, fd] = eval_with_deriv(c->f, gv);
        return {fv, fd * gd};
    }
    if (const auto* i = std::get_if<Inverse>(&node)) {
        const Complex w = newton_invert(i->inner, z);
        const Complex dw = eval_with_deriv(i->inner, w).second;
        if (std::abs(dw) < 1e-300) {
            throw NewtonDivergence("inverse derivative: inner derivative vanished");
        }
        return {w, Complex(1.0, 0.0) / dw};
    }
    const auto& cj = std::get<Conjugate>(node);
    const auto [bv, bd] = eval_with_deriv(cj.by, z);
    const auto [gv, gd] = eval_with_deriv(cj.base, bv);
    const auto [hv, hd] = eval_with_deriv(cj.by_inverse, gv);
    return {hv, hd * gd * bd};
}

Jet jet_of_expr(const ExprPtr& e, int order) {
    if (order < 1) throw OrderMismatch("jet order must be at least 1");
    const auto& node = e->node();
    if (const auto* r = std::get_if<Rotation>(&node)) {
        Jet j(order);
        j.coeff(1) = std::polar(1.0, r->angle);
        return j;
    }
    if (const auto* p = std::get_if<Polynomial>(&node)) {
        Jet j(order);
        const int d = std::min<int>(order, static_cast<int>(p->coeffs.size()));
        for (int k = 1; k <= d; ++k) j.coeff(k) = p->coeffs[static_cast<std::size_t>(k - 1)];
        return j;
    }
    if (const auto* m = std::get_if<Moebius>(&node)) {
        // a z / (c z + d) = (a/d) z * sum_j (-c/d)^j z^j
        Jet j(order);
        const Complex lead = m->a / m->d;
        const Complex ratio = -m->c / m->d;
        Complex term = lead;
        for (int k = 1; k <= order; ++k) {
            j.coeff(k) = term;
            term *= ratio;
        }
        return j;
    }
    if (const auto* c = std::get_if<Compose>(&node)) {
        return compose(jet_of_expr(c->f, order), jet_of_expr(c->g, order));
    }
    if (const auto* i = std::get_if<Inverse>(&node)) {
        return invert(jet_of_expr(i->inner, order));
    }
    const auto& cj = std::get<Conjugate>(node);
    return conjugate(jet_of_expr(cj.base, order), jet_of_expr(cj.by, order));
}

namespace {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string format_complex(Complex z) {
    const double re = z.real();
    const double im = z.imag();
    if (im == 0.0) return format_double(re);
    std::string imag_part = format_double(std::abs(im)) + "i";
    if (re == 0.0) return (im < 0.0 ? "-" : "") + imag_part;
    return format_double(re) + (im < 0.0 ? "-" : "+") + imag_part;
}

} // namespace

std::string print_expr(const ExprPtr& e) {
    const auto& node = e->node();
    if (const auto* r = std::get_if<Rotation>(&node)) {
        return "rot(" + format_double(r->angle) + ")";
    }
    if (const auto* p = std::get_if<Polynomial>(&node)) {
        std::string out = "poly(";
        for (std::size_t i = 0; i < p->coeffs.size(); ++i) {
            if (i) out += ",";
            out += format_complex(p->coeffs[i]);
        }
        return out + ")";
    }
    if (const auto* m = std::get_if<Moebius>(&node)) {
        return "moeb(" + format_complex(m->a) + "," + format_complex(m->b) + "," +
               format_complex(m->c) + "," + format_complex(m->d) + ")";
    }
    if (const auto* c = std::get_if<Compose>(&node)) {
        return "comp(" + print_expr(c->f) + "," + print_expr(c->g) + ")";
    }
    if (const auto* i = std::get_if<Inverse>(&node)) {
        return "inv(" + print_expr(i->inner) + ")";
    }
    const auto& cj = std::get<Conjugate>(node);
    return "conj(" + print_expr(cj.base) + "," + print_expr(cj.by) + ")";
}

} // namespace germforge
