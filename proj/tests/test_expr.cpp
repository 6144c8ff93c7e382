#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "germforge/errors.hpp"
#include "germforge/jet.hpp"
#include "germforge/map_expr.hpp"

using germforge::Complex;
using germforge::ExprPtr;
using germforge::Jet;

namespace {

constexpr double kPi = 3.14159265358979323846;

double dist(Complex a, Complex b) { return std::abs(a - b); }

ExprPtr P(const std::string& text) { return germforge::parse_expr(text); }

} // namespace

TEST_CASE("rotation by pi negates") {
    const ExprPtr e = P("rot(pi)");
    CHECK(dist(germforge::eval_at(e, {0.3, 0.0}), {-0.3, 0.0}) < 1e-15);
    CHECK(germforge::eval_at(e, {0.0, 0.0}) == Complex(0.0, 0.0));
    const Jet j = germforge::jet_of_expr(e, 3);
    CHECK(dist(j.coeff(1), {-1.0, 0.0}) < 1e-15);
    CHECK(j.coeff(2) == Complex(0.0, 0.0));
    CHECK(j.coeff(3) == Complex(0.0, 0.0));
}

TEST_CASE("angle arithmetic supports pi, implicit products, and division") {
    CHECK(dist(germforge::eval_at(P("rot(2pi)"), {0.5, 0.0}), {0.5, 0.0}) < 1e-14);
    const Complex z = germforge::eval_at(P("rot(2pi/3)"), {1e-3, 0.0});
    CHECK(dist(z, std::polar(1e-3, 2.0 * kPi / 3.0)) < 1e-18);
    CHECK(dist(germforge::eval_at(P("rot(-pi/2)"), {0.1, 0.0}),
               germforge::eval_at(P("rot(3pi/2)"), {0.1, 0.0})) < 1e-15);
    CHECK(dist(germforge::eval_at(P("rot(pi*(1+1))"), {0.2, 0.0}),
               germforge::eval_at(P("rot(2*pi)"), {0.2, 0.0})) < 1e-15);
    CHECK(dist(germforge::eval_at(P("rot(1e-1)"), {0.2, 0.0}),
               std::polar(1.0, 0.1) * Complex(0.2, 0.0)) < 1e-16);
}

TEST_CASE("polynomial germs evaluate by Horner") {
    const ExprPtr e = P("poly(1, 0.5)");
    CHECK(dist(germforge::eval_at(e, {0.2, 0.0}), {0.22, 0.0}) < 1e-16);
    const Jet j = germforge::jet_of_expr(e, 4);
    CHECK(j.coeff(1) == Complex(1.0, 0.0));
    CHECK(j.coeff(2) == Complex(0.5, 0.0));
    CHECK(j.coeff(3) == Complex(0.0, 0.0));
}

TEST_CASE("complex literals cover all written forms") {
    const Jet j = germforge::jet_of_expr(P("poly(1+2i, -0.5i, 3, -1-i, i)"), 5);
    CHECK(j.coeff(1) == Complex(1.0, 2.0));
    CHECK(j.coeff(2) == Complex(0.0, -0.5));
    CHECK(j.coeff(3) == Complex(3.0, 0.0));
    CHECK(j.coeff(4) == Complex(-1.0, -1.0));
    CHECK(j.coeff(5) == Complex(0.0, 1.0));
}

TEST_CASE("moebius germs fix the origin and expand geometrically") {
    const ExprPtr e = P("moeb(1, 0, 0.5, 1)"); // z / (0.5 z + 1)
    CHECK(dist(germforge::eval_at(e, {0.4, 0.0}), {1.0 / 3.0, 0.0}) < 1e-15);
    const Jet j = germforge::jet_of_expr(e, 5);
    for (int k = 1; k <= 5; ++k) {
        CHECK(dist(j.coeff(k), std::pow(Complex(-0.5, 0.0), k - 1)) < 1e-15);
    }
}

TEST_CASE("semantic validation rejects degenerate germs") {
    CHECK_THROWS_AS(P("poly(0, 1)"), germforge::SemanticError);
    CHECK_THROWS_AS(P("moeb(1, 1, 0.5, 1)"), germforge::SemanticError); // moves the origin
    CHECK_THROWS_AS(P("moeb(0, 0, 0.5, 1)"), germforge::SemanticError); // not invertible
}

TEST_CASE("syntax errors carry byte positions") {
    try {
        P("foo(1)");
        FAIL("expected SyntaxError");
    } catch (const germforge::SyntaxError& e) {
        CHECK(e.position() == 0);
    }
    try {
        P("rot(pi");
        FAIL("expected SyntaxError");
    } catch (const germforge::SyntaxError& e) {
        CHECK(e.position() == 6);
        CHECK(e.expected() == "')'");
    }
    try {
        P("rot(pi) junk");
        FAIL("expected SyntaxError");
    } catch (const germforge::SyntaxError& e) {
        CHECK(e.position() == 8);
    }
    CHECK_THROWS_AS(P("poly()"), germforge::SyntaxError);
    CHECK_THROWS_AS(P("poly(1,)"), germforge::SyntaxError);
    CHECK_THROWS_AS(P("comp(rot(pi))"), germforge::SyntaxError);
}

TEST_CASE("every germ fixes the origin exactly") {
    for (const char* text : {"rot(0.7)", "poly(2, -0.3, 0.1)", "moeb(2, 0, 1, 3)",
                             "comp(poly(1,1), rot(pi))", "inv(poly(1, 0.25))",
                             "conj(poly(1,0,0.1), rot(2pi/3))"}) {
        CHECK(germforge::eval_at(P(text), {0.0, 0.0}) == Complex(0.0, 0.0));
    }
}

TEST_CASE("inverse evaluation solves the quadratic to Newton tolerance") {
    const ExprPtr e = P("inv(poly(1, 1))");
    const Complex got = germforge::eval_at(e, {0.06, 0.0});
    const double want = (-1.0 + std::sqrt(1.24)) / 2.0; // w + w^2 = 0.06, branch near 0
    CHECK(dist(got, {want, 0.0}) < 1e-13);

    // complex target
    const Complex target(0.03, 0.02);
    const Complex w = germforge::eval_at(e, target);
    CHECK(dist(w + w * w, target) < 1e-13);
}

TEST_CASE("inverse of inverse simplifies away") {
    const ExprPtr inner = P("poly(1, 0.3)");
    const ExprPtr twice = germforge::make_inverse(germforge::make_inverse(inner));
    CHECK(germforge::print_expr(twice) == germforge::print_expr(inner));
}

TEST_CASE("jets of composites match hand expansions") {
    const Jet c = germforge::jet_of_expr(P("comp(poly(1,1), poly(1,1))"), 3);
    CHECK(dist(c.coeff(1), {1.0, 0.0}) < 1e-15);
    CHECK(dist(c.coeff(2), {2.0, 0.0}) < 1e-15);
    CHECK(dist(c.coeff(3), {2.0, 0.0}) < 1e-15);

    const Jet inv = germforge::jet_of_expr(P("inv(poly(1,1))"), 4);
    const std::vector<double> catalan = {1.0, -1.0, 2.0, -5.0};
    for (int k = 1; k <= 4; ++k) {
        CHECK(dist(inv.coeff(k), {catalan[static_cast<std::size_t>(k - 1)], 0.0}) < 1e-12);
    }

    // h^-1(f(h z)) with f = z + 0.1 z^3, h = e^{i theta} z rotates c_3 by e^{2 i theta}
    const Jet conj = germforge::jet_of_expr(P("conj(poly(1,0,0.1), rot(2pi/3))"), 3);
    const Complex want = Complex(0.1, 0.0) * std::polar(1.0, 4.0 * kPi / 3.0);
    CHECK(dist(conj.coeff(1), {1.0, 0.0}) < 1e-14);
    CHECK(dist(conj.coeff(3), want) < 1e-14);
}

TEST_CASE("jet round trip: inverse jet composes to the identity") {
    const ExprPtr e = P("comp(poly(1, 0.2, -0.1), moeb(1, 0, 0.3, 1))");
    const Jet f = germforge::jet_of_expr(e, 10);
    const Jet g = germforge::jet_of_expr(germforge::make_inverse(e), 10);
    CHECK(germforge::is_identity(germforge::compose(f, g), 1e-10));
}

TEST_CASE("print and parse round-trip to identical jets") {
    for (const char* text : {"rot(2pi/3)", "poly(1, 0.5)", "poly(2i, 0, -0.25)",
                             "moeb(1, 0, 0.5, 1)", "comp(poly(1,1), rot(pi))",
                             "inv(poly(1, 0.3))", "conj(poly(1,0,0.1), rot(2pi/3))"}) {
        const ExprPtr a = P(text);
        const ExprPtr b = P(germforge::print_expr(a));
        const Jet ja = germforge::jet_of_expr(a, 10);
        const Jet jb = germforge::jet_of_expr(b, 10);
        for (int k = 1; k <= 10; ++k) {
            CHECK(dist(ja.coeff(k), jb.coeff(k)) <= 1e-12 * std::max(1.0, std::abs(ja.coeff(k))));
        }
        CHECK(germforge::print_expr(b) == germforge::print_expr(a));
    }
}

TEST_CASE("validity radii follow the declared heuristics") {
    CHECK(germforge::radius_hint(P("rot(0.3)")) == std::numeric_limits<double>::infinity());
    CHECK(germforge::radius_hint(P("poly(2)")) == std::numeric_limits<double>::infinity());

    // |d/dz (z+z^2)| = |1+2z| first dips below 0.1 near r = 0.45
    const double r_poly = germforge::radius_hint(P("poly(1,1)"));
    CHECK(r_poly > 0.44);
    CHECK(r_poly < 0.47);

    // pole of z/(0.5z+1) at |z| = 2
    const double r_moeb = germforge::radius_hint(P("moeb(1, 0, 0.5, 1)"));
    CHECK(r_moeb > 1.9);
    CHECK(r_moeb <= 2.0);

    // image of the inverse: roughly r(1-r) at r ~ 0.45
    const double r_inv = germforge::radius_hint(P("inv(poly(1,1))"));
    CHECK(r_inv > 0.2);
    CHECK(r_inv < 0.3);
}

TEST_CASE("compose radius never exceeds the inner germ's radius") {
    const ExprPtr g = P("poly(1, 0.5)");
    const ExprPtr e = P("comp(poly(1,1), poly(1,0.5))");
    CHECK(germforge::radius_hint(e) <= germforge::radius_hint(g));
    // sup |g| on the chosen circle must fit inside hint(f) ~ 0.45
    const double r = germforge::radius_hint(e);
    CHECK(r > 0.3);
    CHECK(r + 0.5 * r * r < germforge::radius_hint(P("poly(1,1)")));
}

TEST_CASE("evaluation outside the validity radius is rejected") {
    CHECK_THROWS_AS(germforge::eval_at(P("poly(1,1)"), {0.5, 0.0}), germforge::OutOfDomain);
    CHECK_THROWS_AS(germforge::eval_at(P("moeb(1,0,0.5,1)"), {2.5, 0.0}), germforge::OutOfDomain);
}

TEST_CASE("derivatives agree with central differences") {
    const std::vector<const char*> exprs = {
        "comp(poly(1,1), moeb(1, 0, 0.5, 1))",
        "conj(poly(1, 0.2), rot(pi/3))",
        "inv(poly(1, 0.25))",
    };
    const Complex z(0.08, -0.05);
    const double h = 1e-6;
    for (const char* text : exprs) {
        const ExprPtr e = P(text);
        const auto [value, deriv] = germforge::eval_with_deriv(e, z);
        CHECK(dist(value, germforge::eval_at(e, z)) < 1e-12);
        const Complex fd = (germforge::eval_at(e, z + Complex(h, 0.0)) -
                            germforge::eval_at(e, z - Complex(h, 0.0))) /
                           Complex(2.0 * h, 0.0);
        CHECK(dist(deriv, fd) < 1e-6 * std::max(1.0, std::abs(deriv)));
    }
}

TEST_CASE("pointwise evaluation matches the truncated Taylor series") {
    const ExprPtr e = P("comp(poly(1,1), poly(1,0.5))");
    const Jet j = germforge::jet_of_expr(e, 12);
    const Complex z(0.05, 0.02);
    CHECK(dist(germforge::eval_at(e, z), germforge::eval_polynomial(j.coeffs(), z)) < 1e-12);
}

TEST_CASE("derivative at the origin is nonzero for constructed germs") {
    for (const char* text : {"rot(1.0)", "poly(3, 1)", "moeb(2, 0, 1, 5)",
                             "inv(poly(1, 0.5))", "conj(poly(1, 0.1), poly(1, 0.2))"}) {
        const Jet j = germforge::jet_of_expr(P(text), 1);
        CHECK(std::abs(j.coeff(1)) > 0.0);
    }
}
