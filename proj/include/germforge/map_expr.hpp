#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "germforge/jet.hpp"

namespace germforge {

class MapExpr;
using ExprPtr = std::shared_ptr<const MapExpr>;

// z -> e^{i angle} z
struct Rotation {
    double angle;
};

// z -> c_1 z + c_2 z^2 + ... + c_d z^d, c_1 != 0
struct Polynomial {
    std::vector<Complex> coeffs;
};

// z -> (a z + b) / (c z + d); restricted to b = 0 so the origin is fixed,
// with a d != 0.
struct Moebius {
    Complex a, b, c, d;
};

// (f, g) -> f(g(z))
struct Compose {
    ExprPtr f, g;
};

// Compositional inverse, evaluated by damped Newton iteration.
struct Inverse {
    ExprPtr inner;
};

// (base, by) -> by^{-1}(base(by(z))). `by_inverse` caches the simplified
// inverse of `by` so evaluation does not re-derive it.
struct Conjugate {
    ExprPtr base, by;
    ExprPtr by_inverse;
};

// Expression tree for a holomorphic germ fixing 0. Immutable; nodes are
// shared freely across threads. Each node carries a conservative validity
// radius (radius_hint): evaluation requires |z| < radius_hint.
class MapExpr {
public:
    using Node = std::variant<Rotation, Polynomial, Moebius, Compose, Inverse, Conjugate>;

    MapExpr(Node node, double radius_hint)
        : node_(std::move(node)), radius_hint_(radius_hint) {}

    const Node& node() const { return node_; }
    double radius_hint() const { return radius_hint_; }

private:
    Node node_;
    double radius_hint_;
};

ExprPtr make_rotation(double angle);
ExprPtr make_polynomial(std::vector<Complex> coeffs);
ExprPtr make_moebius(Complex a, Complex b, Complex c, Complex d);
ExprPtr make_compose(ExprPtr f, ExprPtr g);
ExprPtr make_inverse(ExprPtr inner); // simplifies inverse-of-inverse
ExprPtr make_conjugate(ExprPtr base, ExprPtr by);
ExprPtr make_identity();

double radius_hint(const ExprPtr& e);

// Evaluate at z. Requires |z| < radius_hint; throws OutOfDomain otherwise,
// NewtonDivergence when an Inverse node fails to converge.
Complex eval_at(const ExprPtr& e, Complex z);

// Value and complex derivative at z.
std::pair<Complex, Complex> eval_with_deriv(const ExprPtr& e, Complex z);

// Order-N jet at the origin via structural recursion.
Jet jet_of_expr(const ExprPtr& e, int order);

// Canonical text form; parse_expr(print_expr(e)) reproduces the same germ.
std::string print_expr(const ExprPtr& e);

// Parse the expression grammar:
//   expr  := rot(angle) | poly(c1,...) | moeb(a,b,c,d) | comp(expr,expr)
//          | inv(expr) | conj(expr,expr)
//   angle := real arithmetic with numbers, pi, + - * /, parentheses
//   ck    := complex literal "a", "bi", "a+bi", "a-bi"
// Throws SyntaxError with a position, SemanticError for invalid germs.
ExprPtr parse_expr(const std::string& text);

} // namespace germforge
