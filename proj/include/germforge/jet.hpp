#pragma once

#include <complex>
#include <vector>

namespace germforge {

using Complex = std::complex<double>;

// Truncated Taylor expansion at 0 of a holomorphic germ fixing 0:
//   f(z) = c_1 z + c_2 z^2 + ... + c_N z^N   (no constant term).
// Coefficients are stored with coeff(1) = c_1. A jet is invertible for
// composition when c_1 != 0.
class Jet {
public:
    Jet() = default;
    explicit Jet(int order) : c_(order, Complex(0.0, 0.0)) {}
    Jet(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {}

    static Jet identity(int order);

    int order() const { return static_cast<int>(c_.size()); }

    // 1-based: coeff(k) is the coefficient of z^k, 1 <= k <= order().
    Complex coeff(int k) const { return c_[static_cast<std::size_t>(k - 1)]; }
    Complex& coeff(int k) { return c_[static_cast<std::size_t>(k - 1)]; }

    const std::vector<Complex>& coeffs() const { return c_; }

private:
    std::vector<Complex> c_;
};

// f after g: (compose(f, g))(z) = f(g(z)), truncated to the common order.
// Throws OrderMismatch when the orders differ.
Jet compose(const Jet& f, const Jet& g);

// Compositional inverse: compose(f, invert(f)) = identity to the jet order.
// Throws NotInvertible when c_1 = 0.
Jet invert(const Jet& f);

// h^{-1} after g after h.
Jet conjugate(const Jet& g, const Jet& h);

// k-fold composition power; negative k composes the inverse, k = 0 is the identity.
Jet power(const Jet& f, int k);

// Drop coefficients above new_order (new_order <= order).
Jet truncate(const Jet& f, int new_order);

// |c_1 - 1| <= tol and |c_k| <= tol for k >= 2.
bool is_identity(const Jet& f, double tol);

// Largest coefficient magnitude (used for relative identity tolerances).
double max_coeff_magnitude(const Jet& f);

// sup |p(z)| over the circle |z| = r, sampled at 4096 equispaced points
// starting at angle 0. `coeffs` lists c_1..c_d of a polynomial fixing 0.
double sup_norm_on_disc(const std::vector<Complex>& coeffs, double r);

// Horner evaluation of c_1 z + ... + c_d z^d.
Complex eval_polynomial(const std::vector<Complex>& coeffs, Complex z);

} // namespace germforge
