#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "germforge/conformal.hpp"
#include "germforge/errors.hpp"
#include "germforge/jet.hpp"
#include "germforge/parallel.hpp"
#include "germforge/rng.hpp"

using namespace germforge;

namespace {

// ---------------------------------------------------------------------------
// Independent walk-on-spheres oracle for the Dirichlet problem that the
// conformal solver discretizes: u harmonic inside the teardrop with boundary
// values log|z|. It re-derives the boundary from (delta, alpha) analytically
// and never touches the solver's quadrature, so agreement is meaningful.

struct TearGeom {
    double delta, alpha, big_r, fil_r, xf, cen_h, theta_t;
};

TearGeom tear_geom(double delta, double alpha) {
    TearGeom g;
    g.delta = delta;
    g.alpha = alpha;
    g.big_r = 1.0 + alpha;
    g.fil_r = alpha / 2.0;
    const double cd = g.big_r + g.fil_r;
    g.cen_h = alpha + g.fil_r;
    g.xf = std::sqrt(cd * cd - g.cen_h * g.cen_h);
    g.theta_t = std::atan2(g.cen_h, g.xf);
    return g;
}

double dist_to_arc(Complex z, Complex center, double radius, double a0, double a1) {
    const Complex v = z - center;
    const double a = std::arg(v);
    if (a >= a0 && a <= a1) return std::abs(std::abs(v) - radius);
    const Complex e0 = center + radius * Complex(std::cos(a0), std::sin(a0));
    const Complex e1 = center + radius * Complex(std::cos(a1), std::sin(a1));
    return std::min(std::abs(z - e0), std::abs(z - e1));
}

double dist_to_segment(Complex z, Complex a, Complex b) {
    const Complex ab = b - a;
    const double t = std::clamp(((z - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
    return std::abs(z - (a + t * ab));
}

double dist_to_boundary(const TearGeom& g, Complex z) {
    // Big arc is active for |angle| >= theta_t; fold the angle test instead
    // of wrapping ranges.
    double d;
    const double az = std::abs(std::arg(z));
    if (az >= g.theta_t) {
        d = std::abs(std::abs(z) - g.big_r);
    } else {
        const Complex e(g.big_r * std::cos(g.theta_t), g.big_r * std::sin(g.theta_t));
        d = std::min(std::abs(z - e), std::abs(z - std::conj(e)));
    }
    d = std::min(d, dist_to_segment(z, Complex(g.xf, g.alpha), Complex(g.delta, g.alpha)));
    d = std::min(d, dist_to_segment(z, Complex(g.xf, -g.alpha), Complex(g.delta, -g.alpha)));
    const Complex fc(g.xf, g.cen_h);
    d = std::min(d, dist_to_arc(z, fc, g.fil_r, g.theta_t - M_PI, -M_PI / 2.0));
    d = std::min(d, dist_to_arc(z, std::conj(fc), g.fil_r, M_PI / 2.0, M_PI - g.theta_t));
    d = std::min(d, dist_to_arc(z, Complex(g.delta, 0.0), g.alpha, -M_PI / 2.0, M_PI / 2.0));
    return d;
}

struct WosEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

WosEstimate wos_log_modulus(const TearGeom& g, Complex z0, int walks,
                            std::uint64_t stream) {
    constexpr double kEps = 5e-5;
    constexpr std::uint64_t kStepsPerWalk = 4096;
    const CounterRng rng(20240815u, stream);
    std::vector<double> value(static_cast<std::size_t>(walks));
    parallel_for(static_cast<std::size_t>(walks), [&](std::size_t w) {
        Complex z = z0;
        for (std::uint64_t step = 0; step < kStepsPerWalk; ++step) {
            const double d = dist_to_boundary(g, z);
            if (d < kEps) break;
            const double a =
                2.0 * M_PI * rng.uniform(static_cast<std::uint64_t>(w) * kStepsPerWalk + step);
            z += d * Complex(std::cos(a), std::sin(a));
        }
        value[w] = std::log(std::abs(z));
    });
    WosEstimate est;
    for (double v : value) est.mean += v;
    est.mean /= walks;
    double var = 0.0;
    for (double v : value) var += (v - est.mean) * (v - est.mean);
    est.stderr_ = std::sqrt(var / walks / std::max(1, walks - 1));
    return est;
}

// Shoelace area of the sampled boundary polygon.
double polygon_area(const std::vector<BoundaryNode>& nodes) {
    double twice = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Complex a = nodes[i].z;
        const Complex b = nodes[(i + 1) % nodes.size()].z;
        twice += a.real() * b.imag() - b.real() * a.imag();
    }
    return twice / 2.0;
}

bool segments_cross(Complex a, Complex b, Complex c, Complex d) {
    const auto orient = [](Complex p, Complex q, Complex r) {
        const double v = (q - p).real() * (r - p).imag() - (q - p).imag() * (r - p).real();
        return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    };
    return orient(a, b, c) != orient(a, b, d) && orient(c, d, a) != orient(c, d, b);
}

double sup_deviation_from_identity(const PerturbationGerm& germ, double radius) {
    double sup = 0.0;
    for (int k = 0; k < 256; ++k) {
        const double a = 2.0 * M_PI * k / 256.0;
        const Complex z = radius * Complex(std::cos(a), std::sin(a));
        sup = std::max(sup, std::abs(perturbation_eval(germ, z) - z));
    }
    return sup;
}

}  // namespace

TEST_CASE("teardrop boundary is a symmetric simple loop around the origin") {
    const TeardropDomain dom = build_teardrop(1.2, 0.02, 512);
    const std::size_t n = dom.nodes.size();
    CHECK(n >= 500);

    // Exact conjugation symmetry, positive weights, increasing arclength.
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(dom.nodes[i].z == std::conj(dom.nodes[n - 1 - i].z));
        CHECK(dom.nodes[i].tangent == -std::conj(dom.nodes[n - 1 - i].tangent));
        CHECK(dom.nodes[i].weight > 0.0);
        if (i > 0) CHECK(dom.nodes[i].s > dom.nodes[i - 1].s);
        weight_sum += dom.nodes[i].weight;
    }
    CHECK(weight_sum == doctest::Approx(dom.perimeter).epsilon(1e-12));

    CHECK(polygon_area(dom.nodes) > M_PI);

    // Winding number one about the origin.
    double winding = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        winding += std::arg(dom.nodes[(i + 1) % n].z / dom.nodes[i].z);
    }
    CHECK(winding == doctest::Approx(2.0 * M_PI).epsilon(1e-9));

    // Simple closed curve at sampled resolution.
    bool crossing = false;
    for (std::size_t i = 0; i < n && !crossing; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // shared endpoint
            if (segments_cross(dom.nodes[i].z, dom.nodes[i + 1].z, dom.nodes[j].z,
                               dom.nodes[(j + 1) % n].z)) {
                crossing = true;
                break;
            }
        }
    }
    CHECK_FALSE(crossing);
}

TEST_CASE("teardrop construction rejects degenerate shapes") {
    CHECK_THROWS_AS(build_teardrop(1.2, 0.0, 512), GeometryError);
    CHECK_THROWS_AS(build_teardrop(1.2, -0.01, 512), GeometryError);
    CHECK_THROWS_AS(build_teardrop(1.2, 0.06, 512), GeometryError);
    CHECK_THROWS_AS(build_teardrop(1.0, 0.01, 512), GeometryError);
    CHECK_THROWS_AS(build_teardrop(0.9, 0.01, 512), GeometryError);
    CHECK_THROWS_AS(build_teardrop(1.2, 0.02, 128), SemanticError);
    // The boundary width (delta - 1)/4 itself is allowed.
    CHECK_NOTHROW(build_teardrop(1.2, 0.05, 512));
}

TEST_CASE("disc domains reproduce homotheties") {
    const std::vector<Complex> probes = {Complex(0.3, 0.1), Complex(-0.55, 0.2),
                                         Complex(0.0, 0.7), Complex(0.1, -0.4),
                                         Complex(0.0, 0.0)};
    {
        const DiscreteConformalMap map = riemann_map(build_disc_domain(1.0, 512));
        for (Complex z : probes) CHECK(std::abs(conformal_eval(map, z) - z) < 1e-8);
        CHECK(std::abs(conformal_deriv(map, Complex(0, 0)) - Complex(1, 0)) < 1e-8);
        CHECK(map.u0 == doctest::Approx(0.0).epsilon(1e-10));
    }
    {
        const DiscreteConformalMap map = riemann_map(build_disc_domain(2.0, 512));
        for (Complex z : probes) CHECK(std::abs(conformal_eval(map, z) - z / 2.0) < 1e-8);
        CHECK(map.u0 == doctest::Approx(std::log(2.0)).epsilon(1e-10));
        // Newton inversion round trip.
        for (Complex z : probes) {
            if (std::abs(z) >= 1.0) continue;
            CHECK(std::abs(conformal_invert(map, z) - 2.0 * z) < 1e-8);
        }
    }
}

TEST_CASE("riemann map of a teardrop satisfies the boundary invariants") {
    const DiscreteConformalMap map = riemann_map(build_teardrop(1.2, 0.05, 1024));

    // Monotone correspondence spanning a single revolution.
    for (std::size_t i = 1; i < map.theta.size(); ++i) CHECK(map.theta[i] > map.theta[i - 1]);
    CHECK(map.theta.back() - map.theta.front() < 2.0 * M_PI);

    CHECK(std::abs(conformal_eval(map, Complex(0, 0))) < 5e-6);
    const Complex d0 = conformal_deriv(map, Complex(0, 0));
    CHECK(d0.real() > 0.0);
    CHECK(std::abs(d0.imag()) < 1e-7);
    CHECK(std::abs(d0 - std::exp(-map.u0)) < 1e-7);

    const std::vector<Complex> probes = {Complex(0.5, 0.0), Complex(-0.3, 0.4),
                                         Complex(0.2, -0.6), Complex(0.9, 0.0),
                                         Complex(1.1, 0.0)};
    for (Complex z : probes) {
        const Complex w = conformal_eval(map, z);
        CHECK(std::abs(w) < 1.0);
        // Conjugation symmetry.
        CHECK(std::abs(conformal_eval(map, std::conj(z)) - std::conj(w)) < 1e-7);
        // The Cauchy representation and the potential representation of the
        // same map must agree: |phi| = |z| exp(-u). The potential side uses
        // a plain node-point rule, which limits the match.
        if (std::abs(z) > 0.0) {
            CHECK(std::abs(std::abs(w) - std::abs(z) * std::exp(-harmonic_u(map, z))) < 2e-5);
        }
    }
}

TEST_CASE("walk on spheres agrees with the solved potential") {
    const double delta = 1.2, alpha = 0.05;
    const DiscreteConformalMap map = riemann_map(build_teardrop(delta, alpha, 1024));
    const TearGeom geom = tear_geom(delta, alpha);

    const std::vector<Complex> probes = {Complex(0.5, 0.0), Complex(-0.3, 0.4),
                                         Complex(1.1, 0.0)};
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Complex z = probes[i];
        const WosEstimate est = wos_log_modulus(geom, z, 200000, i);
        const double from_map = std::abs(conformal_eval(map, z));
        const double from_wos = std::abs(z) * std::exp(-est.mean);
        // Propagate the standard error of u through the exponential.
        const double tol = 3.0 * est.stderr_ * from_wos;
        INFO("z = " << z << " map " << from_map << " wos " << from_wos << " tol " << tol);
        CHECK(std::abs(from_map - from_wos) < tol);
    }
}

TEST_CASE("perturbation germ sends 1 to delta") {
    const DiscreteConformalMap map = riemann_map(build_teardrop(1.2, 0.05, 1024));
    const PerturbationGerm germ = build_perturbation(map);
    CHECK(germ.p > 0.0);
    CHECK(germ.p < 1.0);
    CHECK(std::abs(perturbation_eval(germ, Complex(1, 0)) - Complex(1.2, 0)) < 1e-6);
    CHECK(std::abs(perturbation_eval(germ, Complex(0, 0))) < 5e-6);
    // Real on the real axis by symmetry.
    CHECK(std::abs(perturbation_eval(germ, Complex(0.5, 0)).imag()) < 1e-7);
}

TEST_CASE("perturbations tend to the identity as the neighborhood shrinks") {
    const double alphas[3] = {0.05, 0.02, 0.01};
    double prev_p = 0.0;
    double prev_sup = 1e9;
    for (double alpha : alphas) {
        const PerturbationGerm germ =
            build_perturbation(riemann_map(build_teardrop(1.2, alpha, 1024)));
        // Past the neck the map flattens exponentially in 1/alpha, so the
        // tail-end evaluation is only well conditioned for the wider tails.
        if (alpha >= 0.02) {
            CHECK(std::abs(perturbation_eval(germ, Complex(1, 0)) - Complex(1.2, 0)) < 1e-6);
        }
        const double sup = sup_deviation_from_identity(germ, 0.8);
        CHECK(germ.p > prev_p);
        CHECK(sup < prev_sup);
        prev_p = germ.p;
        prev_sup = sup;
    }
    CHECK(prev_p < 1.0);
}

TEST_CASE("disc hook perturbation is a homothety germ") {
    {
        const PerturbationGerm germ =
            build_perturbation(riemann_map(build_disc_domain(1.0, 512)));
        CHECK(germ.p == 1.0);
        CHECK(std::abs(perturbation_eval(germ, Complex(0.4, 0.2)) - Complex(0.4, 0.2)) < 1e-8);
        const Jet jet = perturbation_jet(germ, 4);
        CHECK(std::abs(jet.coeff(1) - Complex(1, 0)) < 1e-9);
        for (int k = 2; k <= 4; ++k) CHECK(std::abs(jet.coeff(k)) < 1e-9);
    }
    {
        const PerturbationGerm germ =
            build_perturbation(riemann_map(build_disc_domain(2.0, 512)));
        const Jet jet = perturbation_jet(germ, 3);
        CHECK(std::abs(jet.coeff(1) - Complex(2, 0)) < 1e-9);
        CHECK(std::abs(jet.coeff(2)) < 1e-9);
        // c_1 far from 1: the tangency construction must refuse.
        CHECK_THROWS_AS(normalize_tangency(germ, 3), JetExtractionFailure);
    }
}

TEST_CASE("tangency normalization flattens the jet") {
    {
        const NormalizedGerm tangent = normalize_tangency(
            build_perturbation(riemann_map(build_disc_domain(1.0, 512))), 4);
        const Jet jet = normalized_jet(tangent, 4);
        CHECK(is_identity(jet, 1e-8));
    }
    {
        const PerturbationGerm germ =
            build_perturbation(riemann_map(build_teardrop(1.2, 0.02, 1024)));
        const NormalizedGerm tangent = normalize_tangency(germ, 5);
        const Jet jet = normalized_jet(tangent, 5);
        INFO("jet deviation " << max_coeff_magnitude(jet));
        CHECK(std::abs(jet.coeff(1) - Complex(1, 0)) < 1e-8);
        for (int k = 2; k <= 5; ++k) CHECK(std::abs(jet.coeff(k)) < 1e-8);
        // The normalized germ still moves 1 close to delta.
        const Complex at_one = normalized_eval(tangent, Complex(1, 0));
        CHECK(std::abs(at_one.imag()) < 1e-6);
        CHECK(at_one.real() > 1.0);
    }
}
