#pragma once

#include <memory>
#include <vector>

#include "germforge/jet.hpp"

namespace germforge {

// Interior evaluations of a solved map are trusted to this tolerance at the
// reference resolution of 1024 boundary nodes; symmetry and boundary-modulus
// invariants are checked against it.
inline constexpr double kBoundaryTol = 1e-7;

// Radius and sample count of the circle used for Cauchy-integral jet
// extraction from an evaluable germ.
inline constexpr double kJetRadius = 0.1;
inline constexpr int kJetSamples = 512;

// One quadrature node of a closed boundary, listed counterclockwise.
// `tangent` is the unit tangent of the traversal, `curvature` is signed
// (positive where the boundary bends toward the interior), `weight` is the
// arclength measure of the node's cell and `s` the cumulative arclength of
// the node within the parameterization.
struct BoundaryNode {
    Complex z;
    Complex tangent;
    double curvature = 0.0;
    double weight = 0.0;
    double s = 0.0;
};

// Closed boundary sample of the alpha-neighborhood of (unit disc) union
// (segment [1, delta]): an arc of radius 1+alpha, two lines at height
// +-alpha over the segment, a half-circle cap of radius alpha about delta,
// and fillet arcs of radius alpha/2 smoothing the two reflex corners where
// the lines meet the big arc. Nodes are cosine graded per smooth piece, so
// they cluster at the curvature transitions, and the node set is exactly
// symmetric under complex conjugation. A plain disc (delta = radius,
// alpha = 0) is also representable for solver tests.
struct TeardropDomain {
    double delta = 0.0;
    double alpha = 0.0;
    std::vector<BoundaryNode> nodes;
    double perimeter = 0.0;
};

// Builds the teardrop boundary. Throws GeometryError when alpha is
// non-positive, exceeds (delta-1)/4, or degenerates the tail geometry, and
// SemanticError when node_count < 256.
TeardropDomain build_teardrop(double delta, double alpha, int node_count = 1024);

// Circle of the given radius about 0, bypassing the teardrop geometry so the
// solver can be exercised against maps known in closed form.
TeardropDomain build_disc_domain(double radius, int node_count = 1024);

// Discrete Riemann map phi of the domain interior onto the unit disc with
// phi(0) = 0, phi'(0) > 0. State: the single-layer density sigma and
// constant of the boundary potential u (u = log|z| on the boundary), the
// boundary harmonic conjugate v (v = 0 at the origin by the conjugation
// antisymmetry), and the correspondence theta = arg(z) - v, unwrapped and
// strictly increasing at the nodes. Interior values come from a Cauchy
// quadrature over the per-cell Gauss-Legendre points (gl_z with complex
// measure gl_q = weight * unit tangent and boundary values gl_f = exp(i
// theta)), which keeps the quadrature error of interior evaluations well
// below the node spacing would allow.
struct DiscreteConformalMap {
    TeardropDomain domain;
    std::vector<double> sigma;
    double offset = 0.0;
    std::vector<double> conj_v;
    std::vector<double> theta;
    double u0 = 0.0;  // u(0); phi'(0) = exp(-u0)
    std::vector<Complex> gl_z;
    std::vector<Complex> gl_q;
    std::vector<Complex> gl_f;
};

// Solves the Dirichlet problem for u and assembles the boundary
// correspondence. Throws SolverFailure when the linear system leaves a
// large residual or the correspondence is not monotone (raise node_count).
DiscreteConformalMap riemann_map(const TeardropDomain& domain);

// The solved boundary potential evaluated at an interior point.
double harmonic_u(const DiscreteConformalMap& map, Complex z);

// True when z lies inside the domain, judged by the quadrature winding
// number of the boundary about z.
bool conformal_inside(const DiscreteConformalMap& map, Complex z);

// Interior evaluation, derivative, and Newton inversion of phi. invert
// throws NewtonDivergence when no interior preimage is found.
Complex conformal_eval(const DiscreteConformalMap& map, Complex z);
Complex conformal_deriv(const DiscreteConformalMap& map, Complex z);
Complex conformal_invert(const DiscreteConformalMap& map, Complex w);

// The germ H(z) = phi^{-1}(p z) with p = phi(delta), defined for |z| < 1/p.
// H fixes 0, sends 1 to delta, and tends to the identity as the domain
// shrinks onto its core. For the plain disc domain p = 1 exactly.
struct PerturbationGerm {
    std::shared_ptr<const DiscreteConformalMap> map;
    double p = 1.0;
};

// Computes p and checks it is real within kBoundaryTol (NonRealRatio
// otherwise) and lies in (0, 1] (SolverFailure otherwise).
PerturbationGerm build_perturbation(const DiscreteConformalMap& map);

Complex perturbation_eval(const PerturbationGerm& germ, Complex z);

// Taylor coefficients c_1..c_order of H at 0 by Cauchy integrals over the
// circle |z| = kJetRadius. Throws JetExtractionFailure when a sample cannot
// be evaluated.
Jet perturbation_jet(const PerturbationGerm& germ, int order);

// S o H, where S is the exact compositional inverse of H's order-N jet
// evaluated as a polynomial: tangent to the identity to order N.
struct NormalizedGerm {
    PerturbationGerm base;
    std::vector<Complex> s_coeffs;  // c_1..c_N of S
};

// Throws JetExtractionFailure when H's linear coefficient is too far from 1
// (|c_1 - 1| >= 0.5) for the tangency construction to be meaningful.
NormalizedGerm normalize_tangency(const PerturbationGerm& germ, int order);

Complex normalized_eval(const NormalizedGerm& germ, Complex z);

// Jet of S o H re-extracted numerically from its own evaluations, so the
// identity-to-order-N property is measured, not assumed.
Jet normalized_jet(const NormalizedGerm& germ, int order);

}  // namespace germforge
