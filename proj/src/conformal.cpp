#include "germforge/conformal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "germforge/errors.hpp"
#include "germforge/parallel.hpp"

namespace germforge {

namespace {

// One analytic boundary piece, parameterized affinely on [0, 1]. Arcs store
// signed angle sweeps, so the traversal direction (and with it the sign of
// the curvature) is part of the data.
struct Piece {
    bool is_arc = false;
    Complex center;
    double radius = 0.0;
    double angle_from = 0.0;
    double angle_to = 0.0;
    Complex seg_from;
    Complex seg_to;

    double length() const {
        return is_arc ? radius * std::abs(angle_to - angle_from) : std::abs(seg_to - seg_from);
    }
    double curvature() const {
        if (!is_arc) return 0.0;
        return (angle_to > angle_from ? 1.0 : -1.0) / radius;
    }
    Complex point(double t) const {
        if (!is_arc) return seg_from + t * (seg_to - seg_from);
        const double a = angle_from + t * (angle_to - angle_from);
        return center + radius * Complex(std::cos(a), std::sin(a));
    }
    Complex tangent(double t) const {
        if (!is_arc) return (seg_to - seg_from) / std::abs(seg_to - seg_from);
        const double a = angle_from + t * (angle_to - angle_from);
        const Complex radial(std::cos(a), std::sin(a));
        return (angle_to > angle_from ? Complex(0, 1) : Complex(0, -1)) * radial;
    }
};

Piece make_arc(Complex center, double radius, double a0, double a1) {
    Piece p;
    p.is_arc = true;
    p.center = center;
    p.radius = radius;
    p.angle_from = a0;
    p.angle_to = a1;
    return p;
}

Piece make_segment(Complex from, Complex to) {
    Piece p;
    p.seg_from = from;
    p.seg_to = to;
    return p;
}

// One quadrature cell: a parameter subinterval [t0, t1] of a piece together
// with the collocation node parameter tn inside it.
struct Cell {
    int piece = 0;
    double t0 = 0.0;
    double tn = 0.0;
    double t1 = 0.0;
};

struct Decomposition {
    std::vector<Piece> pieces;
    std::vector<Cell> cells;
};

// Chebyshev-style cell partition of [0, 1]: cells shrink quadratically
// toward both piece ends (the curvature transitions), and the node is the
// image of the grading-parameter midpoint, so it never lands on a junction.
void append_cosine_cells(int piece, int count, std::vector<Cell>& out) {
    for (int k = 0; k < count; ++k) {
        Cell c;
        c.piece = piece;
        c.t0 = 0.5 * (1.0 - std::cos(M_PI * k / count));
        c.tn = 0.5 * (1.0 - std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * count)));
        c.t1 = 0.5 * (1.0 - std::cos(M_PI * (k + 1.0) / count));
        out.push_back(c);
    }
}

void append_uniform_cells(int piece, int count, std::vector<Cell>& out) {
    for (int k = 0; k < count; ++k) {
        Cell c;
        c.piece = piece;
        c.t0 = static_cast<double>(k) / count;
        c.tn = (k + 0.5) / count;
        c.t1 = (k + 1.0) / count;
        out.push_back(c);
    }
}

Decomposition teardrop_decomposition(double delta, double alpha, int node_count) {
    if (!(delta > 1.0)) throw GeometryError("teardrop requires delta > 1");
    if (!(alpha > 0.0)) {
        throw GeometryError("teardrop requires alpha > 0 (the slit limit is not supported)");
    }
    if (alpha > (delta - 1.0) / 4.0 + 1e-12) {
        throw GeometryError("alpha exceeds (delta - 1)/4; the tail would degenerate");
    }
    if (node_count < 256) throw SemanticError("teardrop node_count must be at least 256");

    const double big_r = 1.0 + alpha;
    const double fillet_r = alpha / 2.0;
    // Fillet circles are tangent to the big circle from outside and to the
    // tail lines from above/below, rounding the two reflex corners.
    const double center_dist = big_r + fillet_r;
    const double center_h = alpha + fillet_r;
    const double x_f = std::sqrt(center_dist * center_dist - center_h * center_h);
    const Complex fillet_c(x_f, center_h);
    const double theta_t = std::atan2(center_h, x_f);
    if (!(x_f < delta - 1e-9)) {
        throw GeometryError("alpha too large: the neck fillet swallows the tail segment");
    }

    Decomposition dec;
    dec.pieces = {
        make_arc(Complex(delta, 0.0), alpha, 0.0, M_PI / 2.0),        // upper half cap
        make_segment(Complex(delta, alpha), Complex(x_f, alpha)),     // top line
        make_arc(fillet_c, fillet_r, -M_PI / 2.0, theta_t - M_PI),    // top fillet
        make_arc(Complex(0.0, 0.0), big_r, theta_t, 2.0 * M_PI - theta_t),  // big arc
        make_arc(std::conj(fillet_c), fillet_r, M_PI - theta_t, M_PI / 2.0),  // bottom fillet
        make_segment(Complex(x_f, -alpha), Complex(delta, -alpha)),   // bottom line
        make_arc(Complex(delta, 0.0), alpha, -M_PI / 2.0, 0.0),       // lower half cap
    };

    // Node allocation: sublinear in length so the short high-curvature
    // pieces keep enough resolution, remainder on the big arc. Mirror pieces
    // get identical counts, keeping the cell layout conjugation-symmetric.
    const double share_cap = std::pow(dec.pieces[0].length(), 2.0 / 3.0);
    const double share_seg = std::pow(dec.pieces[1].length(), 2.0 / 3.0);
    const double share_fil = std::pow(dec.pieces[2].length(), 2.0 / 3.0);
    const double share_arc = std::pow(dec.pieces[3].length(), 2.0 / 3.0);
    const double denom = 2.0 * (share_cap + share_seg + share_fil) + share_arc;
    const auto allocate = [&](double share) {
        return std::max(16, static_cast<int>(std::lround(node_count * share / denom)));
    };
    const int m_cap = allocate(share_cap);
    const int m_seg = allocate(share_seg);
    const int m_fil = allocate(share_fil);
    const int m_arc = node_count - 2 * (m_cap + m_seg + m_fil);
    if (m_arc < 32) throw SemanticError("node_count too small for this geometry");
    const int counts[7] = {m_cap, m_seg, m_fil, m_arc, m_fil, m_seg, m_cap};
    for (int p = 0; p < 7; ++p) append_cosine_cells(p, counts[p], dec.cells);
    return dec;
}

Decomposition disc_decomposition(double radius, int node_count) {
    if (!(radius > 0.0)) throw GeometryError("disc radius must be positive");
    if (node_count < 256) throw SemanticError("disc node_count must be at least 256");
    Decomposition dec;
    dec.pieces = {make_arc(Complex(0.0, 0.0), radius, -M_PI, M_PI)};
    append_uniform_cells(0, node_count, dec.cells);
    return dec;
}

// Makes the node set bit-exact under conjugation: the layout pairs node i
// with node N-1-i, and an odd middle node lies on the real axis.
void enforce_conjugation_symmetry(std::vector<BoundaryNode>& nodes) {
    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        const BoundaryNode& a = nodes[i];
        BoundaryNode& b = nodes[n - 1 - i];
        b.z = std::conj(a.z);
        b.tangent = -std::conj(a.tangent);
        b.curvature = a.curvature;
        b.weight = a.weight;
    }
    if (n % 2 == 1) {
        BoundaryNode& mid = nodes[n / 2];
        mid.z = Complex(mid.z.real(), 0.0);
        mid.tangent = Complex(0.0, mid.tangent.imag() < 0.0 ? -1.0 : 1.0);
    }
}

double total_winding(const std::vector<BoundaryNode>& nodes) {
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Complex a = nodes[i].z;
        const Complex b = nodes[(i + 1) % nodes.size()].z;
        total += std::arg(b / a);
    }
    return total / (2.0 * M_PI);
}

void materialize_nodes(const Decomposition& dec, TeardropDomain& domain) {
    std::vector<double> piece_start(dec.pieces.size() + 1, 0.0);
    for (std::size_t p = 0; p < dec.pieces.size(); ++p) {
        piece_start[p + 1] = piece_start[p] + dec.pieces[p].length();
    }
    domain.perimeter = piece_start.back();
    domain.nodes.reserve(dec.cells.size());
    for (const Cell& c : dec.cells) {
        const Piece& pc = dec.pieces[static_cast<std::size_t>(c.piece)];
        const double len = pc.length();
        BoundaryNode node;
        node.z = pc.point(c.tn);
        node.tangent = pc.tangent(c.tn);
        node.curvature = pc.curvature();
        node.weight = len * (c.t1 - c.t0);
        node.s = piece_start[static_cast<std::size_t>(c.piece)] + len * c.tn;
        domain.nodes.push_back(node);
    }
    enforce_conjugation_symmetry(domain.nodes);
}

// Gauss-Legendre 8-point rule on [-1, 1].
constexpr double kGlX[8] = {-0.9602898564975362, -0.7966664774136267, -0.5255324099163290,
                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                            0.7966664774136267,  0.9602898564975362};
constexpr double kGlW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

// Conjugate-potential kernel: the harmonic conjugate of log|z - w| pinned to
// vanish at z = 0. On a domain star-shaped about the origin the subtended
// angle stays below pi, so the principal branch needs no unwrapping.
double arg_kernel(Complex z, Complex w) { return std::arg((z - w) * std::conj(-w)); }

// Quadrature state shared by all interior evaluations, summed over the
// panel points (8 per cell), not the nodes: the node rule leaves ~1e-6 of
// interior error at 1024 nodes, the panel rule ~1e-9.
struct CauchySums {
    Complex num;
    Complex den;
};

CauchySums cauchy_sums(const DiscreteConformalMap& map, Complex z) {
    CauchySums s{Complex(0, 0), Complex(0, 0)};
    for (std::size_t m = 0; m < map.gl_z.size(); ++m) {
        const Complex q = map.gl_q[m] / (map.gl_z[m] - z);
        s.den += q;
        s.num += q * map.gl_f[m];
    }
    return s;
}

}  // namespace

TeardropDomain build_teardrop(double delta, double alpha, int node_count) {
    const Decomposition dec = teardrop_decomposition(delta, alpha, node_count);
    TeardropDomain domain;
    domain.delta = delta;
    domain.alpha = alpha;
    materialize_nodes(dec, domain);
    if (std::abs(total_winding(domain.nodes) - 1.0) > 1e-6) {
        throw GeometryError("teardrop boundary does not wind once about the origin");
    }
    return domain;
}

TeardropDomain build_disc_domain(double radius, int node_count) {
    const Decomposition dec = disc_decomposition(radius, node_count);
    TeardropDomain domain;
    domain.delta = radius;
    domain.alpha = 0.0;
    materialize_nodes(dec, domain);
    return domain;
}

DiscreteConformalMap riemann_map(const TeardropDomain& domain) {
    const auto& nodes = domain.nodes;
    const int n = static_cast<int>(nodes.size());
    if (n < 3) throw GeometryError("domain has no boundary sample");

    // The solver needs the analytic panels behind the nodes, so it rebuilds
    // the decomposition from the domain parameters and cross-checks it.
    const Decomposition dec = domain.alpha == 0.0
                                  ? disc_decomposition(domain.delta, n)
                                  : teardrop_decomposition(domain.delta, domain.alpha, n);
    if (static_cast<int>(dec.cells.size()) != n) {
        throw GeometryError("domain nodes do not match their analytic decomposition");
    }

    // Per-cell Gauss-Legendre points for the far-field panel rule, shared by
    // every collocation row.
    std::vector<std::array<Complex, 8>> far_z(static_cast<std::size_t>(n));
    std::vector<std::array<double, 8>> far_w(static_cast<std::size_t>(n));
    std::vector<double> cell_len(static_cast<std::size_t>(n));
    std::vector<Complex> cell_mid(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Cell& c = dec.cells[static_cast<std::size_t>(j)];
        const Piece& pc = dec.pieces[static_cast<std::size_t>(c.piece)];
        if (std::abs(pc.point(c.tn) - nodes[static_cast<std::size_t>(j)].z) > 1e-9) {
            throw GeometryError("domain nodes do not match their analytic decomposition");
        }
        const double len = pc.length();
        const double mid = 0.5 * (c.t0 + c.t1);
        const double half = 0.5 * (c.t1 - c.t0);
        cell_len[static_cast<std::size_t>(j)] = len * (c.t1 - c.t0);
        cell_mid[static_cast<std::size_t>(j)] = pc.point(mid);
        for (int q = 0; q < 8; ++q) {
            far_z[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)] =
                pc.point(mid + half * kGlX[q]);
            far_w[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)] =
                kGlW[q] * half * len;
        }
    }

    // Panel integrals of a boundary kernel against arclength. The near rule
    // subdivides with quadratic grading toward the endpoint closest to the
    // collocation point, where the integrand varies fastest.
    const auto gl_panel = [&](const Piece& pc, double ta, double tb, auto&& kernel) {
        const double mid = 0.5 * (ta + tb);
        const double half = 0.5 * (tb - ta);
        double sum = 0.0;
        for (int q = 0; q < 8; ++q) sum += kGlW[q] * kernel(pc.point(mid + half * kGlX[q]));
        return sum * half * pc.length();
    };
    const auto near_panel = [&](const Piece& pc, double ta, double tb, Complex zi,
                                auto&& kernel) {
        const bool toward_a = std::abs(zi - pc.point(ta)) < std::abs(zi - pc.point(tb));
        double total = 0.0;
        double prev = 0.0;
        for (int k = 1; k <= 8; ++k) {
            const double f = (k / 8.0) * (k / 8.0);
            const double u0 = toward_a ? prev : 1.0 - f;
            const double u1 = toward_a ? f : 1.0 - prev;
            total += gl_panel(pc, ta + (tb - ta) * u0, ta + (tb - ta) * u1, kernel);
            prev = f;
        }
        return total;
    };

    // Symm-type first-kind system for the single-layer density, collocated
    // at the nodes with panel-exact entries. The extra unknown constant and
    // the zero-total-charge side condition keep the system solvable even at
    // logarithmic capacity one (the unit disc itself).
    Eigen::MatrixXd a(n + 1, n + 1);
    Eigen::VectorXd rhs(n + 1);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
        const int i = static_cast<int>(row);
        const Complex zi = nodes[static_cast<std::size_t>(i)].z;
        for (int j = 0; j < n; ++j) {
            const Cell& c = dec.cells[static_cast<std::size_t>(j)];
            const Piece& pc = dec.pieces[static_cast<std::size_t>(c.piece)];
            double val;
            if (j == i) {
                // Exact integral of log distance over the node's own cell;
                // the cubic term corrects chord length to arc length.
                const double la = pc.length() * (c.tn - c.t0);
                const double lb = pc.length() * (c.t1 - c.tn);
                val = la * (std::log(la) - 1.0) + lb * (std::log(lb) - 1.0);
                if (pc.is_arc) {
                    val -= (la * la * la + lb * lb * lb) / (72.0 * pc.radius * pc.radius);
                }
            } else {
                const auto kernel = [&](Complex w) { return std::log(std::abs(zi - w)); };
                if (std::abs(zi - cell_mid[static_cast<std::size_t>(j)]) <
                    3.0 * cell_len[static_cast<std::size_t>(j)]) {
                    val = near_panel(pc, c.t0, c.t1, zi, kernel);
                } else {
                    val = 0.0;
                    for (int q = 0; q < 8; ++q) {
                        val += far_w[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)] *
                               kernel(far_z[static_cast<std::size_t>(j)]
                                           [static_cast<std::size_t>(q)]);
                    }
                }
            }
            a(i, j) = val;
        }
        a(i, n) = 1.0;
        rhs(i) = std::log(std::abs(zi));
    });
    for (int j = 0; j < n; ++j) a(n, j) = nodes[static_cast<std::size_t>(j)].weight;
    a(n, n) = 0.0;
    rhs(n) = 0.0;

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd x = lu.solve(rhs);
    const double residual = (a * x - rhs).cwiseAbs().maxCoeff();
    if (!(residual < 1e-8)) {
        throw SolverFailure("boundary solve residual " + std::to_string(residual) +
                            "; raise node_count");
    }

    DiscreteConformalMap map;
    map.domain = domain;
    map.sigma.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) map.sigma[static_cast<std::size_t>(j)] = x(j);
    map.offset = x(n);
    // The density of a conjugation-symmetric domain is even under the node
    // mirror; averaging removes the quadrature-level asymmetry.
    for (int i = 0; i < n / 2; ++i) {
        const double avg =
            0.5 * (map.sigma[static_cast<std::size_t>(i)] +
                   map.sigma[static_cast<std::size_t>(n - 1 - i)]);
        map.sigma[static_cast<std::size_t>(i)] = avg;
        map.sigma[static_cast<std::size_t>(n - 1 - i)] = avg;
    }

    // Harmonic conjugate at a boundary point, directly as the conjugate of
    // the single-layer potential (the boundary Hilbert transform of u). The
    // kernel normalization already pins v(0, 0) = 0; no path integration of
    // the normal derivative is involved, so errors do not accumulate. The
    // kernel jumps by pi at the evaluation point itself, so the point's own
    // cell is integrated in two halves meeting there.
    const auto v_at = [&](int own, double t_own, Complex x) {
        const auto kernel = [&](Complex w) { return arg_kernel(x, w); };
        double v = 0.0;
        for (int j = 0; j < n; ++j) {
            const Cell& c = dec.cells[static_cast<std::size_t>(j)];
            const Piece& pc = dec.pieces[static_cast<std::size_t>(c.piece)];
            double val;
            if (j == own) {
                val = gl_panel(pc, c.t0, t_own, kernel) + gl_panel(pc, t_own, c.t1, kernel);
            } else if (std::abs(x - cell_mid[static_cast<std::size_t>(j)]) <
                       3.0 * cell_len[static_cast<std::size_t>(j)]) {
                val = near_panel(pc, c.t0, c.t1, x, kernel);
            } else {
                val = 0.0;
                for (int q = 0; q < 8; ++q) {
                    val += far_w[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)] *
                           kernel(far_z[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)]);
                }
            }
            v += map.sigma[static_cast<std::size_t>(j)] * val;
        }
        return v;
    };

    map.conj_v.assign(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        map.conj_v[i] = v_at(static_cast<int>(i), dec.cells[i].tn, nodes[i].z);
    });
    // v is odd under the node mirror.
    for (int i = 0; i < n / 2; ++i) {
        const double odd = 0.5 * (map.conj_v[static_cast<std::size_t>(i)] -
                                  map.conj_v[static_cast<std::size_t>(n - 1 - i)]);
        map.conj_v[static_cast<std::size_t>(i)] = odd;
        map.conj_v[static_cast<std::size_t>(n - 1 - i)] = -odd;
    }
    if (n % 2 == 1) map.conj_v[static_cast<std::size_t>(n / 2)] = 0.0;

    // Boundary correspondence theta = arg(z) - v with a continuous branch.
    map.theta.resize(static_cast<std::size_t>(n));
    double arg_prev = std::arg(nodes[0].z);
    map.theta[0] = arg_prev - map.conj_v[0];
    for (int i = 1; i < n; ++i) {
        double step = std::arg(nodes[static_cast<std::size_t>(i)].z) -
                      std::arg(nodes[static_cast<std::size_t>(i - 1)].z);
        if (step > M_PI) step -= 2.0 * M_PI;
        if (step < -M_PI) step += 2.0 * M_PI;
        arg_prev += step;
        map.theta[static_cast<std::size_t>(i)] =
            arg_prev - map.conj_v[static_cast<std::size_t>(i)];
    }
    // Univalence proxy. Around a strongly crowded tail tip the true angle
    // increments fall below the attainable accuracy (they shrink like
    // exp(-pi*(delta-1)/(2*alpha))), so exact monotonicity there is not a
    // meaningful demand; drops from quadrature noise stay near 1e-6 over
    // the supported shapes, while a genuine boundary fold reverses theta by
    // the overlap size, orders of magnitude more.
    constexpr double kThetaMonoTol = 1e-5;
    for (int i = 1; i < n; ++i) {
        if (!(map.theta[static_cast<std::size_t>(i)] >
              map.theta[static_cast<std::size_t>(i - 1)] - kThetaMonoTol)) {
            throw SolverFailure("boundary correspondence is not monotone; raise node_count");
        }
    }
    const double span = map.theta[static_cast<std::size_t>(n - 1)] - map.theta[0];
    if (!(span > M_PI && span < 2.0 * M_PI + kThetaMonoTol)) {
        throw SolverFailure("boundary correspondence does not span one revolution");
    }

    // Boundary data at the panel quadrature points, so interior evaluations
    // integrate exp(i theta) with the same panel accuracy as the solve. Only
    // theta mod 2*pi enters here, hence the principal branch suffices.
    map.gl_z.resize(static_cast<std::size_t>(8 * n));
    map.gl_q.resize(static_cast<std::size_t>(8 * n));
    map.gl_f.resize(static_cast<std::size_t>(8 * n));
    parallel_for(static_cast<std::size_t>(8 * n), [&](std::size_t idx) {
        const int j = static_cast<int>(idx / 8);
        const int q = static_cast<int>(idx % 8);
        const Cell& c = dec.cells[static_cast<std::size_t>(j)];
        const Piece& pc = dec.pieces[static_cast<std::size_t>(c.piece)];
        const double t = 0.5 * (c.t0 + c.t1) + 0.5 * (c.t1 - c.t0) * kGlX[q];
        const Complex x = far_z[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)];
        const double th = std::arg(x) - v_at(j, t, x);
        map.gl_z[idx] = x;
        map.gl_q[idx] =
            far_w[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)] * pc.tangent(t);
        map.gl_f[idx] = Complex(std::cos(th), std::sin(th));
    });
    // Bit-exact conjugation symmetry of the panel data: the mirror of point
    // q in cell j is point 7-q in cell n-1-j, traversed the opposite way.
    const auto mirror_gl = [&](std::size_t a, std::size_t b) {
        map.gl_z[b] = std::conj(map.gl_z[a]);
        map.gl_q[b] = -std::conj(map.gl_q[a]);
        map.gl_f[b] = std::conj(map.gl_f[a]);
    };
    for (int j = 0; j < n / 2; ++j) {
        for (int q = 0; q < 8; ++q) {
            mirror_gl(static_cast<std::size_t>(8 * j + q),
                      static_cast<std::size_t>(8 * (n - 1 - j) + (7 - q)));
        }
    }
    if (n % 2 == 1) {
        for (int q = 0; q < 4; ++q) {
            mirror_gl(static_cast<std::size_t>(8 * (n / 2) + q),
                      static_cast<std::size_t>(8 * (n / 2) + (7 - q)));
        }
    }

    double u0 = map.offset;
    for (int j = 0; j < n; ++j) {
        double cell_int = 0.0;
        for (int q = 0; q < 8; ++q) {
            cell_int += far_w[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)] *
                        std::log(std::abs(
                            far_z[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)]));
        }
        u0 += map.sigma[static_cast<std::size_t>(j)] * cell_int;
    }
    map.u0 = u0;
    return map;
}

double harmonic_u(const DiscreteConformalMap& map, Complex z) {
    // sigma is constant on each cell and |gl_q| is the arclength measure of
    // the panel point, so the panel rule applies directly.
    double u = map.offset;
    for (std::size_t m = 0; m < map.gl_z.size(); ++m) {
        u += map.sigma[m / 8] * std::abs(map.gl_q[m]) * std::log(std::abs(z - map.gl_z[m]));
    }
    return u;
}

bool conformal_inside(const DiscreteConformalMap& map, Complex z) {
    // The quadrature winding integral is ~2*pi*i inside and ~0 outside.
    Complex den(0, 0);
    for (std::size_t m = 0; m < map.gl_z.size(); ++m) {
        den += map.gl_q[m] / (map.gl_z[m] - z);
    }
    return std::abs(den) > M_PI;
}

Complex conformal_eval(const DiscreteConformalMap& map, Complex z) {
    const CauchySums s = cauchy_sums(map, z);
    if (!(std::abs(s.den) > M_PI)) {
        throw OutOfDomain("conformal evaluation outside the domain");
    }
    return s.num / s.den;
}

Complex conformal_deriv(const DiscreteConformalMap& map, Complex z) {
    CauchySums s{Complex(0, 0), Complex(0, 0)};
    Complex num2(0, 0), den2(0, 0);
    for (std::size_t m = 0; m < map.gl_z.size(); ++m) {
        const Complex inv = 1.0 / (map.gl_z[m] - z);
        const Complex q = map.gl_q[m] * inv;
        s.den += q;
        s.num += q * map.gl_f[m];
        den2 += q * inv;
        num2 += q * map.gl_f[m] * inv;
    }
    if (!(std::abs(s.den) > M_PI)) {
        throw OutOfDomain("conformal derivative outside the domain");
    }
    const Complex value = s.num / s.den;
    return (num2 - value * den2) / s.den;
}

Complex conformal_invert(const DiscreteConformalMap& map, Complex w) {
    if (!(std::abs(w) < 1.0)) {
        throw OutOfDomain("conformal inversion target outside the open unit disc");
    }
    Complex z = conformal_inside(map, w) ? w : Complex(0, 0);
    Complex r = conformal_eval(map, z) - w;
    const double tol = 5e-15 * std::max(1.0, std::abs(w));
    for (int it = 0; it < 80; ++it) {
        if (std::abs(r) <= tol) return z;
        const Complex step = r / conformal_deriv(map, z);
        double lambda = 1.0;
        bool moved = false;
        for (int h = 0; h < 40 && !moved; ++h, lambda /= 2.0) {
            const Complex trial = z - lambda * step;
            if (!conformal_inside(map, trial)) continue;
            const Complex rt = conformal_eval(map, trial) - w;
            if (std::abs(rt) < std::abs(r)) {
                z = trial;
                r = rt;
                moved = true;
            }
        }
        // No damped step improves the residual: roundoff stagnation.
        if (!moved) break;
    }
    if (std::abs(r) <= 1e-11 * std::max(1.0, std::abs(w))) return z;
    throw NewtonDivergence("conformal inversion did not converge");
}

PerturbationGerm build_perturbation(const DiscreteConformalMap& map) {
    PerturbationGerm germ;
    germ.map = std::make_shared<DiscreteConformalMap>(map);
    if (map.domain.alpha == 0.0) {
        germ.p = 1.0;  // plain disc: phi(delta) sits on the boundary circle
        return germ;
    }
    const Complex p = conformal_eval(map, Complex(map.domain.delta, 0.0));
    if (!(std::abs(p.imag()) <= kBoundaryTol)) {
        throw NonRealRatio("homothety ratio has imaginary part " + std::to_string(p.imag()));
    }
    if (!(p.real() > 0.0 && p.real() <= 1.0 + kBoundaryTol)) {
        throw SolverFailure("homothety ratio " + std::to_string(p.real()) +
                            " outside (0, 1]");
    }
    // The true ratio is strictly below 1 (the tail end maps inside the
    // disc); the clamp keeps the validity disc open past |z| = 1 when
    // crowding pushes the computed value to 1 within roundoff.
    germ.p = std::min(p.real(), 1.0 - 1e-12);
    return germ;
}

Complex perturbation_eval(const PerturbationGerm& germ, Complex z) {
    if (!(std::abs(z) * germ.p < 1.0)) {
        throw OutOfDomain("perturbation germ argument outside its validity disc");
    }
    return conformal_invert(*germ.map, germ.p * z);
}

namespace {

// Cauchy coefficient integrals over the jet circle for any evaluable germ.
template <typename Eval>
Jet extract_jet(const Eval& eval, int order) {
    if (order < 1) throw InvalidOrders("jet order must be at least 1");
    if (order > kJetSamples / 4) throw InvalidOrders("jet order too large for the sample count");
    std::vector<Complex> samples(kJetSamples);
    try {
        for (int k = 0; k < kJetSamples; ++k) {
            const double a = 2.0 * M_PI * k / kJetSamples;
            samples[static_cast<std::size_t>(k)] =
                eval(kJetRadius * Complex(std::cos(a), std::sin(a)));
        }
    } catch (const NumericalError& e) {
        throw JetExtractionFailure(std::string("jet sample failed: ") + e.what());
    }
    Jet jet(order);
    for (int m = 1; m <= order; ++m) {
        Complex c(0, 0);
        for (int k = 0; k < kJetSamples; ++k) {
            const double a = -2.0 * M_PI * m * k / kJetSamples;
            c += samples[static_cast<std::size_t>(k)] * Complex(std::cos(a), std::sin(a));
        }
        jet.coeff(m) = c / (static_cast<double>(kJetSamples) * std::pow(kJetRadius, m));
    }
    return jet;
}

}  // namespace

Jet perturbation_jet(const PerturbationGerm& germ, int order) {
    return extract_jet([&](Complex z) { return perturbation_eval(germ, z); }, order);
}

NormalizedGerm normalize_tangency(const PerturbationGerm& germ, int order) {
    const Jet head = perturbation_jet(germ, order);
    if (!(std::abs(head.coeff(1) - Complex(1, 0)) < 0.5)) {
        throw JetExtractionFailure("linear coefficient too far from 1 for tangency");
    }
    NormalizedGerm result;
    result.base = germ;
    result.s_coeffs = invert(head).coeffs();
    return result;
}

Complex normalized_eval(const NormalizedGerm& germ, Complex z) {
    return eval_polynomial(germ.s_coeffs, perturbation_eval(germ.base, z));
}

Jet normalized_jet(const NormalizedGerm& germ, int order) {
    return extract_jet([&](Complex z) { return normalized_eval(germ, z); }, order);
}

}  // namespace germforge
