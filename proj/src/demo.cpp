#include "germforge/demo.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "germforge/errors.hpp"

namespace germforge {

namespace {

// The map of one block: the generator (or its inverse) composed |exponent| times.
ExprPtr block_map(const ExprPtr& f, const ExprPtr& g, const Block& b) {
    ExprPtr gen = b.base == Base::A ? f : g;
    if (b.exponent < 0) gen = make_inverse(gen);
    ExprPtr m = gen;
    for (int j = 1; j < std::abs(b.exponent); ++j) m = make_compose(gen, m);
    return m;
}

Block inverse_block(const Block& b) { return Block{b.base, -b.exponent}; }

// Distinct locations (separated by more than tol) attaining the maximal
// modulus of pts within tol.
std::vector<Complex> max_locations(const std::vector<Complex>& pts, double tol) {
    double best = 0.0;
    for (const Complex& p : pts) best = std::max(best, std::abs(p));
    std::vector<Complex> locs;
    for (const Complex& p : pts) {
        if (std::abs(p) < best - tol) continue;
        bool known = false;
        for (const Complex& l : locs) known = known || std::abs(p - l) <= tol;
        if (!known) locs.push_back(p);
    }
    return locs;
}

}  // namespace

DemoReport relation_breaking_demo(const ExprPtr& f, const ExprPtr& g, const Word& w,
                                  Complex z_start, double delta, int node_count) {
    if (!f || !g) throw SemanticError("relation demo requires both generators");
    if (!(std::abs(z_start) > 0.0)) throw SemanticError("z_start must be nonzero");
    if (!(delta > 1.0)) throw SemanticError("delta must exceed 1");
    std::vector<Block> blocks = block_decompose(w);
    const int k = static_cast<int>(blocks.size());

    // Raw itinerary and the relation precondition.
    std::vector<Complex> pts(static_cast<std::size_t>(k) + 1);
    pts[0] = z_start;
    for (int i = 0; i < k; ++i) {
        pts[static_cast<std::size_t>(i) + 1] =
            eval_at(block_map(f, g, blocks[static_cast<std::size_t>(i)]),
                    pts[static_cast<std::size_t>(i)]);
    }
    const double closure = std::abs(pts[static_cast<std::size_t>(k)] - pts[0]);
    if (!(closure <= kRelationTol)) {
        throw NotARelation("word moves the start point by " + std::to_string(closure));
    }
    if (k == 0) throw InvalidWord("empty word is the identity; nothing to break");
    if (is_pure_power(w)) {
        throw InvalidWord("pure power words cannot be broken by conjugating one generator");
    }

    // Unique maximal-modulus point. A location revisited at several slots is
    // fine (the construction needs a unique POINT, not a unique slot); when
    // distinct locations tie, conjugating both generators by the real
    // quadratic psi preserves the relation and generically separates the
    // moduli. psi keeps the real-axis symmetry, so conjugate-pair ties
    // persist and are reported.
    std::vector<Complex> m_pts = pts;
    ExprPtr psi;
    bool tie_broken = false;
    double big = 0.0;
    for (int i = 1; i <= k; ++i) big = std::max(big, std::abs(pts[static_cast<std::size_t>(i)]));
    const double loc_tol = 1e-9 * std::max(1.0, big);
    std::vector<Complex> locs =
        max_locations(std::vector<Complex>(pts.begin() + 1, pts.end()), loc_tol);
    if (locs.size() > 1) {
        tie_broken = true;
        psi = make_polynomial({Complex(1.0, 0.0), Complex(-0.15 / big, 0.0)});
        const ExprPtr psi_inv = make_inverse(psi);
        for (Complex& p : m_pts) p = eval_at(psi_inv, p);
        locs = max_locations(std::vector<Complex>(m_pts.begin() + 1, m_pts.end()), loc_tol);
        if (locs.size() > 1) {
            throw NoUniqueMaximum(std::to_string(locs.size()) +
                                  " itinerary points tie for the maximal modulus");
        }
    }
    const Complex max_loc = locs.front();

    // Slots holding the maximal point; prefer one followed by a g-block so
    // the roles of f and g need no exchange, then the earliest.
    std::vector<int> slots;
    for (int i = 1; i <= k; ++i) {
        if (std::abs(m_pts[static_cast<std::size_t>(i)] - max_loc) <= loc_tol) slots.push_back(i);
    }
    int i0 = -1;
    for (int i : slots) {
        if (blocks[static_cast<std::size_t>(i % k)].base == Base::B) {
            i0 = i;
            break;
        }
    }
    const bool swapped = i0 < 0;
    if (swapped) i0 = slots.front();

    // Cyclic left shift placing the maximal slot at k-1; the block list may
    // carry a same-base seam afterwards, which is harmless for a walk.
    const int s = (i0 + 1) % k;
    std::vector<Block> shifted(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        shifted[static_cast<std::size_t>(j)] = blocks[static_cast<std::size_t>((j + s) % k)];
    }
    ExprPtr fx = f, gx = g;
    if (swapped) {
        std::swap(fx, gx);
        for (Block& b : shifted) b.base = b.base == Base::A ? Base::B : Base::A;
    }

    // Coordinate change Phi = psi o L, L(z) = m_i0 z: in the new coordinates
    // the maximal point Phi^{-1}(z_i0) is exactly 1.
    const Complex scale = m_pts[static_cast<std::size_t>(i0)];
    const ExprPtr lin = make_polynomial({scale});
    const ExprPtr change = psi ? make_compose(psi, lin) : lin;
    const ExprPtr fhat = make_conjugate(fx, change);
    const ExprPtr ghat = make_conjugate(gx, change);

    // Normalized base itinerary, rewalked through the conjugated generators
    // as an end-to-end check of the normalization.
    std::vector<ExprPtr> maps(static_cast<std::size_t>(k)), inv_maps(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        maps[static_cast<std::size_t>(j)] =
            block_map(fhat, ghat, shifted[static_cast<std::size_t>(j)]);
        inv_maps[static_cast<std::size_t>(j)] =
            block_map(fhat, ghat, inverse_block(shifted[static_cast<std::size_t>(j)]));
    }
    std::vector<Complex> base(static_cast<std::size_t>(k) + 1);
    base[0] = m_pts[static_cast<std::size_t>(s)] / scale;
    for (int i = 0; i < k; ++i) {
        base[static_cast<std::size_t>(i) + 1] =
            eval_at(maps[static_cast<std::size_t>(i)], base[static_cast<std::size_t>(i)]);
    }
    if (!(std::abs(base[static_cast<std::size_t>(k - 1)] - Complex(1.0, 0.0)) <= 1e-7)) {
        throw SolverFailure("coordinate normalization drifted off the maximal point");
    }
    if (!(std::abs(base[static_cast<std::size_t>(k)] - base[0]) <= 1e-7)) {
        throw SolverFailure("normalized itinerary does not close");
    }

    DemoReport report;
    report.word = w;
    report.blocks = shifted;
    report.swapped = swapped;
    report.shift = s;
    report.tie_broken = tie_broken;
    report.change = change;
    report.f = fhat;
    report.g = ghat;
    report.base_itinerary = base;
    report.delta = delta;

    // Shrinking sweep, widest neighborhood first. H(1) = delta for every
    // width, so the displacement does not vanish as alpha shrinks; smaller
    // widths only make the walk more likely to stay in-domain.
    const double quarter = (delta - 1.0) / 4.0;
    for (const double factor : {0.8, 0.4, 0.2, 0.1}) {
        PerturbationAttempt at;
        at.alpha = quarter * factor;
        try {
            const TeardropDomain dom = build_teardrop(delta, at.alpha, node_count);
            const auto germ = std::make_shared<PerturbationGerm>(
                build_perturbation(riemann_map(dom)));
            at.ratio = germ->p;
            const auto fwd = [&](Complex z) { return perturbation_eval(*germ, z); };
            const auto back = [&](Complex z) { return conformal_eval(*germ->map, z) / germ->p; };
            // Backward pass: pin slot k-1 at the maximal point and recover
            // the departing point through the inverse perturbed blocks.
            std::vector<Complex> walk(static_cast<std::size_t>(k) + 1);
            walk[static_cast<std::size_t>(k - 1)] = Complex(1.0, 0.0);
            for (int i = k - 1; i >= 1; --i) {
                const ExprPtr& inv = inv_maps[static_cast<std::size_t>(i - 1)];
                const Complex next = walk[static_cast<std::size_t>(i)];
                walk[static_cast<std::size_t>(i - 1)] =
                    shifted[static_cast<std::size_t>(i - 1)].base == Base::B
                        ? back(eval_at(inv, fwd(next)))
                        : eval_at(inv, next);
            }
            // Forward pass; the final block acts on the maximal point, so
            // the walk fails to close by the margin H produces there.
            for (int i = 1; i <= k; ++i) {
                const ExprPtr& m = maps[static_cast<std::size_t>(i - 1)];
                const Complex prev = walk[static_cast<std::size_t>(i - 1)];
                walk[static_cast<std::size_t>(i)] =
                    shifted[static_cast<std::size_t>(i - 1)].base == Base::B
                        ? back(eval_at(m, fwd(prev)))
                        : eval_at(m, prev);
            }
            at.walk = walk;
            at.displacement = std::abs(walk[static_cast<std::size_t>(k)] - walk[0]);
            if (at.displacement > kRelationTol) {
                report.attempts.push_back(std::move(at));
                report.chosen = static_cast<int>(report.attempts.size()) - 1;
                report.germ = germ;
                return report;
            }
            at.failure = "perturbed walk still closes";
        } catch (const NumericalError& e) {
            at.failure = e.what();
        }
        report.attempts.push_back(std::move(at));
    }

    std::string diag = "no neighborhood width produced a displaced in-domain walk:";
    for (const PerturbationAttempt& a : report.attempts) {
        diag += " [alpha=" + std::to_string(a.alpha) + ": " + a.failure + "]";
    }
    throw PerturbationExhausted(diag);
}

}  // namespace germforge
