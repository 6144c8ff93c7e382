#include "germforge/pseudogroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <utility>

#include "germforge/errors.hpp"
#include "germforge/parallel.hpp"
#include "germforge/relation.hpp"

namespace germforge {

namespace {

// Effective generator germs for the four letters, in Letter rank order
// A, A^-1, B, B^-1. The conjugator, when present, replaces g by h^-1 g h.
struct LetterMaps {
    ExprPtr maps[4];

    const ExprPtr& of(Letter l) const { return maps[static_cast<int>(l)]; }
};

using LetterMask = std::array<bool, 4>;

LetterMask letters_used(const Word& w) {
    LetterMask used{false, false, false, false};
    for (Letter l : w.letters()) used[static_cast<int>(l)] = true;
    return used;
}

LetterMask letters_used(const std::vector<Word>& words) {
    LetterMask used{false, false, false, false};
    for (const Word& w : words) {
        for (Letter l : w.letters()) used[static_cast<int>(l)] = true;
    }
    return used;
}

// Builds the effective letter germs in rank order. Only the letters in
// `used` are materialized: inverting a conjugated generator costs a radius
// sweep, and words in a (k, 2) torsion normal form never apply B^-1. No
// validity check happens here: word maps are partial maps, and a letter
// whose validity disc is smaller than V shrinks the word's domain of
// definition through the letterwise |z| < R rule rather than failing.
LetterMaps letter_maps(const DiscContext& ctx, const ExprPtr& conjugator,
                       const LetterMask& used) {
    ExprPtr g_eff = conjugator ? make_conjugate(ctx.g, conjugator) : ctx.g;
    LetterMaps lm{{ctx.f, make_inverse(ctx.f), g_eff, nullptr}};
    if (used[3]) lm.maps[3] = make_inverse(g_eff);
    return lm;
}

constexpr LetterMask kAllLetters{true, true, true, true};

// Letter-by-letter word map evaluation under the domain rule: every
// intermediate point, endpoint included, must satisfy |z| < R. Returns
// nullopt when the orbit escapes or an Inverse node diverges.
std::optional<Complex> word_value(const LetterMaps& lm, double R,
                                  const std::vector<Letter>& letters, Complex z) {
    if (!(std::abs(z) < R)) return std::nullopt;
    Complex cur = z;
    for (Letter l : letters) {
        try {
            cur = eval_at(lm.of(l), cur);
        } catch (const NumericalError&) {
            return std::nullopt;
        }
        if (!(std::abs(cur) < R)) return std::nullopt;
    }
    return cur;
}

// Same walk with the derivative accumulated by the chain rule.
std::optional<std::pair<Complex, Complex>> word_value_deriv(
    const LetterMaps& lm, double R, const std::vector<Letter>& letters, Complex z) {
    if (!(std::abs(z) < R)) return std::nullopt;
    Complex cur = z;
    Complex deriv(1.0, 0.0);
    for (Letter l : letters) {
        std::pair<Complex, Complex> vd;
        try {
            vd = eval_with_deriv(lm.of(l), cur);
        } catch (const NumericalError&) {
            return std::nullopt;
        }
        cur = vd.first;
        deriv *= vd.second;
        if (!(std::abs(cur) < R)) return std::nullopt;
    }
    return std::make_pair(cur, deriv);
}

// Outward square spiral over the integer lattice: (0,0), then rings of
// increasing radius, each traversed in a fixed orientation. Keeps nodes with
// |z| < R strictly, so no sample lies on the boundary circle.
std::vector<GridNode> spiral_nodes(double R, double pitch) {
    std::vector<GridNode> nodes;
    const int n_max = static_cast<int>(std::floor(R / pitch)) + 1;
    auto push_if_inside = [&](int i, int j) {
        const Complex z(i * pitch, j * pitch);
        if (std::abs(z) < R) nodes.push_back(GridNode{i, j, z, false, -1});
    };
    push_if_inside(0, 0);
    for (int ring = 1; ring <= n_max; ++ring) {
        int i = ring, j = 0;                     // enter the ring on the +x axis
        for (; j < ring; ++j) push_if_inside(i, j);     // up the right edge
        for (; i > -ring; --i) push_if_inside(i, j);    // along the top
        for (; j > -ring; --j) push_if_inside(i, j);    // down the left edge
        for (; i < ring; ++i) push_if_inside(i, j);     // along the bottom
        for (; j < 0; ++j) push_if_inside(i, j);        // back to the +x axis
    }
    return nodes;
}

bool in_annulus(Complex z, double r_in, double r_out) {
    const double m = std::abs(z);
    return r_in <= m && m <= r_out;
}

} // namespace

DiscContext make_disc_context(double radius, ExprPtr f, ExprPtr g,
                              double grid_resolution) {
    if (!(radius > 0.0)) throw GeometryError("disc radius must be positive");
    if (!(grid_resolution > 0.0)) throw GeometryError("grid resolution must be positive");
    DiscContext ctx{radius, std::move(f), std::move(g), grid_resolution};
    // Context invariant: the four raw generator germs are valid on all of V.
    // Conjugated germs built per call are exempt; their smaller validity
    // discs shrink word domains instead.
    const LetterMaps lm = letter_maps(ctx, nullptr, kAllLetters);
    static const char* names[4] = {"A", "A^-1", "B", "B^-1"};
    for (int i = 0; i < 4; ++i) {
        if (radius_hint(lm.maps[i]) < ctx.radius) {
            throw GeometryError(std::string("generator germ for letter ") + names[i] +
                                " is not valid on the whole disc (radius hint " +
                                std::to_string(radius_hint(lm.maps[i])) + " < " +
                                std::to_string(ctx.radius) + ")");
        }
    }
    return ctx;
}

Itinerary itinerary(const DiscContext& ctx, const Word& w, Complex z,
                    const ExprPtr& conjugator) {
    if (!(std::abs(z) < ctx.radius)) {
        throw GeometryError("itinerary start point lies outside the disc");
    }
    const LetterMaps lm = letter_maps(ctx, conjugator, letters_used(w));

    Itinerary it;
    it.word = w;
    it.points.push_back(z);
    Complex cur = z;
    const auto blocks = block_decompose(w);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const Block& blk = blocks[bi];
        const ExprPtr& step = lm.of(make_letter(blk.base, blk.exponent > 0 ? 1 : -1));
        const int reps = std::abs(blk.exponent);
        for (int s = 0; s < reps; ++s) {
            try {
                cur = eval_at(step, cur);
            } catch (const NumericalError& e) {
                throw EvaluationFailure(std::string("itinerary evaluation failed: ") + e.what());
            }
            if (!(std::abs(cur) < ctx.radius)) {
                it.points.push_back(cur); // record the value that left V
                it.in_domain = false;
                it.escape_index = static_cast<int>(bi) + 1;
                return it;
            }
        }
        it.points.push_back(cur);
    }
    return it;
}

DomainGrid domain_components(const DiscContext& ctx, const Word& w,
                             const ExprPtr& conjugator) {
    if (!(ctx.grid_resolution < ctx.radius / 16.0)) {
        throw ResolutionTooCoarse("grid resolution must be finer than R/16");
    }
    const LetterMaps lm = letter_maps(ctx, conjugator, letters_used(w));
    const std::vector<Letter>& letters = w.letters();

    DomainGrid grid;
    grid.pitch = ctx.grid_resolution;
    grid.nodes = spiral_nodes(ctx.radius, ctx.grid_resolution);

    parallel_for(grid.nodes.size(), [&](std::size_t idx) {
        GridNode& node = grid.nodes[idx];
        node.in_domain = word_value(lm, ctx.radius, letters, node.z).has_value();
    });

    // 4-connected flood fill over in-domain nodes, seeded in spiral order.
    std::map<std::pair<int, int>, std::size_t> index_of;
    for (std::size_t idx = 0; idx < grid.nodes.size(); ++idx) {
        index_of.emplace(std::make_pair(grid.nodes[idx].i, grid.nodes[idx].j), idx);
    }
    for (std::size_t idx = 0; idx < grid.nodes.size(); ++idx) {
        if (!grid.nodes[idx].in_domain || grid.nodes[idx].label >= 0) continue;
        const int label = grid.component_count++;
        long size = 0;
        std::deque<std::size_t> queue{idx};
        grid.nodes[idx].label = label;
        while (!queue.empty()) {
            const std::size_t k = queue.front();
            queue.pop_front();
            ++size;
            const int ci = grid.nodes[k].i;
            const int cj = grid.nodes[k].j;
            const std::pair<int, int> sides[4] = {
                {ci + 1, cj}, {ci - 1, cj}, {ci, cj + 1}, {ci, cj - 1}};
            for (const auto& s : sides) {
                auto hit = index_of.find(s);
                if (hit == index_of.end()) continue;
                GridNode& nb = grid.nodes[hit->second];
                if (!nb.in_domain || nb.label >= 0) continue;
                nb.label = label;
                queue.push_back(hit->second);
            }
        }
        grid.component_sizes.push_back(size);
    }

    // 0 is fixed by every generator, so the origin node is always in-domain.
    grid.zero_label = grid.nodes.empty() ? -1 : grid.nodes.front().label;
    return grid;
}

std::vector<FixedPointRecord> find_fixed_points(const DiscContext& ctx,
                                                const Word& w,
                                                const ExprPtr& conjugator,
                                                double r_in, double r_out) {
    if (!(0.0 < r_in && r_in < r_out && r_out < ctx.radius)) {
        throw GeometryError("annulus must satisfy 0 < r_in < r_out < R");
    }
    const LetterMaps lm = letter_maps(ctx, conjugator, letters_used(w));
    const std::vector<Letter>& letters = w.letters();

    std::vector<Complex> seeds;
    for (const GridNode& node : spiral_nodes(ctx.radius, ctx.grid_resolution)) {
        if (in_annulus(node.z, r_in, r_out) &&
            word_value(lm, ctx.radius, letters, node.z).has_value()) {
            seeds.push_back(node.z);
        }
    }

    // Newton iteration on W(z) - z per seed; per-slot results keep the
    // outcome independent of the worker count.
    std::vector<std::optional<std::pair<Complex, Complex>>> roots(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t s) {
        Complex z = seeds[s];
        for (int step = 0; step < kNewtonMaxSteps; ++step) {
            const auto vd = word_value_deriv(lm, ctx.radius, letters, z);
            if (!vd) return;
            const Complex residual = vd->first - z;
            if (std::abs(residual) <= kNewtonTol) {
                roots[s] = std::make_pair(z, vd->second);
                return;
            }
            const Complex slope = vd->second - Complex(1.0, 0.0);
            if (std::abs(slope) < 1e-14) return;
            z -= residual / slope;
        }
    });

    std::vector<FixedPointRecord> records;
    for (const auto& root : roots) {
        if (!root) continue;
        const Complex z = root->first;
        if (!in_annulus(z, r_in, r_out)) continue;
        const bool seen = std::any_of(records.begin(), records.end(), [&](const auto& r) {
            return std::abs(r.location - z) <= 10.0 * kNewtonTol;
        });
        if (seen) continue;
        if (!itinerary(ctx, w, z, conjugator).in_domain) continue;

        const double h = 1e-6 * std::abs(z);
        const auto plus = word_value(lm, ctx.radius, letters, z + h);
        const auto minus = word_value(lm, ctx.radius, letters, z - h);
        // The analytic chain-rule derivative backs up the stencil when a
        // stencil endpoint pokes out of the domain.
        const Complex mult = (plus && minus) ? (*plus - *minus) / (2.0 * h) : root->second;
        FixedPointRecord rec;
        rec.location = z;
        rec.word = w;
        rec.multiplier = mult;
        rec.hyperbolic = std::abs(mult) < 1.0 - kHyperbolicEps ||
                         std::abs(mult) > 1.0 + kHyperbolicEps;
        records.push_back(rec);
    }

    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
        return a.location.imag() < b.location.imag();
    });
    return records;
}

OrbitVerdict orbits_disjoint(const DiscContext& ctx, Complex z1, Complex z2,
                             int max_blocks, const ExprPtr& conjugator,
                             std::optional<Torsion> torsion) {
    if (!(std::abs(z1) < ctx.radius) || !(std::abs(z2) < ctx.radius)) {
        throw GeometryError("orbit endpoints must lie inside the disc");
    }

    OrbitVerdict out;
    out.max_blocks = max_blocks;

    auto record_hit = [&](const Word& w, Complex p) {
        out.meets = true;
        out.witness_word = w;
        out.witness_point = p;
        out.verdict = "meets";
    };

    // The empty word is part of the orbit.
    std::vector<Complex> orbit{z1};
    out.points_visited = 1;
    if (std::abs(z1 - z2) <= kMergeTol) {
        record_hit(Word(), z1);
        return out;
    }

    const std::optional<std::size_t> max_letters =
        torsion ? std::nullopt
                : std::optional<std::size_t>(4 * static_cast<std::size_t>(max_blocks));
    const std::vector<Word> words = enumerate_words(torsion, max_blocks, false, max_letters);
    const LetterMaps lm = letter_maps(ctx, conjugator, letters_used(words));
    for (const Word& w : words) {
        const auto value = word_value(lm, ctx.radius, w.letters(), z1);
        if (!value) continue;
        const bool fresh = std::none_of(orbit.begin(), orbit.end(), [&](Complex p) {
            return std::abs(p - *value) <= kMergeTol;
        });
        if (fresh) {
            orbit.push_back(*value);
            ++out.points_visited;
        }
        if (std::abs(*value - z2) <= kMergeTol) {
            record_hit(w, *value);
            return out;
        }
    }
    out.verdict = "disjoint up to " + std::to_string(max_blocks) + " blocks";
    return out;
}

CensusReport census_nonsimply(const DiscContext& ctx, const Torsion& torsion,
                              const ExprPtr& conjugator, int max_blocks,
                              double r_in, double r_out) {
    if (torsion.l != 2) {
        throw SemanticError("census model needs an order-2 second generator");
    }
    if (!conjugator) throw SemanticError("census needs a conjugator germ");
    // The holonomy model is rigid: f must be the rotation by 2*pi/k and g the
    // half turn. Verified on low-order jets rather than on node shapes.
    const int probe = 4;
    const Jet f_probe = jet_of_expr(ctx.f, probe);
    const Jet g_probe = jet_of_expr(ctx.g, probe);
    auto is_rotation_jet = [&](const Jet& jet, double angle) {
        if (std::abs(jet.coeff(1) - std::polar(1.0, angle)) > 1e-12) return false;
        for (int k = 2; k <= probe; ++k) {
            if (std::abs(jet.coeff(k)) > 1e-12) return false;
        }
        return true;
    };
    if (!is_rotation_jet(f_probe, 2.0 * M_PI / torsion.k)) {
        throw SemanticError("census model needs f = rotation by 2*pi/k");
    }
    if (!is_rotation_jet(g_probe, M_PI)) {
        throw SemanticError("census model needs g = rotation by pi");
    }

    CensusReport report;
    report.torsion = torsion;
    report.max_blocks = max_blocks;
    report.cumulative_distinct.assign(std::max(0, max_blocks), 0);

    // Identity-word guard: a word whose map is the identity germ fixes every
    // point, so Newton would accept all seeds. Checked on order-12 jets.
    const int id_order = 12;
    const Jet f_jet = jet_of_expr(ctx.f, id_order);
    const Jet g_jet = jet_of_expr(ctx.g, id_order);
    const Jet h_jet = jet_of_expr(conjugator, id_order);
    std::vector<Complex> h_coeffs;
    for (int k = 1; k <= id_order; ++k) h_coeffs.push_back(h_jet.coeff(k));
    const ConjugatorPoint h_point(h_coeffs);

    for (const Word& w : enumerate_words(torsion, max_blocks, true)) {
        CensusEntry entry;
        entry.word = w;

        const Jet word_jet = evaluate_word_jet(w, f_jet, g_jet, h_point, id_order);
        const double id_tol = 1e-10 * std::max(1.0, max_coeff_magnitude(word_jet));
        if (is_identity(word_jet, id_tol)) {
            entry.identity_word = true;
            report.per_word.push_back(entry);
            continue;
        }

        const auto records = find_fixed_points(ctx, w, conjugator, r_in, r_out);
        entry.fixed_points = static_cast<int>(records.size());
        const int blocks = static_cast<int>(block_decompose(w).size());
        for (const FixedPointRecord& rec : records) {
            auto hit = std::find_if(report.distinct_points.begin(), report.distinct_points.end(),
                                    [&](const CensusPoint& p) {
                                        return std::abs(p.record.location - rec.location) <= kMergeTol;
                                    });
            if (hit == report.distinct_points.end()) {
                report.distinct_points.push_back(CensusPoint{rec, blocks, 1});
                ++entry.new_distinct;
            } else {
                ++hit->words_fixing;
                hit->min_blocks = std::min(hit->min_blocks, blocks);
            }
        }
        report.per_word.push_back(entry);
    }

    std::sort(report.distinct_points.begin(), report.distinct_points.end(),
              [](const CensusPoint& a, const CensusPoint& b) {
                  const Complex za = a.record.location, zb = b.record.location;
                  if (za.real() != zb.real()) return za.real() < zb.real();
                  return za.imag() < zb.imag();
              });

    for (int b = 1; b <= max_blocks; ++b) {
        long count = 0;
        for (const CensusPoint& p : report.distinct_points) {
            if (p.min_blocks <= b) ++count;
        }
        report.cumulative_distinct[b - 1] = count;
    }

    double sum = 0.0;
    for (const CensusPoint& p : report.distinct_points) {
        const double m = std::abs(p.record.multiplier);
        if (p.record.hyperbolic) ++report.hyperbolic_count;
        if (report.min_abs_multiplier == 0.0 || m < report.min_abs_multiplier) {
            report.min_abs_multiplier = m;
        }
        report.max_abs_multiplier = std::max(report.max_abs_multiplier, m);
        sum += m;
    }
    if (!report.distinct_points.empty()) {
        report.mean_abs_multiplier = sum / static_cast<double>(report.distinct_points.size());
    }
    return report;
}

} // namespace germforge
