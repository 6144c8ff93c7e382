#include "germforge/relation.hpp"

#include <algorithm>
#include <cmath>

#include "germforge/errors.hpp"
#include "germforge/rng.hpp"

namespace germforge {

namespace {

Jet require_order(const Jet& j, int order, const char* who) {
    if (j.order() < order) {
        throw OrderMismatch(std::string(who) + ": jet order " + std::to_string(j.order()) +
                            " below required " + std::to_string(order));
    }
    return j.order() == order ? j : truncate(j, order);
}

double identity_tolerance(const Jet& j, double tol_rel) {
    return tol_rel * std::max(1.0, max_coeff_magnitude(j));
}

// Roundoff scale of computing power(f, k), k >= 1: run the same composition
// on |coefficients|. Composition is a positive-coefficient polynomial in the
// entries, so this bounds the sum of term magnitudes at every degree.
double power_roundoff_scale(const Jet& f, int k) {
    Jet abs_f(f.order());
    for (int i = 1; i <= f.order(); ++i) abs_f.coeff(i) = Complex(std::abs(f.coeff(i)), 0.0);
    return max_coeff_magnitude(power(abs_f, k));
}

} // namespace

ConjugatorPoint::ConjugatorPoint(std::vector<Complex> coefficients) : a_(std::move(coefficients)) {
    if (a_.empty() || a_.front() == Complex(0.0, 0.0)) {
        throw SemanticError("conjugator point needs a nonzero leading coefficient");
    }
}

ConjugatorPoint ConjugatorPoint::identity(int degree) {
    if (degree < 1) throw SemanticError("conjugator degree must be positive");
    std::vector<Complex> a(static_cast<std::size_t>(degree), Complex(0.0, 0.0));
    a[0] = Complex(1.0, 0.0);
    return ConjugatorPoint(std::move(a));
}

Jet ConjugatorPoint::to_jet(int order) const {
    Jet j(order);
    const int d = std::min(order, degree());
    for (int k = 1; k <= d; ++k) j.coeff(k) = a_[static_cast<std::size_t>(k - 1)];
    return j;
}

Jet evaluate_word_jet(const Word& w, const Jet& f, const Jet& g, const ConjugatorPoint& h,
                      int order) {
    if (order < 1) throw OrderMismatch("word jet order must be positive");
    const Jet fr = require_order(f, order, "evaluate_word_jet: f");
    const Jet gr = require_order(g, order, "evaluate_word_jet: g");
    const Jet g_conj = conjugate(gr, h.to_jet(order));

    Jet result = Jet::identity(order);
    for (const Block& blk : block_decompose(w)) {
        const Jet& gen = blk.base == Base::A ? fr : g_conj;
        // leftmost block acts first: W = b_k o ... o b_1
        result = compose(power(gen, blk.exponent), result);
    }
    return result;
}

RelationVerdict classify_word_jet(const Word& w, const Jet& word_jet, double tol_rel) {
    RelationVerdict v;
    v.word = w;
    const double tol = identity_tolerance(word_jet, tol_rel);
    for (int k = 1; k <= word_jet.order(); ++k) {
        const Complex target = k == 1 ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
        const double dev = std::abs(word_jet.coeff(k) - target);
        if (dev > v.max_deviation) v.max_deviation = dev;
        if (!v.broken && dev > tol) {
            v.broken = true;
            v.witness_order = k;
            v.witness_coefficient = word_jet.coeff(k);
        }
    }
    return v;
}

BreakResult break_relation(const Word& w, const Jet& f, const Jet& g, int conjugator_degree,
                           int order, int samples, std::uint64_t seed, double tol_rel) {
    if (w.empty()) throw InvalidWord("cannot break the empty word");
    if (is_pure_power(w)) {
        throw InvalidWord("pure generator powers are excluded: " + serialize_word(w));
    }
    if (conjugator_degree < 2 || order < conjugator_degree) {
        throw InvalidOrders("need order >= conjugator degree >= 2");
    }
    if (samples < 1) throw InvalidOrders("need at least one sample");

    const CounterRng rng(seed, 0x636f6e6a75676174ull);

    std::optional<BreakResult> strongest;
    for (int s = 0; s < samples; ++s) {
        std::vector<Complex> a(static_cast<std::size_t>(conjugator_degree), Complex(0.0, 0.0));
        a[0] = Complex(1.0, 0.0);
        const CounterRng sample_rng = rng.substream(static_cast<std::uint64_t>(s));
        for (int j = 2; j <= conjugator_degree; ++j) {
            a[static_cast<std::size_t>(j - 1)] =
                sample_rng.uniform_disc(static_cast<std::uint64_t>(j), std::pow(0.3, j - 1));
        }
        ConjugatorPoint point(std::move(a));
        const Jet word_jet = evaluate_word_jet(w, f, g, point, order);
        RelationVerdict verdict = classify_word_jet(w, word_jet, tol_rel);
        BreakResult result{std::move(verdict), std::move(point), s + 1, order, seed};
        if (result.verdict.broken) return result;
        if (!strongest || result.verdict.max_deviation > strongest->verdict.max_deviation) {
            strongest = std::move(result);
        }
    }
    strongest->samples_tried = samples;
    return std::move(*strongest);
}

FreeProductReport certify_free_product(const Jet& f, const Jet& g, const ConjugatorPoint& h,
                                       std::optional<Torsion> torsion, int max_blocks,
                                       int order, double tol_rel,
                                       std::optional<std::size_t> max_letters) {
    if (order < 1) throw OrderMismatch("certification order must be positive");
    const int retry_order = 2 * order;
    const Jet f_hi = require_order(f, retry_order, "certify_free_product: f");
    const Jet g_hi = require_order(g, retry_order, "certify_free_product: g");
    const Jet f_lo = truncate(f_hi, order);
    const Jet g_lo = truncate(g_hi, order);

    if (torsion) {
        const Jet fk = power(f_lo, torsion->k);
        const double f_scale = power_roundoff_scale(f_lo, torsion->k);
        if (!is_identity(fk, tol_rel * std::max(1.0, f_scale))) {
            throw TorsionViolated("f does not have order " + std::to_string(torsion->k) +
                                  " at this jet order");
        }
        const Jet gl = power(g_lo, torsion->l);
        const double g_scale = power_roundoff_scale(g_lo, torsion->l);
        if (!is_identity(gl, tol_rel * std::max(1.0, g_scale))) {
            throw TorsionViolated("g does not have order " + std::to_string(torsion->l) +
                                  " at this jet order");
        }
    }

    if (!torsion && !max_letters) {
        max_letters = static_cast<std::size_t>(4 * max_blocks);
    }

    FreeProductReport report;
    report.order = order;
    report.max_blocks = max_blocks;
    report.torsion = torsion;
    report.tol = tol_rel;

    for (const Word& w :
         enumerate_words(torsion, max_blocks, /*exclude_pure_powers=*/true, max_letters)) {
        ++report.words_checked;
        const Jet low = evaluate_word_jet(w, f_lo, g_lo, h, order);
        if (!is_identity(low, identity_tolerance(low, tol_rel))) continue;

        // identity at this order: retry once at twice the order
        const Jet high = evaluate_word_jet(w, f_hi, g_hi, h, retry_order);
        WordFinding finding;
        finding.word = w;
        finding.order_used = order;
        finding.retry_order = retry_order;
        finding.identity_at_retry = is_identity(high, identity_tolerance(high, tol_rel));
        finding.category = finding.identity_at_retry ? "possible_relation" : "truncation_artifact";
        report.failures.push_back(std::move(finding));
    }
    return report;
}

} // namespace germforge
