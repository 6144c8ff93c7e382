#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "germforge/jet.hpp"
#include "germforge/words.hpp"

namespace germforge {

// Truncated conjugator coefficients (a_1, ..., a_K) viewed as a point of C^K;
// a_1 != 0 so the conjugator is a local diffeomorphism.
class ConjugatorPoint {
public:
    explicit ConjugatorPoint(std::vector<Complex> coefficients);

    static ConjugatorPoint identity(int degree);

    int degree() const { return static_cast<int>(a_.size()); }
    const std::vector<Complex>& coefficients() const { return a_; }

    // Promote to a jet: listed coefficients, zero-padded (or truncated) to `order`.
    Jet to_jet(int order) const;

private:
    std::vector<Complex> a_;
};

// Outcome of testing one word jet against the identity.
// broken == witness_order.has_value() == witness_coefficient.has_value().
struct RelationVerdict {
    Word word;
    bool broken = false;
    std::optional<int> witness_order;           // smallest j with |c_j - [j==1]| > tol
    std::optional<Complex> witness_coefficient; // c_j at that order
    double max_deviation = 0.0;                 // largest |c_j - [j==1]| over all orders
};

struct BreakResult {
    RelationVerdict verdict;
    ConjugatorPoint point;  // breaking point, or the strongest candidate when not broken
    int samples_tried = 0;
    int order_used = 0;
    std::uint64_t seed = 0;
};

// One flagged word from a free-product certification sweep.
struct WordFinding {
    Word word;
    // "truncation_artifact": identity at `order` but not at 2*order;
    // "possible_relation": identity at both.
    std::string category;
    int order_used = 0;
    int retry_order = 0;
    bool identity_at_retry = false;
};

struct FreeProductReport {
    std::vector<WordFinding> failures;
    long words_checked = 0;
    int order = 0;
    int max_blocks = 0;
    std::optional<Torsion> torsion;
    double tol = 0.0;

    bool certified() const { return failures.empty(); }
};

// Jet of W(f, h^{-1} g h) at 0 to `order`: substitute A -> f, B -> conjugated g,
// then compose blockwise, leftmost block applied first. f and g must be given
// at order >= `order` (they are truncated down); anything shorter throws
// OrderMismatch.
Jet evaluate_word_jet(const Word& w, const Jet& f, const Jet& g, const ConjugatorPoint& h,
                      int order);

// Classify one word jet against the identity with absolute tolerance
// tol_rel * max(1, largest coefficient magnitude).
RelationVerdict classify_word_jet(const Word& w, const Jet& word_jet, double tol_rel);

// Sample conjugator points (a_1 = 1, a_j uniform in |a_j| <= 0.3^{j-1}) until
// one breaks the relation, i.e. the word jet differs from the identity.
// Returns the first breaking sample, or broken = false plus the sample of
// largest deviation. Preconditions: w is not empty and not a pure power
// (InvalidWord); order >= K >= 2 (InvalidOrders).
BreakResult break_relation(const Word& w, const Jet& f, const Jet& g, int conjugator_degree,
                           int order, int samples, std::uint64_t seed,
                           double tol_rel = 1e-12);

// Sweep every word with at most max_blocks blocks (pure powers excluded;
// free enumeration bounded by max_letters, default 4*max_blocks) and report
// each word whose jet is the identity at `order`, retried once at 2*order to
// separate truncation artifacts from possible relations. f and g must carry
// order >= 2*order. With torsion (k,l), power(f,k) and power(g,l) must be
// identity jets within tolerance (TorsionViolated otherwise).
FreeProductReport certify_free_product(const Jet& f, const Jet& g, const ConjugatorPoint& h,
                                       std::optional<Torsion> torsion, int max_blocks,
                                       int order, double tol_rel = 1e-12,
                                       std::optional<std::size_t> max_letters = std::nullopt);

} // namespace germforge
