#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "germforge/errors.hpp"
#include "germforge/jet.hpp"
#include "germforge/map_expr.hpp"
#include "germforge/relation.hpp"
#include "germforge/words.hpp"

using germforge::Complex;
using germforge::ConjugatorPoint;
using germforge::Jet;
using germforge::Torsion;
using germforge::Word;

namespace {

constexpr double kPi = 3.14159265358979323846;

double dist(Complex a, Complex b) { return std::abs(a - b); }

Jet rotation_jet(double angle, int order) {
    Jet j(order);
    j.coeff(1) = std::polar(1.0, angle);
    return j;
}

Word W(const std::string& text, std::optional<Torsion> torsion = std::nullopt) {
    return germforge::parse_word(text, torsion);
}

ConjugatorPoint point(std::vector<Complex> a) { return ConjugatorPoint(std::move(a)); }

} // namespace

TEST_CASE("single-letter words reproduce the generators") {
    const Jet f = germforge::jet_of_expr(germforge::parse_expr("poly(2, 0.5)"), 6);
    const Jet g = germforge::jet_of_expr(germforge::parse_expr("poly(3, -0.2, 0.1)"), 6);

    // A ignores the conjugator entirely
    const Jet ja = germforge::evaluate_word_jet(W("A"), f, g, point({{1.0, 0.0}, {0.7, 0.3}}), 6);
    for (int k = 1; k <= 6; ++k) CHECK(ja.coeff(k) == f.coeff(k));

    // B with identity conjugator is plain g
    const Jet jb = germforge::evaluate_word_jet(W("B"), f, g, ConjugatorPoint::identity(4), 6);
    for (int k = 1; k <= 6; ++k) CHECK(dist(jb.coeff(k), g.coeff(k)) < 1e-15);
}

TEST_CASE("commuting rotations give an identity commutator with identity conjugator") {
    const Jet r = rotation_jet(kPi, 8);
    const Jet c = germforge::evaluate_word_jet(W("A.B.A^-1.B^-1"), r, r,
                                               ConjugatorPoint::identity(4), 8);
    CHECK(germforge::is_identity(c, 1e-14));
}

TEST_CASE("conjugated involution commutator matches the symbolic expansion") {
    // For f = g = -z and h = z + a2 z^2:
    //   h^-1(-h(z)) = -z - 2 a2 z^2 - 4 a2^2 z^3 + ...
    //   W = B^-1 A^-1 B A gives  z - 4 a2 z^2 + 16 a2^2 z^3 + ...
    for (double a2 : {1.0, 0.25, -0.4}) {
        const Jet r = rotation_jet(kPi, 3);
        const Jet c = germforge::evaluate_word_jet(
            W("A.B.A^-1.B^-1"), r, r, point({{1.0, 0.0}, {a2, 0.0}}), 3);
        CHECK(dist(c.coeff(1), {1.0, 0.0}) < 1e-14);
        CHECK(dist(c.coeff(2), {-4.0 * a2, 0.0}) < 1e-13);
        CHECK(dist(c.coeff(3), {16.0 * a2 * a2, 0.0}) < 1e-13);
    }
}

TEST_CASE("linear generator commutator has the hand-computed quadratic witness") {
    // f = 2z, g = 3z, h = z + 0.1 z^2: the commutator expands to z - 0.2 z^2 + O(z^3).
    Jet f(4), g(4);
    f.coeff(1) = Complex(2.0, 0.0);
    g.coeff(1) = Complex(3.0, 0.0);
    const Jet c = germforge::evaluate_word_jet(W("A.B.A^-1.B^-1"), f, g,
                                               point({{1.0, 0.0}, {0.1, 0.0}}), 4);
    CHECK(dist(c.coeff(1), {1.0, 0.0}) < 1e-14);
    CHECK(dist(c.coeff(2), {-0.2, 0.0}) < 1e-13);

    const auto verdict = germforge::classify_word_jet(W("A.B.A^-1.B^-1"), c, 1e-12);
    CHECK(verdict.broken);
    REQUIRE(verdict.witness_order.has_value());
    CHECK(*verdict.witness_order == 2);
    CHECK(dist(*verdict.witness_coefficient, {-0.2, 0.0}) < 1e-13);
}

TEST_CASE("low-order word jets are bitwise prefixes of high-order ones") {
    const Jet f = germforge::jet_of_expr(germforge::parse_expr("poly(2, 0.5, -0.1)"), 12);
    const Jet g = germforge::jet_of_expr(germforge::parse_expr("poly(1+1i, 0.3)"), 12);
    const ConjugatorPoint h = point({{1.0, 0.0}, {0.2, -0.1}, {0.0, 0.05}});
    const Word w = W("A^2.B.A^-1.B^-2");

    const Jet high = germforge::evaluate_word_jet(w, f, g, h, 12);
    const Jet low = germforge::evaluate_word_jet(w, f, g, h, 6);
    for (int k = 1; k <= 6; ++k) {
        CHECK(low.coeff(k) == high.coeff(k)); // exact, not approximate
    }
}

TEST_CASE("words that die under torsion evaluate to the identity for consistent germs") {
    // f has exact order 2, g exact order 3 (conjugated rotations); the word
    // A B^3 A is freely reduced but collapses under torsion (2,3).
    const int order = 10;
    const Jet f = germforge::conjugate(rotation_jet(kPi, order),
                                       germforge::jet_of_expr(germforge::parse_expr("poly(1, 0.3, -0.05)"), order));
    const Jet g_base = rotation_jet(2.0 * kPi / 3.0, order);
    const ConjugatorPoint h = point({{1.0, 0.0}, {0.15, 0.1}, {-0.02, 0.0}});

    const Word w = W("A.B^3.A"); // no torsion passed: stays nonempty
    REQUIRE_FALSE(w.empty());
    const Jet j = germforge::evaluate_word_jet(w, f, g_base, h, order);
    CHECK(germforge::is_identity(j, 1e-11 * std::max(1.0, germforge::max_coeff_magnitude(j))));
}

TEST_CASE("break_relation rejects bad inputs") {
    const Jet r = rotation_jet(kPi, 12);
    CHECK_THROWS_AS(germforge::break_relation(W("A^2"), r, r, 4, 12, 4, 1),
                    germforge::InvalidWord);
    CHECK_THROWS_AS(germforge::break_relation(W("e"), r, r, 4, 12, 4, 1),
                    germforge::InvalidWord);
    // A^2 under torsion (2,3) reduces to the empty word
    CHECK_THROWS_AS(germforge::break_relation(W("A^2", Torsion{2, 3}), r, r, 4, 12, 4, 1),
                    germforge::InvalidWord);
    CHECK_THROWS_AS(germforge::break_relation(W("A.B"), r, r, 1, 12, 4, 1),
                    germforge::InvalidOrders);
    CHECK_THROWS_AS(germforge::break_relation(W("A.B"), r, r, 4, 3, 4, 1),
                    germforge::InvalidOrders);
}

TEST_CASE("generic conjugation breaks the rotation commutator") {
    const Jet r = rotation_jet(kPi, 12);
    const auto result = germforge::break_relation(W("A.B.A^-1.B^-1"), r, r, 4, 12, 20, 42);
    CHECK(result.verdict.broken);
    REQUIRE(result.verdict.witness_order.has_value());
    CHECK(*result.verdict.witness_order <= 12);
    CHECK(result.point.coefficients()[0] == Complex(1.0, 0.0));
    for (int j = 2; j <= result.point.degree(); ++j) {
        CHECK(std::abs(result.point.coefficients()[static_cast<std::size_t>(j - 1)]) <=
              std::pow(0.3, j - 1) + 1e-15);
    }
}

TEST_CASE("every sampled conjugator breaks the commutator (Zariski genericity)") {
    const Jet r = rotation_jet(kPi, 12);
    const Word w = W("A.B.A^-1.B^-1");
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto result = germforge::break_relation(w, r, r, 4, 12, 1, seed);
        CHECK(result.verdict.broken);
    }
}

TEST_CASE("break_relation is deterministic in the seed") {
    const Jet f = germforge::jet_of_expr(germforge::parse_expr("poly(2, 0.1)"), 12);
    const Jet g = rotation_jet(2.0 * kPi / 3.0, 12);
    const Word w = W("A.B.A^-1.B^-1");
    const auto a = germforge::break_relation(w, f, g, 6, 12, 8, 1234);
    const auto b = germforge::break_relation(w, f, g, 6, 12, 8, 1234);
    CHECK(a.verdict.broken == b.verdict.broken);
    CHECK(a.point.coefficients() == b.point.coefficients());
    if (a.verdict.broken) {
        CHECK(*a.verdict.witness_order == *b.verdict.witness_order);
        CHECK(*a.verdict.witness_coefficient == *b.verdict.witness_coefficient);
    }
}

TEST_CASE("free product certification passes for a torsion (3,2) pair") {
    const int order = 24;
    const Jet f = rotation_jet(2.0 * kPi / 3.0, 2 * order);
    const Jet h_for_g = germforge::jet_of_expr(germforge::parse_expr("poly(1, 1, 0.2)"), 2 * order);
    const Jet g = germforge::conjugate(rotation_jet(kPi, 2 * order), h_for_g);
    const ConjugatorPoint h = point({{1.0, 0.0}, {0.12, 0.07}, {-0.03, 0.02}, {0.01, 0.0}});

    const auto report =
        germforge::certify_free_product(f, g, h, Torsion{3, 2}, 4, order);
    CHECK(report.certified());
    CHECK(report.words_checked == 18); // alternating words, <= 4 blocks, no pure powers
}

TEST_CASE("certification flags relations of commuting involutions") {
    const Jet r = rotation_jet(kPi, 24);
    const auto report = germforge::certify_free_product(r, r, ConjugatorPoint::identity(2),
                                                        Torsion{2, 2}, 2, 12);
    REQUIRE_FALSE(report.certified());
    // AB and BA are both the identity germ; flagged as possible relations
    CHECK(report.failures.size() == 2);
    for (const auto& finding : report.failures) {
        CHECK(finding.category == "possible_relation");
        CHECK(finding.identity_at_retry);
    }
}

TEST_CASE("degenerate identity generators flag every word") {
    const Jet id = Jet::identity(24);
    const auto report = germforge::certify_free_product(id, id, ConjugatorPoint::identity(2),
                                                        Torsion{2, 2}, 2, 12);
    CHECK(report.words_checked > 0);
    CHECK(static_cast<long>(report.failures.size()) == report.words_checked);
}

TEST_CASE("torsion precondition is enforced") {
    const Jet f = rotation_jet(2.0 * kPi / 3.0, 24);
    const Jet g = rotation_jet(kPi, 24);
    CHECK_THROWS_AS(germforge::certify_free_product(f, g, ConjugatorPoint::identity(2),
                                                    Torsion{2, 2}, 2, 12),
                    germforge::TorsionViolated);
}

TEST_CASE("free certification catches commuting linear generators") {
    // 2z and 3z commute, so the commutator word is a genuine relation when the
    // conjugator is the identity; a generic conjugator breaks it.
    Jet f(24), g(24);
    f.coeff(1) = Complex(2.0, 0.0);
    g.coeff(1) = Complex(3.0, 0.0);
    const auto bad = germforge::certify_free_product(f, g, ConjugatorPoint::identity(2),
                                                     std::nullopt, 4, 12, 1e-12,
                                                     std::size_t{4});
    REQUIRE_FALSE(bad.certified());
    bool commutator_flagged = false;
    for (const auto& finding : bad.failures) {
        if (germforge::serialize_word(finding.word) == "A.B.A^-1.B^-1") {
            commutator_flagged = true;
            CHECK(finding.category == "possible_relation");
        }
    }
    CHECK(commutator_flagged);

    const auto good = germforge::certify_free_product(
        f, g, ConjugatorPoint(std::vector<Complex>{{1.0, 0.0}, {0.1, 0.0}}), std::nullopt, 4,
        12, 1e-12, std::size_t{4});
    for (const auto& finding : good.failures) {
        CHECK(germforge::serialize_word(finding.word) != "A.B.A^-1.B^-1");
    }
}
