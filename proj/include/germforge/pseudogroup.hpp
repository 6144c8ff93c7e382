#pragma once

#include <optional>
#include <string>
#include <vector>

#include "germforge/map_expr.hpp"
#include "germforge/words.hpp"

namespace germforge {

// Pseudogroup tolerances, shared with the report writers.
inline constexpr double kNewtonTol = 1e-11;
inline constexpr int kNewtonMaxSteps = 60;
inline constexpr double kMergeTol = 1e-8;
inline constexpr double kHyperbolicEps = 1e-4;

// The disc V of radius R on which the pseudogroup generated by
// f, f^-1, g, g^-1 acts. Points of V are gated by |z| < radius; the
// constructor requires all four generator germs to be valid on V.
struct DiscContext {
    double radius;
    ExprPtr f;
    ExprPtr g;
    double grid_resolution;
};

DiscContext make_disc_context(double radius, ExprPtr f, ExprPtr g,
                              double grid_resolution);

// Orbit of a start point under the letters of one word. points holds the
// block boundaries z_0..z_k while in domain; on escape the offending value
// is appended last and escape_index names the 1-based block that failed.
struct Itinerary {
    std::vector<Complex> points;
    Word word;
    bool in_domain = true;
    std::optional<int> escape_index;
};

// Applies w block by block, leftmost block first, so the word A.B acts as
// B(A(z)). When conjugator h is present the letter B acts as h^-1(g(h(z))).
// Every letter application must land strictly inside V, endpoint included;
// the first violation stops the walk. Throws GeometryError when |z| >= R,
// EvaluationFailure when an Inverse node diverges (distinct from escape).
Itinerary itinerary(const DiscContext& ctx, const Word& w, Complex z,
                    const ExprPtr& conjugator = nullptr);

// One sample node of the square grid over V.
struct GridNode {
    int i = 0;
    int j = 0;
    Complex z;
    bool in_domain = false;
    int label = -1; // component label, -1 for out-of-domain nodes
};

// Grid picture of the domain of definition of one word. Nodes are stored in
// outward spiral order from the origin (the role of a dense sample sequence);
// nodes on or outside the boundary circle are excluded by construction.
struct DomainGrid {
    double pitch = 0.0;
    std::vector<GridNode> nodes;
    int component_count = 0;
    std::vector<long> component_sizes; // indexed by label
    int zero_label = -1;               // label of the component containing 0
};

// Samples |z| < R at pitch grid_resolution, marks nodes by the itinerary
// membership test, and flood-fills 4-connected components. Labels are
// assigned in spiral discovery order. Requires grid_resolution < R/16.
DomainGrid domain_components(const DiscContext& ctx, const Word& w,
                             const ExprPtr& conjugator = nullptr);

// A root of W(z) = z found by Newton iteration.
struct FixedPointRecord {
    Complex location;
    Word word;
    Complex multiplier; // W'(location), by central finite difference
    bool hyperbolic = false;
};

// Newton search for fixed points of the word map in the annulus
// r_in <= |z| <= r_out, seeded at every in-domain grid node of the annulus.
// Converged roots are deduplicated within 10*newton_tol, restricted to the
// annulus, and discarded when their own itinerary escapes. Multipliers use a
// central finite difference of relative step 1e-6. Sorted by location.
std::vector<FixedPointRecord> find_fixed_points(const DiscContext& ctx,
                                                const Word& w,
                                                const ExprPtr& conjugator,
                                                double r_in, double r_out);

// Bounded orbit-disjointness certificate.
struct OrbitVerdict {
    bool meets = false;
    std::optional<Word> witness_word;    // word sending z1 next to z2
    std::optional<Complex> witness_point;
    long points_visited = 0;
    int max_blocks = 0;
    std::string verdict; // "meets" or "disjoint up to <n> blocks"
};

// Enumerates words with at most max_blocks blocks (the empty word included),
// collects the in-domain orbit of z1, and reports whether any orbit point
// lands within merge_tol of z2. Free enumeration caps letter length at
// 4*max_blocks; pass torsion to enumerate the finite normal forms instead.
OrbitVerdict orbits_disjoint(const DiscContext& ctx, Complex z1, Complex z2,
                             int max_blocks, const ExprPtr& conjugator = nullptr,
                             std::optional<Torsion> torsion = std::nullopt);

// Census accounting for one word.
struct CensusEntry {
    Word word;
    bool identity_word = false; // word map is the identity germ; skipped
    int fixed_points = 0;       // records returned for this word
    int new_distinct = 0;       // of those, how many were first sightings
};

// A distinct fixed-point location with an empirical stabilizer probe.
struct CensusPoint {
    FixedPointRecord record;
    int min_blocks = 0;   // fewest blocks among words that found it
    int words_fixing = 1; // how many enumerated words fixed it
};

struct CensusReport {
    Torsion torsion{2, 2};
    int max_blocks = 0;
    std::vector<CensusEntry> per_word;        // enumeration order
    std::vector<CensusPoint> distinct_points; // sorted by location
    std::vector<long> cumulative_distinct;    // [b-1]: distinct count using <= b blocks
    long hyperbolic_count = 0;
    double min_abs_multiplier = 0.0;
    double max_abs_multiplier = 0.0;
    double mean_abs_multiplier = 0.0;
};

// Fixed-point census over all normal-form words with torsion (k, 2) and at
// most max_blocks blocks, pure powers excluded. Requires ctx.f to be the
// rotation by 2*pi/k and ctx.g the rotation by pi (the conjugator moves g).
// Locations are deduplicated across words within merge_tol.
CensusReport census_nonsimply(const DiscContext& ctx, const Torsion& torsion,
                              const ExprPtr& conjugator, int max_blocks,
                              double r_in, double r_out);

} // namespace germforge
