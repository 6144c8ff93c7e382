#pragma once

#include <memory>
#include <string>
#include <vector>

#include "germforge/conformal.hpp"
#include "germforge/map_expr.hpp"
#include "germforge/words.hpp"

namespace germforge {

// A word instance counts as a relation at a point when the itinerary closes
// within this tolerance; a perturbed walk counts as broken when its endpoint
// moves by more than it.
inline constexpr double kRelationTol = 1e-9;

// One neighborhood width of the shrinking sweep.
struct PerturbationAttempt {
    double alpha = 0.0;
    double ratio = 0.0;           // homothety ratio p of the germ (0: solve failed)
    std::string failure;          // empty when the walk completed and displaced
    std::vector<Complex> walk;    // w_0..w_k of the perturbed itinerary
    double displacement = 0.0;    // |w_k - w_0|
};

// Outcome of breaking one relation instance. The construction normalizes
// coordinates so the itinerary's unique maximal-modulus point is 1, cyclic
// shifts the word so that point sits at slot k-1 with a g-block following
// (swapping the generator roles when the following block is an f-block),
// then replaces g by H^-1 o g o H for the first neighborhood width whose
// perturbed walk stays in-domain and fails to close.
struct DemoReport {
    Word word;                    // the input word
    std::vector<Block> blocks;    // block list actually walked (shifted, relabeled)
    bool swapped = false;         // roles of f and g exchanged
    int shift = 0;                // cyclic left rotations applied to the blocks
    bool tie_broken = false;      // quadratic tie-break conjugation engaged
    ExprPtr change;               // coordinate change Phi; generators conjugated by it
    ExprPtr f, g;                 // normalized generators (A and B bases of `blocks`)
    std::vector<Complex> base_itinerary;  // hat z_0..z_k, closed, slot k-1 at 1
    double delta = 0.0;
    std::vector<PerturbationAttempt> attempts;
    int chosen = -1;              // attempts index of the accepted germ
    std::shared_ptr<const PerturbationGerm> germ;  // the accepted H
};

// Breaks the relation w(f, g) = id observed at z_start by conjugating g with
// a Riemann-map germ H of the teardrop with the given tail end delta; alpha
// sweeps (delta-1)/4 * {0.8, 0.4, 0.2, 0.1}, largest first. Throws
// NotARelation when the itinerary does not close at z_start, InvalidWord for
// empty or pure-power words, NoUniqueMaximum when distinct maximal-modulus
// points stay tied after the tie-break, and PerturbationExhausted (with the
// per-alpha diagnostics) when no width produces an in-domain displaced walk.
DemoReport relation_breaking_demo(const ExprPtr& f, const ExprPtr& g, const Word& w,
                                  Complex z_start, double delta = 1.05,
                                  int node_count = 1024);

}  // namespace germforge
