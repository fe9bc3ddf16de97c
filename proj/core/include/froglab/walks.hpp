// Step kernels, excursion samplers, and the excursion decomposition that
// rebuilds a simple random walk from a nonbacktracking spine.
//
// The decomposition is the workhorse of the time-change coupling: a
// nonbacktracking walk visits vertices strictly faster, and compose_srw
// turns one into a bona fide simple random walk by splicing geometrically
// many excursions into each gap.  The insertion lengths it reports are what
// dilate_times uses to transfer visit times between the two models.

#ifndef FROGLAB_WALKS_HPP
#define FROGLAB_WALKS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "froglab/rng.hpp"
#include "froglab/tree.hpp"

namespace froglab {

enum class WalkKind {
  Simple,                      // uniform over all neighbors
  UniformNonbacktracking,      // uniform over neighbors minus the previous one
  RootBiasedNonbacktracking,   // as above, but at the root of a rooted tree
                               // it may backtrack with probability 1/d^2
};

struct StepKernel {
  WalkKind variant = WalkKind::Simple;
};

struct Path {
  std::vector<VertexRef> vertices;
};

// A walk from u that takes its first step to v and stops on first return
// to u.  length == vertices.size() - 1 (number of steps).  Restricted draws
// (rooted targets) may degenerate to the single vertex u, length 0, when v
// lies outside the target tree; callers sampling first steps inside the
// tree never see that case.
struct ExcursionDraw {
  Path path;
  std::int64_t length = 0;
};

// One step of the kernel from `current`, where `previous` is the vertex the
// walker arrived from (absent on a walk's first step).  Throws
// AddressingError if previous is not a neighbor of current, ConfigError if
// the kernel/tree combination is undefined (root-biased walks live on
// rooted trees only).
VertexRef step(const StepKernel& kernel, const TreeKind& tree,
               const VertexRef& current, const std::optional<VertexRef>& previous,
               Rng& rng);

// Walks `steps` kernel steps from `start` and returns the trajectory
// (steps+1 vertices).
Path sample_walk(const StepKernel& kernel, const TreeKind& tree,
                 const VertexRef& start, int steps, Rng& rng);

// Samples an excursion from u with first step to v.  On the homogeneous
// tree the walk heads back toward u with probability d/(d+1) each step and
// to each of the d other neighbors with probability 1/(d(d+1)); rooted
// trees restrict such a draw, so u must belong to `tree` while v may be any
// homogeneous-tree neighbor of u.  Aborts via std::runtime_error if the
// draw exceeds max_steps (astronomically unlikely at the default).
ExcursionDraw sample_excursion(const TreeKind& tree, const VertexRef& u,
                               const VertexRef& v, Rng& rng,
                               std::int64_t max_steps = 1'000'000);

// Keeps the subsequence of a homogeneous-tree path lying inside `target`
// (a rooted tree) and collapses runs of equal vertices left behind by
// deleted sojourns, so the result is again a nearest-neighbor path.
Path restrict_path(const Path& path, const TreeKind& target);

struct ComposedWalk {
  Path walk;
  // insertions[j] = total steps spliced between spine[j] and spine[j+1];
  // one entry per spine gap (spine size - 1).
  std::vector<std::int64_t> insertions;
};

// Splices independent excursions into each gap of a nonbacktracking spine
// so that the composed walk is distributed as a simple random walk started
// at spine[0].  The spine must be a nearest-neighbor path in `tree` drawn
// from the matching kernel: uniform nonbacktracking on the homogeneous
// tree, root-biased on the rooted trees.  Gap j receives a concatenation of
// Geo((d-1)/d) excursions with uniformly chosen first steps when j = 0,
// Geo(d/(d+1)) excursions avoiding the previous spine vertex otherwise,
// with two special cases: at the root of a rooted tree the count law splits
// into a Geo(d^2/(d^2+d-1)) block away from the previous vertex optionally
// followed by a Geo((d-1)/d) block over all children (always when the spine
// backtracks there, with probability 1/(d+1) when it does not), and at a
// leaf every excursion starts toward the parent.
ComposedWalk compose_srw(const Path& spine, const TreeKind& tree, Rng& rng);

// Visit-time transfer under the coupling: a spine time t maps to
// t + sum of insertions[j] for j < t.  Every entry of spine_times must lie
// in [0, insertions.size()].
std::vector<std::int64_t> dilate_times(const std::vector<std::int64_t>& spine_times,
                                       const std::vector<std::int64_t>& insertions);

// Empirical check that composed walks and directly simulated simple random
// walks put the same law on their first `steps` steps.
struct PathLawComparison {
  double total_variation = 0.0;
  std::int64_t samples = 0;  // per side
  std::int64_t cells = 0;    // distinct step prefixes observed
};

PathLawComparison compare_composed_to_simple(const TreeKind& tree, int steps,
                                             std::int64_t samples, Rng& rng);

// Joint law of an n-step simple random walk prefix on the homogeneous tree
// together with J, the index of the deepest geodesic vertex (toward the
// start) that the walk ever revisits from time n on.  For a prefix whose
// endpoints are k apart, the mass of (path, J=j) is d^{-k}(d+1)^{-n} at
// j = 0 and (d-1)d^{-k+j-1}(d+1)^{-n} for 1 <= j <= k; the total over j
// telescopes to the uniform path law (d+1)^{-n}.  (A superficially
// plausible alternative total (d-1)^{-n} fails even the d=2, n=1 hand
// check, so the report certifies the per-path totals against (d+1)^{-n}.)
struct JLawCell {
  std::vector<std::uint8_t> steps;  // neighbor index taken at each step (0..d)
  int j = 0;
  int geodesic_length = 0;  // k for this path
  double expected = 0.0;
  double empirical = 0.0;
  double se_units = 0.0;  // |empirical - expected| / binomial SE
};

struct JLawReport {
  int d = 0;
  int n = 0;
  std::int64_t samples = 0;
  std::vector<JLawCell> cells;
  double max_se_deviation = 0.0;
  // Deviation of per-path totals (summed over j) from (d+1)^{-n}.
  double max_path_total_se = 0.0;
};

// Simulates the (path, J) law above and compares every cell against its
// predicted mass.  Exhaustive over the (d+1)^n paths, so n is capped at 5
// (ConfigError beyond).
JLawReport spine_and_J_law_check(int d, int n, std::int64_t samples, Rng& rng);

// Slash-encoded vertices joined by commas, one walk per CSV row.
std::string path_csv_row(const Path& path);

}  // namespace froglab

#endif  // FROGLAB_WALKS_HPP
