#include "froglab/walks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "froglab/errors.hpp"

namespace froglab {

namespace {

// Position of `to` in navigate(tree, from).neighbors, or -1 if the two are
// not adjacent in `tree`.  Parent occupies slot 0 when it exists; children
// follow in index order.
int neighbor_slot(const TreeKind& tree, const VertexRef& from,
                  const VertexRef& to) {
  if (!vertex_in_tree(tree, to)) return -1;
  const std::optional<VertexRef> parent = parent_of(tree, from);
  if (parent && *parent == to) return 0;
  if (to.above_root == from.above_root &&
      to.path.size() == from.path.size() + 1 &&
      std::equal(from.path.begin(), from.path.end(), to.path.begin()))
    return int(to.path.back()) + (parent ? 1 : 0);
  return -1;
}

VertexRef pick_excluding(const std::vector<VertexRef>& options,
                         std::size_t excluded_slot, Rng& rng) {
  std::uint32_t i =
      uniform_below(rng, static_cast<std::uint32_t>(options.size() - 1));
  if (i >= excluded_slot) ++i;
  return options[i];
}

VertexRef nonbacktracking_step(const Navigation& nav,
                               const std::optional<VertexRef>& previous,
                               Rng& rng) {
  if (!previous)
    return nav.neighbors[uniform_below(
        rng, static_cast<std::uint32_t>(nav.neighbors.size()))];
  if (nav.neighbors.size() == 1) return nav.neighbors[0];  // leaf: bounce back
  std::size_t prev_slot = 0;
  while (nav.neighbors[prev_slot] != *previous) ++prev_slot;
  return pick_excluding(nav.neighbors, prev_slot, rng);
}

}  // namespace

VertexRef step(const StepKernel& kernel, const TreeKind& tree,
               const VertexRef& current,
               const std::optional<VertexRef>& previous, Rng& rng) {
  const Navigation nav = navigate(tree, current);
  if (previous &&
      std::find(nav.neighbors.begin(), nav.neighbors.end(), *previous) ==
          nav.neighbors.end())
    throw AddressingError("step: previous vertex " + to_string(*previous) +
                          " is not a neighbor of " + to_string(current));

  switch (kernel.variant) {
    case WalkKind::Simple:
      return nav.neighbors[uniform_below(
          rng, static_cast<std::uint32_t>(nav.neighbors.size()))];
    case WalkKind::UniformNonbacktracking:
      return nonbacktracking_step(nav, previous, rng);
    case WalkKind::RootBiasedNonbacktracking: {
      if (tree.variant == TreeVariant::Homogeneous)
        throw ConfigError(
            "root-biased nonbacktracking walks are defined on rooted trees "
            "only");
      if (nav.is_leaf) return *nav.parent;
      if (current.is_root() && previous) {
        const double dd = double(tree.d) * tree.d;
        if (bernoulli(rng, 1.0 / dd)) return *previous;
        // remaining mass (d^2-1)/d^2 split evenly: (d+1)/d^2 per other child
        return pick_excluding(nav.children, previous->path.back(), rng);
      }
      return nonbacktracking_step(nav, previous, rng);
    }
  }
  throw ConfigError("unreachable walk kind");
}

Path sample_walk(const StepKernel& kernel, const TreeKind& tree,
                 const VertexRef& start, int steps, Rng& rng) {
  if (steps < 0) throw ConfigError("walk length must be nonnegative");
  Path out;
  out.vertices.reserve(std::size_t(steps) + 1);
  out.vertices.push_back(start);
  std::optional<VertexRef> previous;
  for (int i = 0; i < steps; ++i) {
    VertexRef next = step(kernel, tree, out.vertices.back(), previous, rng);
    previous = out.vertices.back();
    out.vertices.push_back(std::move(next));
  }
  return out;
}

Path restrict_path(const Path& path, const TreeKind& target) {
  validate(target);
  if (target.variant == TreeVariant::Homogeneous)
    throw ConfigError("restriction targets are the rooted trees");
  Path out;
  for (const VertexRef& v : path.vertices) {
    if (!vertex_in_tree(target, v)) continue;
    // A deleted sojourn exits and re-enters through the same boundary
    // vertex (the root from above, a leaf from below), leaving an equal
    // pair behind; keep one copy so the result stays nearest-neighbor.
    if (!out.vertices.empty() && out.vertices.back() == v) continue;
    out.vertices.push_back(v);
  }
  return out;
}

ExcursionDraw sample_excursion(const TreeKind& tree, const VertexRef& u,
                               const VertexRef& v, Rng& rng,
                               std::int64_t max_steps) {
  validate(tree);
  if (max_steps < 1) throw ConfigError("excursion step cap must be positive");
  if (!vertex_in_tree(tree, u))
    throw AddressingError("excursion start " + to_string(u) +
                          " is not a vertex of the tree");
  const TreeKind hom = TreeKind::homogeneous(tree.d);
  // The first step may leave a rooted target (its restriction is then the
  // degenerate single-vertex path), but must be adjacent in the
  // homogeneous tree the draw runs on.
  if (neighbor_slot(hom, u, v) < 0)
    throw AddressingError("excursion first step " + to_string(v) +
                          " is not adjacent to " + to_string(u));

  const double toward_p = double(tree.d) / (tree.d + 1);
  Path raw;
  raw.vertices.push_back(u);
  raw.vertices.push_back(v);
  std::vector<VertexRef> chain{u, v};  // geodesic from u to the walker
  for (std::int64_t steps = 1; chain.size() > 1; ++steps) {
    if (steps >= max_steps)
      throw std::runtime_error("excursion exceeded the step cap (" +
                               std::to_string(max_steps) + ")");
    if (bernoulli(rng, toward_p)) {
      chain.pop_back();
    } else {
      const VertexRef& cur = chain.back();
      const VertexRef& toward = chain[chain.size() - 2];
      // Uniform over the d neighbors of cur other than `toward`.  The two
      // sides of the homogeneous tree touch only at their empty-path
      // vertices, so a side flip always means `toward` is cur's parent.
      const bool toward_is_parent =
          toward.above_root != cur.above_root ||
          toward.path.size() + 1 == cur.path.size();
      VertexRef next =
          toward_is_parent
              ? cur.child(static_cast<std::uint8_t>(uniform_below(
                    rng, static_cast<std::uint32_t>(tree.d))))
              : [&] {
                  const std::uint32_t i = uniform_below(
                      rng, static_cast<std::uint32_t>(tree.d));
                  if (i == 0) return *parent_of(hom, cur);
                  const std::uint8_t skip = toward.path.back();
                  const std::uint32_t c = (i - 1 < skip) ? i - 1 : i;
                  return cur.child(static_cast<std::uint8_t>(c));
                }();
      chain.push_back(std::move(next));
    }
    raw.vertices.push_back(chain.back());
  }

  ExcursionDraw draw;
  draw.path = tree.variant == TreeVariant::Homogeneous
                  ? std::move(raw)
                  : restrict_path(raw, tree);
  draw.length = std::int64_t(draw.path.vertices.size()) - 1;
  return draw;
}

ComposedWalk compose_srw(const Path& spine, const TreeKind& tree, Rng& rng) {
  validate(tree);
  if (spine.vertices.empty())
    throw AddressingError("compose_srw requires a nonempty spine");
  for (const VertexRef& v : spine.vertices)
    if (!vertex_in_tree(tree, v))
      throw AddressingError("spine vertex " + to_string(v) +
                            " is not a vertex of the tree");
  for (std::size_t i = 0; i + 1 < spine.vertices.size(); ++i)
    if (neighbor_slot(tree, spine.vertices[i], spine.vertices[i + 1]) < 0)
      throw AddressingError("spine is not a nearest-neighbor path at index " +
                            std::to_string(i));

  const int d = tree.d;
  const double geo_first = double(d - 1) / d;      // gap 0 and leaf gaps
  const double geo_later = double(d) / (d + 1);    // interior non-root gaps
  const double geo_root = double(d) * d / (double(d) * d + d - 1);

  ComposedWalk out;
  out.walk.vertices.push_back(spine.vertices.front());
  out.insertions.assign(spine.vertices.size() - 1, 0);

  const auto splice = [&](std::size_t gap, long count,
                          const std::vector<VertexRef>& firsts) {
    for (long i = 0; i < count; ++i) {
      const VertexRef& v0 = firsts[uniform_below(
          rng, static_cast<std::uint32_t>(firsts.size()))];
      ExcursionDraw draw = sample_excursion(tree, spine.vertices[gap], v0, rng);
      out.walk.vertices.insert(out.walk.vertices.end(),
                               draw.path.vertices.begin() + 1,
                               draw.path.vertices.end());
      out.insertions[gap] += draw.length;
    }
  };
  const auto without = [](const std::vector<VertexRef>& options,
                          const VertexRef& excluded) {
    std::vector<VertexRef> kept;
    kept.reserve(options.size() - 1);
    for (const VertexRef& w : options)
      if (w != excluded) kept.push_back(w);
    return kept;
  };

  for (std::size_t j = 0; j + 1 < spine.vertices.size(); ++j) {
    const VertexRef& xj = spine.vertices[j];
    const Navigation nav = navigate(tree, xj);
    if (nav.is_leaf) {
      splice(j, geometric(rng, geo_first), {*nav.parent});
    } else if (j == 0) {
      splice(j, geometric(rng, geo_first), nav.neighbors);
    } else if (tree.variant == TreeVariant::Homogeneous || !xj.is_root()) {
      splice(j, geometric(rng, geo_later),
             without(nav.neighbors, spine.vertices[j - 1]));
    } else {
      // Interior visit to the root of a rooted tree.  A first block of
      // excursions avoids the child the spine arrived from; a second block
      // over all children follows always when the spine backtracks, and
      // with probability 1/(d+1) when it does not.
      const bool second_block = spine.vertices[j - 1] == spine.vertices[j + 1]
                                    ? true
                                    : bernoulli(rng, 1.0 / (d + 1));
      splice(j, geometric(rng, geo_root),
             without(nav.children, spine.vertices[j - 1]));
      if (second_block) splice(j, geometric(rng, geo_first), nav.children);
    }
    out.walk.vertices.push_back(spine.vertices[j + 1]);
  }
  return out;
}

std::vector<std::int64_t> dilate_times(
    const std::vector<std::int64_t>& spine_times,
    const std::vector<std::int64_t>& insertions) {
  std::vector<std::int64_t> prefix(insertions.size() + 1, 0);
  for (std::size_t j = 0; j < insertions.size(); ++j) {
    if (insertions[j] < 0)
      throw ConfigError("negative insertion length at gap " +
                        std::to_string(j));
    prefix[j + 1] = prefix[j] + insertions[j];
  }
  std::vector<std::int64_t> out;
  out.reserve(spine_times.size());
  for (const std::int64_t t : spine_times) {
    if (t < 0 || std::size_t(t) > insertions.size())
      throw ConfigError("spine time " + std::to_string(t) +
                        " lies outside the insertion index range");
    out.push_back(t + prefix[std::size_t(t)]);
  }
  return out;
}

namespace {

// First `steps` steps of a path encoded as base-(d+1) neighbor slots.
std::uint64_t prefix_key(const TreeKind& tree, const Path& path, int steps) {
  std::uint64_t key = 0;
  for (int i = 0; i < steps; ++i) {
    const int slot =
        neighbor_slot(tree, path.vertices[std::size_t(i)],
                      path.vertices[std::size_t(i) + 1]);
    key = key * std::uint64_t(tree.d + 1) + std::uint64_t(slot);
  }
  return key;
}

}  // namespace

PathLawComparison compare_composed_to_simple(const TreeKind& tree, int steps,
                                             std::int64_t samples, Rng& rng) {
  validate(tree);
  if (steps < 1 || steps > 12)
    throw ConfigError("path-law comparison supports 1 to 12 steps");
  if (samples < 1) throw ConfigError("path-law comparison needs samples >= 1");
  if (std::pow(double(tree.d + 1), double(steps)) > 9.0e18)
    throw ConfigError("step-prefix keys would overflow; reduce d or steps");

  const StepKernel simple{WalkKind::Simple};
  const StepKernel spine_kernel{tree.variant == TreeVariant::Homogeneous
                                    ? WalkKind::UniformNonbacktracking
                                    : WalkKind::RootBiasedNonbacktracking};
  const VertexRef start = VertexRef::root();

  std::unordered_map<std::uint64_t, std::pair<std::int64_t, std::int64_t>>
      counts;
  for (std::int64_t s = 0; s < samples; ++s) {
    const Path spine = sample_walk(spine_kernel, tree, start, steps, rng);
    const ComposedWalk composed = compose_srw(spine, tree, rng);
    counts[prefix_key(tree, composed.walk, steps)].first++;
    const Path direct = sample_walk(simple, tree, start, steps, rng);
    counts[prefix_key(tree, direct, steps)].second++;
  }

  PathLawComparison cmp;
  cmp.samples = samples;
  cmp.cells = std::int64_t(counts.size());
  double abs_sum = 0.0;
  for (const auto& [key, pair] : counts)
    abs_sum += std::abs(double(pair.first) - double(pair.second));
  cmp.total_variation = abs_sum / (2.0 * double(samples));
  return cmp;
}

JLawReport spine_and_J_law_check(int d, int n, std::int64_t samples,
                                 Rng& rng) {
  validate(TreeKind::homogeneous(d));
  if (n < 1 || n > 5)
    throw ConfigError("exhaustive path enumeration is capped at n = 5 steps");
  if (samples < 1) throw ConfigError("J-law check needs samples >= 1");

  const std::uint32_t alphabet = std::uint32_t(d) + 1;
  std::uint64_t path_count = 1;
  for (int i = 0; i < n; ++i) path_count *= alphabet;
  if (path_count > 250'000)
    throw ConfigError("path table too large; reduce d or n");
  std::vector<std::array<std::int64_t, 6>> counts(
      path_count, std::array<std::int64_t, 6>{});

  // The walk is simulated on neighbor digits alone: digit 0 steps toward
  // the start except at the start itself, where all d+1 digits move away.
  // The digit stack is then the geodesic back to the start, which is all
  // the J statistic needs.
  std::vector<std::uint8_t> geodesic;
  for (std::int64_t s = 0; s < samples; ++s) {
    geodesic.clear();
    std::uint64_t key = 0;
    for (int i = 0; i < n; ++i) {
      const auto g = static_cast<std::uint8_t>(uniform_below(rng, alphabet));
      key = key * alphabet + g;
      if (!geodesic.empty() && g == 0)
        geodesic.pop_back();
      else
        geodesic.push_back(g);
    }
    const int k = int(geodesic.size());

    // Continue until the walk has escaped far enough that revisiting the
    // geodesic any deeper has negligible probability (<= d^-48).
    int depth = k;
    int match_len = k + 1;  // walker currently sits at the geodesic's end
    int min_j = k;
    while (depth <= k + 48) {
      const auto g = static_cast<std::uint8_t>(uniform_below(rng, alphabet));
      if (depth > 0 && g == 0) {
        --depth;
        if (match_len > depth + 1) match_len = depth + 1;
      } else {
        if (match_len == depth + 1 && depth < k && g == geodesic[depth])
          ++match_len;
        ++depth;
      }
      if (match_len == depth + 1 && depth < min_j) min_j = depth;
    }
    counts[key][min_j]++;
  }

  JLawReport report;
  report.d = d;
  report.n = n;
  report.samples = samples;
  const double path_mass = std::pow(double(d + 1), -double(n));
  for (std::uint64_t key = 0; key < path_count; ++key) {
    std::vector<std::uint8_t> digits(static_cast<std::size_t>(n));
    std::uint64_t rem = key;
    for (int i = n - 1; i >= 0; --i) {
      digits[std::size_t(i)] = std::uint8_t(rem % alphabet);
      rem /= alphabet;
    }
    int k = 0;
    for (int i = 0; i < n; ++i)
      k += (k > 0 && digits[std::size_t(i)] == 0) ? -1 : 1;

    std::int64_t total = 0;
    for (int j = 0; j <= k; ++j) {
      JLawCell cell;
      cell.steps = digits;
      cell.j = j;
      cell.geodesic_length = k;
      cell.expected = (j == 0 ? std::pow(double(d), -double(k))
                              : (d - 1) * std::pow(double(d), double(j - k - 1)))
                      * path_mass;
      cell.empirical = double(counts[key][j]) / double(samples);
      const double se =
          std::sqrt(cell.expected * (1.0 - cell.expected) / double(samples));
      cell.se_units = std::abs(cell.empirical - cell.expected) / se;
      report.max_se_deviation =
          std::max(report.max_se_deviation, cell.se_units);
      total += counts[key][j];
      report.cells.push_back(std::move(cell));
    }
    const double total_se =
        std::sqrt(path_mass * (1.0 - path_mass) / double(samples));
    report.max_path_total_se =
        std::max(report.max_path_total_se,
                 std::abs(double(total) / double(samples) - path_mass) /
                     total_se);
  }
  return report;
}

std::string path_csv_row(const Path& path) {
  std::string row;
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    if (i > 0) row += ',';
    row += to_string(path.vertices[i]);
  }
  return row;
}

}  // namespace froglab
