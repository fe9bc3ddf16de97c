// Addressing and navigation for the three tree families the simulator runs
// on: the (d+1)-homogeneous tree, the rooted infinite tree whose root has
// degree d, and its height-n truncation whose leaves have degree 1.
//
// Vertices are child-index paths from the root rather than global integer
// ids, so trees stay lazy and unbounded: the infected set explored by a
// simulation is a vanishing fraction of the tree and nothing is
// preallocated.  The homogeneous tree is the rooted infinite tree plus a
// mirrored copy hanging above the root; the extra flag on VertexRef selects
// the side.

#ifndef FROGLAB_TREE_HPP
#define FROGLAB_TREE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace froglab {

enum class TreeVariant { Homogeneous, RootedInfinite, RootedFinite };

struct TreeKind {
  TreeVariant variant;
  int d;       // branching number, >= 2
  int height;  // RootedFinite only, >= 1; ignored otherwise

  static TreeKind homogeneous(int d) {
    return TreeKind{TreeVariant::Homogeneous, d, 0};
  }
  static TreeKind rooted_infinite(int d) {
    return TreeKind{TreeVariant::RootedInfinite, d, 0};
  }
  static TreeKind rooted_finite(int d, int n) {
    return TreeKind{TreeVariant::RootedFinite, d, n};
  }

  bool operator==(const TreeKind&) const = default;
};

// Throws ConfigError unless d >= 2 (and n >= 1 for the finite family).
void validate(const TreeKind& tree);

struct VertexRef {
  // Homogeneous trees only: the vertex lies in the mirrored subtree hanging
  // above the root.  (true, empty path) is the root's extra neighbor.
  bool above_root = false;
  std::vector<std::uint8_t> path;  // child indices in {0,...,d-1}

  static VertexRef root() { return VertexRef{}; }
  static VertexRef of(std::initializer_list<std::uint8_t> ix) {
    return VertexRef{false, std::vector<std::uint8_t>(ix)};
  }

  bool is_root() const { return !above_root && path.empty(); }
  VertexRef child(std::uint8_t i) const {
    VertexRef c = *this;
    c.path.push_back(i);
    return c;
  }

  bool operator==(const VertexRef&) const = default;
};

struct Navigation {
  std::optional<VertexRef> parent;
  std::vector<VertexRef> children;
  std::vector<VertexRef> neighbors;  // parent first (if any), then children
  int level = 0;                     // distance from the root
  bool is_leaf = false;              // RootedFinite level-n vertices only
};

// Full neighborhood of v in tree.  Throws AddressingError if v does not
// belong to the tree (above-root vertex of a rooted tree, level > n, or a
// child index >= d).
Navigation navigate(const TreeKind& tree, const VertexRef& v);

// Cheap single-field accessors used in walk inner loops.
int level_of(const VertexRef& v);
bool vertex_in_tree(const TreeKind& tree, const VertexRef& v);
std::optional<VertexRef> parent_of(const TreeKind& tree, const VertexRef& v);
int degree_of(const TreeKind& tree, const VertexRef& v);

// --- Compact keys -----------------------------------------------------------
//
// decode(encode(v)) == v, and encode is injective, so keys serve as hash-map
// keys for lazy per-vertex state.  Paths with depth <= 40 (and the byte-wide
// child indices implied by d <= 255) pack into a fixed-width block; deeper
// paths fall back to a length-prefixed byte sequence rather than truncating.

inline constexpr int kPackedDepthLimit = 40;

struct PackedVertexKey {
  // [0] flags (bit 0: above_root), [1] path length, [2..41] child indices,
  // zero-padded.
  std::array<std::uint8_t, 42> bytes{};
  bool operator==(const PackedVertexKey&) const = default;
};

using VertexKey = std::variant<PackedVertexKey, std::vector<std::uint8_t>>;

VertexKey encode(const VertexRef& v);
VertexRef decode(const VertexKey& key);
std::uint64_t key_hash(const VertexKey& key);

struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const {
    return static_cast<std::size_t>(key_hash(k));
  }
};

// --- Serialization ----------------------------------------------------------
//
// Slash-joined child indices; "" is the root, "0/1/1" a depth-3 vertex.
// Above-root vertices (homogeneous trees) get a "^" prefix: "^" is the
// root's extra neighbor, "^0/1" a vertex two levels above-and-beyond it.
std::string to_string(const VertexRef& v);
VertexRef vertex_from_string(const std::string& s);

}  // namespace froglab

#endif  // FROGLAB_TREE_HPP
