#include "froglab/tree.hpp"

#include <charconv>
#include <cstring>

#include "froglab/errors.hpp"
#include "froglab/rng.hpp"

namespace froglab {

void validate(const TreeKind& tree) {
  if (tree.d < 2) throw ConfigError("tree branching number d must be >= 2");
  if (tree.variant == TreeVariant::RootedFinite && tree.height < 1)
    throw ConfigError("finite tree height must be >= 1");
}

int level_of(const VertexRef& v) {
  // Above-root paths are measured from the root's extra neighbor, which
  // itself sits at distance 1.
  return static_cast<int>(v.path.size()) + (v.above_root ? 1 : 0);
}

bool vertex_in_tree(const TreeKind& tree, const VertexRef& v) {
  if (v.above_root && tree.variant != TreeVariant::Homogeneous) return false;
  for (std::uint8_t ix : v.path)
    if (static_cast<int>(ix) >= tree.d) return false;
  if (tree.variant == TreeVariant::RootedFinite &&
      level_of(v) > tree.height)
    return false;
  return true;
}

static void require_member(const TreeKind& tree, const VertexRef& v) {
  if (!vertex_in_tree(tree, v))
    throw AddressingError("vertex " + to_string(v) +
                          " is not a vertex of the given tree");
}

std::optional<VertexRef> parent_of(const TreeKind& tree, const VertexRef& v) {
  require_member(tree, v);
  if (!v.path.empty()) {
    VertexRef p = v;
    p.path.pop_back();
    return p;
  }
  if (tree.variant == TreeVariant::Homogeneous) {
    // The two sides of the homogeneous tree are each other's "parent": the
    // root's parent is its extra neighbor and vice versa.
    VertexRef p;
    p.above_root = !v.above_root;
    return p;
  }
  return std::nullopt;  // root of a rooted tree
}

Navigation navigate(const TreeKind& tree, const VertexRef& v) {
  validate(tree);
  require_member(tree, v);

  Navigation nav;
  nav.level = level_of(v);
  nav.parent = parent_of(tree, v);

  const bool finite = tree.variant == TreeVariant::RootedFinite;
  nav.is_leaf = finite && nav.level == tree.height;
  if (!nav.is_leaf) {
    nav.children.reserve(static_cast<std::size_t>(tree.d));
    for (int i = 0; i < tree.d; ++i)
      nav.children.push_back(v.child(static_cast<std::uint8_t>(i)));
  }

  nav.neighbors.reserve(nav.children.size() + (nav.parent ? 1 : 0));
  if (nav.parent) nav.neighbors.push_back(*nav.parent);
  nav.neighbors.insert(nav.neighbors.end(), nav.children.begin(),
                       nav.children.end());
  return nav;
}

int degree_of(const TreeKind& tree, const VertexRef& v) {
  require_member(tree, v);
  switch (tree.variant) {
    case TreeVariant::Homogeneous:
      return tree.d + 1;
    case TreeVariant::RootedInfinite:
      return v.is_root() ? tree.d : tree.d + 1;
    case TreeVariant::RootedFinite: {
      const int level = level_of(v);
      if (level == tree.height) return 1;
      return v.is_root() ? tree.d : tree.d + 1;
    }
  }
  throw AddressingError("unreachable tree variant");
}

VertexKey encode(const VertexRef& v) {
  if (v.path.size() <= kPackedDepthLimit) {
    PackedVertexKey key;
    key.bytes[0] = v.above_root ? 1 : 0;
    key.bytes[1] = static_cast<std::uint8_t>(v.path.size());
    if (!v.path.empty())
      std::memcpy(key.bytes.data() + 2, v.path.data(), v.path.size());
    return key;
  }
  // Variable-length fallback: flag byte, 4-byte little-endian length, then
  // the raw child indices.  Never truncates.
  std::vector<std::uint8_t> bytes;
  bytes.reserve(5 + v.path.size());
  bytes.push_back(v.above_root ? 1 : 0);
  const std::uint32_t len = static_cast<std::uint32_t>(v.path.size());
  for (int shift = 0; shift < 32; shift += 8)
    bytes.push_back(static_cast<std::uint8_t>(len >> shift));
  bytes.insert(bytes.end(), v.path.begin(), v.path.end());
  return bytes;
}

VertexRef decode(const VertexKey& key) {
  VertexRef v;
  if (const auto* packed = std::get_if<PackedVertexKey>(&key)) {
    v.above_root = (packed->bytes[0] & 1) != 0;
    const std::size_t len = packed->bytes[1];
    if (len > kPackedDepthLimit)
      throw AddressingError("packed vertex key with out-of-range length");
    v.path.assign(packed->bytes.begin() + 2, packed->bytes.begin() + 2 + len);
    return v;
  }
  const auto& bytes = std::get<std::vector<std::uint8_t>>(key);
  if (bytes.size() < 5)
    throw AddressingError("variable vertex key shorter than its header");
  v.above_root = (bytes[0] & 1) != 0;
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= std::uint32_t(bytes[1 + i]) << (8 * i);
  if (bytes.size() != 5 + std::size_t(len))
    throw AddressingError("variable vertex key length mismatch");
  v.path.assign(bytes.begin() + 5, bytes.end());
  return v;
}

static std::uint64_t hash_bytes(const std::uint8_t* data, std::size_t n,
                                std::uint64_t seed) {
  // Fold 8-byte words through the splitmix mixer; cheap and good enough for
  // hash-map use (engine state tables key on this).
  std::uint64_t h = mix_u64(seed, n);
  while (n >= 8) {
    std::uint64_t w;
    std::memcpy(&w, data, 8);
    h = mix_u64(h, w);
    data += 8;
    n -= 8;
  }
  if (n > 0) {
    std::uint64_t w = 0;
    std::memcpy(&w, data, n);
    h = mix_u64(h, w);
  }
  return h;
}

std::uint64_t key_hash(const VertexKey& key) {
  // Hash the canonical fields rather than the representation so that a
  // vertex hashes identically no matter which key form carried it.
  const VertexRef v = decode(key);
  return hash_bytes(v.path.data(), v.path.size(), v.above_root ? 0x5eed : 0);
}

std::string to_string(const VertexRef& v) {
  std::string out;
  if (v.above_root) out += '^';
  for (std::size_t i = 0; i < v.path.size(); ++i) {
    if (i > 0) out += '/';
    out += std::to_string(static_cast<unsigned>(v.path[i]));
  }
  return out;
}

VertexRef vertex_from_string(const std::string& s) {
  VertexRef v;
  std::size_t pos = 0;
  if (!s.empty() && s[0] == '^') {
    v.above_root = true;
    pos = 1;
  }
  while (pos < s.size()) {
    const std::size_t slash = s.find('/', pos);
    const std::size_t end = slash == std::string::npos ? s.size() : slash;
    unsigned ix = 0;
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + end, ix);
    if (ec != std::errc() || ptr != s.data() + end || ix > 255)
      throw AddressingError("malformed vertex string: '" + s + "'");
    v.path.push_back(static_cast<std::uint8_t>(ix));
    pos = end + (slash == std::string::npos ? 0 : 1);
    if (slash != std::string::npos && pos == s.size())
      throw AddressingError("malformed vertex string: '" + s + "'");
    if (slash == std::string::npos) break;
  }
  return v;
}

}  // namespace froglab
