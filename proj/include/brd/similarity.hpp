#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "brd/base.hpp"

namespace brd {

struct DiagCodingTree;

enum class SimMode { Plain, Plus, L, LPlus, Weak };

// Finite leveled meet-closed tree with the decorations similarity cares
// about. Levels are critical levels: exactly one coding or splitting node
// per level. Node lists per level are in lexicographic (planar) order.
struct DecoratedTree {
  struct Node {
    int level = 0;
    int parent = -1;  // node id at the previous level, -1 for roots
    char kind = 'p';  // 'c' coding, 's' splitting, 'p' plain
    int color = -1;   // unary color on coding nodes and roots (-1: none)
    int psi = -1;     // label on splitting nodes (labeled trees)
    // pair codes at the vertex coded at this node's level, one byte per
    // binary symbol; meaningful when the level is a coding level and this
    // node is not the coding node itself.
    std::vector<uint8_t> pass;
  };

  int nb = 0;  // binary symbol count (pass width)
  bool labeled = false;
  std::vector<Node> nodes;
  std::vector<std::vector<int>> levels;

  int level_count() const { return int(levels.size()); }
  int critical_of(int level) const;  // node id of the critical node
  std::vector<int> children(int node) const;
  void validate() const;  // structural invariants; throws Error
};

// canonical byte string; equal across exactly the similarity class
struct SimCode {
  std::vector<uint8_t> bytes;
  bool operator==(const SimCode& o) const { return bytes == o.bytes; }
  bool operator<(const SimCode& o) const { return bytes < o.bytes; }
  std::string hex() const { return to_hex(bytes); }
};

SimCode sim_code(const DecoratedTree& t, bool labeled);

bool similar(const DecoratedTree& s, const DecoratedTree& t, SimMode mode);

// Exhaustive level-respecting bijection search; the independent test oracle
// for similar(). Exponential, for small trees only.
bool similar_by_map_search(const DecoratedTree& s, const DecoratedTree& t, SimMode mode);

// Meet-closure of an antichain of coding nodes in an explicit diagonal
// coding tree; node decorations are read off the ambient tree.
DecoratedTree meet_close(const DiagCodingTree& tree, const std::vector<int>& coding_indices);

// passing-type-preserving check for a full node map f: S.nodes -> T.nodes
bool ptp_check(const std::vector<int>& f, const DecoratedTree& s, const DecoratedTree& t);

// ---- closure assembly --------------------------------------------------------

// Level-ordered critical events of a meet-closure. Terminals are named by
// caller ids; coding events terminate the branch of `vertex`, split events
// divide the branch holding `left` u `right` into the two lex sides.
struct ClosureEvent {
  bool coding = false;
  int vertex = -1;
  int color = -1;
  std::vector<int> left, right;
  int psi = -1;
};

// Builds the decorated tree of a closure from its abstract event history.
// pair_of(t, u) returns the pair codes between terminal t's vertex and the
// coded vertex u (the passing decoration source). Both degree calculators
// funnel through this builder, so their canonical codes are comparable.
DecoratedTree build_closure_tree(int nb, bool labeled,
                                 const std::vector<std::pair<int, std::vector<int>>>& components,
                                 const std::vector<ClosureEvent>& events,
                                 const std::function<std::vector<uint8_t>(int, int)>& pair_of);

}  // namespace brd
