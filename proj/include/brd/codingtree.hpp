#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brd/classspec.hpp"
#include "brd/similarity.hpp"

namespace brd {

// ---- generic enumerated prefixes --------------------------------------------

struct Obligation {
  int level;
  QfOneType type;
  int realized_by = -1;  // vertex index that met it, -1 unmet
};

// Finite prefix of an enumerated Fraïssé limit with a fair round-robin
// saturation schedule over (level, 1-type) obligations.
struct EnumPrefix {
  ClassSpecPtr spec;
  int n = 0;
  uint64_t seed = 0;
  FinStructure k_n;
  std::vector<Obligation> schedule;
  int tracked_levels = 0;  // obligations recorded for levels < tracked_levels

  FinStructure initial(int m) const;  // K_m
  QfOneType type_of(int i, int m, bool include_unary) const;  // type of v_i over K_m
  int unmet_count() const;
  bool level_saturated(int m) const;
};

struct PrefixOptions {
  int obligation_level_cap = 48;
  size_t obligation_cap = 128;   // per level
  size_t sample_cap = 24;        // candidate completions sampled per step
};

EnumPrefix generic_prefix(ClassSpecPtr spec, int n, uint64_t seed, PrefixOptions opt = {});

// ---- coding tree slabs --------------------------------------------------------

// Finite truncation of the coding tree of 1-types: level m holds the types
// over K_m realized by some v_i with i >= m within the prefix.
struct CodingTreeSlab {
  char variant = 'S';  // 'S' full types, 'U' binary reduct + unary coloring
  EnumPrefix prefix;
  int depth = 0;                               // levels 0..depth populated
  std::vector<std::vector<QfOneType>> levels;  // sorted by the type order
  std::vector<int> coding_pos;                 // index of c(m) within levels[m]
  std::vector<int> coding_color;               // unary color of v_m (-1 when none)

  bool contains(int m, const QfOneType& t) const;
};

char preferred_variant(const ClassSpec& spec);  // per the density convention
CodingTreeSlab build_slab(const EnumPrefix& prefix, char variant, int depth);

// ---- fibers and the within-epoch splitting schedule ---------------------------

// Extensions of one type by the coordinate at the newly coded vertex,
// sorted by coordinate rank, plus the laminar refinement used to skew the
// splitting into one split per level.
struct Fiber {
  std::vector<QfOneType> cands;
  struct Split {
    int lo, mid, hi;  // separates [lo,mid) | [mid,hi)
    int psi = -1;     // labeled trees
  };
  std::vector<Split> splits;  // preorder: ancestors first
  int cont = -1;              // candidate index of the coding continuation

  int lca_split(int a, int b) const;  // index into splits separating cands a,b
};

// ---- the diagonal coding subtree ----------------------------------------------

// Identity of a splitting node inside the implicit subtree.
struct MeetKey {
  int epoch;                      // splits of epoch m precede coding node m
  std::vector<uint8_t> sigma_key; // fiber identity within the epoch
  int split_idx;                  // preorder index within the fiber
  bool operator==(const MeetKey& o) const {
    return epoch == o.epoch && sigma_key == o.sigma_key && split_idx == o.split_idx;
  }
};

struct PairRelation {
  bool same_component = true;  // S-variant roots split by unary color
  bool comparable = false;
  MeetKey meet;
  int cand_i = -1, cand_j = -1;  // candidate indices at the divergence fiber
  bool i_left = false;
  int psi = -1;
};

// The diagonal coding subtree of the coding tree of 1-types over an
// enumerated prefix, kept implicit: coding node m codes vertex v_m, fibers
// are the class-realizable one-point extensions, and the skewed splitting
// schedule is the laminar refinement of each fiber. Only the data visible
// to meet-closures of coding-node antichains is materialized.
struct CodingSkeleton {
  ClassSpecPtr spec;
  EnumPrefix prefix;
  char variant = 'S';
  bool labeled = false;

  CodingSkeleton(ClassSpecPtr s, EnumPrefix p);

  int coding_count() const { return prefix.n; }
  const Fiber& fiber(int epoch, const QfOneType& sigma) const;
  QfOneType coding_type(int m) const;          // type of v_m over K_m (variant-reduct)
  const QfOneType& continuation(int m) const;  // the coding node's successor type
  PairRelation relate(int i, int j) const;     // i < j
  bool comparable(int i, int j) const;

  // meet-closure of an antichain of coding nodes, as a decorated tree
  DecoratedTree closure(const std::vector<int>& subset) const;

 private:
  mutable std::map<std::pair<int, std::vector<uint8_t>>, Fiber> fiber_cache_;
  mutable std::map<int, QfOneType> cont_cache_;
  mutable std::map<std::pair<int, int>, PairRelation> rel_cache_;
  mutable std::map<int, FinStructure> initial_cache_;
  const FinStructure& initial(int m) const;
};

// Explicit leveled materialization (display, validation, persistence demos).
struct DiagCodingTree {
  std::shared_ptr<CodingSkeleton> skel;
  int depth = 0;  // number of coding nodes materialized

  struct Level {
    char kind;       // 'c' or 's'
    int epoch;
    int critical;    // position of the critical node in the level
    int psi = -1;
    std::vector<int> parent;
    std::vector<QfOneType> types;  // restricted type over K_epoch of each node
    std::vector<int> cand;         // candidate index the node is heading to (-1 across epochs)
  };
  std::vector<Level> levels;
  std::vector<int> coding_level_of;  // epoch -> level index

  DecoratedTree closure_of(const std::vector<int>& coding_indices) const {
    return skel->closure(coding_indices);
  }
  std::string to_dot() const;
  std::string to_json() const;
};

struct DiagTreeOptions {
  int max_width = 4096;
  bool bind_to_slab = true;  // require fiber types realized within the prefix
};

DiagCodingTree diagonal_subtree(const CodingTreeSlab& slab, ClassSpecPtr spec,
                                DiagTreeOptions opt = {});
DiagCodingTree diagonal_subtree(std::shared_ptr<CodingSkeleton> skel, int depth,
                                DiagTreeOptions opt = {});

// validation of the construction invariants; throw Error on violation
void validate_diagonal(const DiagCodingTree& t);
void validate_requirement2(const DiagCodingTree& t);
void validate_requirement3(const DiagCodingTree& t);
void validate_psi_clauses(const DiagCodingTree& t);

}  // namespace brd
