#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "brd/structure.hpp"

namespace brd {

struct ClassSpec;
using ClassSpecPtr = std::shared_ptr<const ClassSpec>;

enum class BuiltinKind { LO_n, P_n, COE_np, LOE_mnp };

// Declarative Fraïssé-class description. Immutable after construction.
struct ClassSpec {
  enum class Kind { Unrestricted, Forb, Builtin, Superpose, OrderedExpansion };

  Kind kind;
  LanguagePtr lang;
  std::string name;  // optional, used by printing and the CLI

  // Unrestricted
  std::map<int, std::vector<FinStructure>> constraints;       // arity -> representatives
  std::map<int, std::set<std::vector<uint8_t>>> allowed;      // arity -> canonical codes (iso-closed)

  // Forb
  ClassSpecPtr base;
  std::vector<FinStructure> forbidden;

  // Builtin
  BuiltinKind bkind = BuiltinKind::LO_n;
  int bm = 0, bn = 0, bp = 0;

  // Superpose
  std::vector<ClassSpecPtr> parts;

  uint64_t hash() const;
  std::string print() const;  // DSL-round-trippable denotation
};

ClassSpecPtr make_unrestricted(LanguagePtr lang, std::map<int, std::vector<FinStructure>> constraint_reps,
                               std::string name = "");
ClassSpecPtr make_forb(ClassSpecPtr base, std::vector<FinStructure> forbidden, std::string name = "");
ClassSpecPtr make_builtin(BuiltinKind kind, int m, int n, int p, std::string name = "");
ClassSpecPtr make_superpose(std::vector<ClassSpecPtr> parts, std::string name = "");
ClassSpecPtr make_ordered_expansion(ClassSpecPtr base, std::string name = "");

bool member(const ClassSpec& spec, const FinStructure& a);
// Assumes a without its last vertex is a member; checks only constraints
// touching the last vertex.
bool member_extend(const ClassSpec& spec, const FinStructure& a);

bool r_irreducible(const FinStructure& f, int r);

// ---- quantifier-free complete 1-types over a structure ----------------------

// pairs laid out v-major, symbol-minor (restriction to an initial segment of
// the universe is a prefix). color: -1 = no unary symbols in the language,
// -2 = unassigned (the L^- reduct), else an index into the color table.
struct QfOneType {
  int m = 0;
  int color = -1;
  std::vector<uint8_t> pairs;

  QfOneType restricted(int k) const;
  bool operator==(const QfOneType& o) const { return m == o.m && color == o.color && pairs == o.pairs; }
  bool operator<(const QfOneType& o) const;
};

// realizable 1-types over a (one-vertex extensions inside spec), in the
// positional type order; include_unary=false enumerates the L^- reduct types.
std::vector<QfOneType> qf_one_types(const FinStructure& a, const ClassSpec& spec,
                                    bool include_unary = true, size_t cap = size_t(-1));

// builds the one-vertex extension of a realizing t (color of the new vertex
// taken from t when assigned; unassigned color picks none).
FinStructure realize_type(const FinStructure& a, const QfOneType& t);

bool type_realizable(const FinStructure& a, const ClassSpec& spec, const QfOneType& t);

// ---- the positional type order ≺ --------------------------------------------

// Rank vector of one coordinate (the pair values at a single base vertex).
// Linear-order symbols contribute a below/above bit; convex equivalence
// symbols fold around it so that ranks follow the cut/interval structure.
// Lexicographic over coordinates v ascending; restriction-compatible.
std::vector<int> coord_rank(const RelLanguage& lang, const uint8_t* pairs_at_v);
int compare_types(const RelLanguage& lang, const QfOneType& a, const QfOneType& b);

// number of convex-equivalence symbols; > 0 means the labeled machinery is on
int labeled_rank_count(const RelLanguage& lang);

// psi value of the pair pattern between two vertices (labeled specs):
// 0 = finest equivalence holds, k = E_k holds but not E_{k-1}, n = none.
int psi_of_pairvec(const RelLanguage& lang, const std::vector<uint8_t>& pv);

// language profile helpers
bool spec_uses_unary_colored_tree(const ClassSpec& spec);  // U-variant vs S-variant
std::vector<int> color_table(const ClassSpec& spec);       // realizable unary colors, ascending

}  // namespace brd
