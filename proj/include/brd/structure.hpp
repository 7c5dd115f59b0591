#pragma once

#include <array>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "brd/base.hpp"

namespace brd {

enum class SymFlag : unsigned {
  None = 0,
  Symmetric = 1u << 0,
  Irreflexive = 1u << 1,
  LinearOrder = 1u << 2,
  Equivalence = 1u << 3,
  Convex = 1u << 4,  // convex w.r.t. the referenced linear-order symbol
};

inline unsigned operator|(SymFlag a, SymFlag b) { return unsigned(a) | unsigned(b); }

struct RelSymbol {
  std::string name;
  int arity = 2;
  unsigned flags = 0;
  int convex_ref = -1;  // symbol index of the order this symbol is convex w.r.t.

  bool has(SymFlag f) const { return flags & unsigned(f); }
};

// Finite relational language. The declared symbol order is total and fixed;
// it induces the coordinate order used by the lexicographic type order.
struct RelLanguage {
  std::vector<RelSymbol> symbols;

  int index_of(const std::string& name) const;
  int unary_count() const;
  int binary_count() const;
  int max_arity() const;
  std::vector<int> unary_indices() const;
  std::vector<int> binary_indices() const;
  void validate() const;  // throws Error on bad flag wiring
  bool operator==(const RelLanguage& o) const;
  std::string print() const;
};

using LanguagePtr = std::shared_ptr<const RelLanguage>;

LanguagePtr intern_language(RelLanguage lang);

// Finite structure over {0..n-1}. Arity-1 and arity-2 interpretations are
// dense; higher arities keep sorted tuple lists.
struct FinStructure {
  LanguagePtr lang;
  int n = 0;
  std::vector<std::vector<uint8_t>> un;           // per unary symbol slot: n bytes
  std::vector<std::vector<uint8_t>> bin;          // per binary symbol slot: n*n bytes
  std::vector<std::vector<std::vector<int>>> hi;  // per arity>=3 symbol slot: sorted tuples

  FinStructure() = default;
  FinStructure(LanguagePtr l, int size);

  int sym_slot(int sym) const;  // slot within un/bin/hi for symbol index
  bool holds(int sym, const std::vector<int>& tuple) const;
  bool holds1(int sym, int a) const;
  bool holds2(int sym, int a, int b) const;
  void set1(int sym, int a, bool v = true);
  void set2(int sym, int a, int b, bool v = true);
  void set(int sym, const std::vector<int>& tuple, bool v = true);

  // 2 bits per binary symbol: bit0 = R(a,b), bit1 = R(b,a)
  int paircode(int sym, int a, int b) const;
  std::vector<uint8_t> pairvec(int a, int b) const;  // over all binary symbols

  // unary color = index into the color table (combination of unary truths);
  // -1 when the language has no unary symbols, -2 when unassigned.
  int unary_color(int v) const;

  FinStructure induced(const std::vector<int>& verts) const;
  FinStructure relabeled(const std::vector<int>& perm) const;  // vertex i -> position perm[i]
  FinStructure extended() const;                               // one fresh last vertex, no relations

  void check_flags() const;       // throws Error when a flag invariant fails
  bool flags_ok() const noexcept;

  std::vector<uint8_t> code() const;  // order-sensitive serialization
  bool operator==(const FinStructure& o) const { return code() == o.code(); }
  bool operator<(const FinStructure& o) const { return code() < o.code(); }
};

// ---- isomorphism machinery ------------------------------------------------

bool iso_check(const FinStructure& a, const FinStructure& b);
std::vector<std::vector<int>> embeddings(const FinStructure& a, const FinStructure& b);
long aut_order(const FinStructure& a);
std::vector<uint8_t> canonical_code(const FinStructure& a);

// A ordered by a fixed enumeration; equal iff ordered-isomorphic.
struct OrderedCopy {
  FinStructure base;
  std::vector<int> enumeration;  // enumeration[k] = base vertex placed k-th
  FinStructure relabeled;        // base relabeled so that enumeration is 0,1,2,...

  bool operator==(const OrderedCopy& o) const { return relabeled == o.relabeled; }
  bool operator<(const OrderedCopy& o) const { return relabeled < o.relabeled; }
};

std::vector<OrderedCopy> ordered_copies(const FinStructure& a);

// ---- JSON ------------------------------------------------------------------

std::string structure_to_json(const FinStructure& a);
FinStructure structure_from_json(const std::string& text);

}  // namespace brd
