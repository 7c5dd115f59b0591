#pragma once

#include <optional>
#include <string>
#include <vector>

#include "brd/classspec.hpp"

namespace brd {

// Relations of one new vertex over a base structure: unary color, binary
// pair codes per base vertex, and (for symmetric ternary symbols) the held
// atom pairs. This is the 1-type representation the checkers quantify over.
struct ExtPattern {
  int color = -1;                       // -1: no unary symbols
  std::vector<uint8_t> pairs;           // |B| * binary_count pair codes
  std::vector<std::vector<int>> atoms;  // per ternary symbol slot: sorted {i,j} pairs

  ExtPattern restricted(const FinStructure& base, int k, int ternary_syms) const;
  bool operator==(const ExtPattern& o) const {
    return color == o.color && pairs == o.pairs && atoms == o.atoms;
  }
};

// all realizable extension patterns over base (base + x in spec)
std::vector<ExtPattern> ext_patterns(const FinStructure& base, const ClassSpec& spec);
FinStructure apply_pattern(const FinStructure& base, const ExtPattern& p);

enum class AmalgProperty { DAP, FAP, SFAP, SDAP };

struct AmalgWitness {
  // quantifier instantiation; A sits as the first |A| vertices of B and D,
  // C extends A by two vertices v,w; D extends B by v' realizing sigma.
  FinStructure A, B, C, D;
  ExtPattern sigma, tau;
  std::optional<FinStructure> Aprime, Cprime;  // SDAP candidates tried
  std::string note;
};

struct AmalgVerdict {
  AmalgProperty property;
  bool holds_up_to_bound = false;
  int bound = 0;
  std::optional<AmalgWitness> witness;

  std::string to_json(const ClassSpec& spec) const;
};

struct AmalgOptions {
  bool parallel = true;
};

AmalgVerdict check_sfap(const ClassSpec& spec, int bound, AmalgOptions opt = {});
AmalgVerdict check_sdap(const ClassSpec& spec, int bound, AmalgOptions opt = {});
AmalgVerdict check_dap_fap(const ClassSpec& spec, int bound, bool free_variant, AmalgOptions opt = {});

// Replay evaluators: true when a valid E exists for the instantiated tuple.
// A failing witness replays to false.
bool sfap_instance_has_solution(const ClassSpec& spec, const FinStructure& A, const FinStructure& B,
                                const FinStructure& C, const ExtPattern& sigma, const ExtPattern& tau);
bool sdap_instance_has_solution(const ClassSpec& spec, const FinStructure& A, const FinStructure& B,
                                const FinStructure& C, const ExtPattern& sigma, const ExtPattern& tau);

// iso-class representatives of members of spec, by size 1..max_size
std::vector<std::vector<FinStructure>> enumerate_members(const ClassSpec& spec, int max_size);

// extensions of `base` (kept pointwise as the first vertices) by up to
// `extra` vertices, one representative per iso-over-base class
std::vector<FinStructure> pointed_extensions(const ClassSpec& spec, const FinStructure& base, int extra);

}  // namespace brd
