#include "brd/amalgamation.hpp"

#include <omp.h>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace brd {

namespace {

std::vector<int> ternary_indices(const RelLanguage& lang) {
  std::vector<int> r;
  for (size_t i = 0; i < lang.symbols.size(); ++i)
    if (lang.symbols[i].arity == 3) {
      if (!lang.symbols[i].has(SymFlag::Symmetric))
        throw UnsupportedSpec("amalgamation: ternary symbols must be symmetric");
      r.push_back(int(i));
    } else if (lang.symbols[i].arity > 3) {
      throw UnsupportedSpec("amalgamation: arity above 3 not supported");
    }
  return r;
}

}  // namespace

ExtPattern ExtPattern::restricted(const FinStructure& base, int k, int ternary_syms) const {
  ExtPattern r;
  r.color = color;
  int nb = base.lang->binary_count();
  r.pairs.assign(pairs.begin(), pairs.begin() + long(k) * nb);
  r.atoms.resize(size_t(ternary_syms));
  for (int s = 0; s < ternary_syms; ++s) {
    for (auto& a : atoms[size_t(s)])
      if (a[0] < k && a[1] < k) r.atoms[size_t(s)].push_back(a);
    std::sort(r.atoms[size_t(s)].begin(), r.atoms[size_t(s)].end());
  }
  return r;
}

FinStructure apply_pattern(const FinStructure& base, const ExtPattern& p) {
  FinStructure ext = base.extended();
  int x = base.n;
  auto bins = base.lang->binary_indices();
  for (int v = 0; v < base.n; ++v)
    for (size_t k = 0; k < bins.size(); ++k) {
      uint8_t code = p.pairs[size_t(v) * bins.size() + k];
      int slot = ext.sym_slot(bins[k]);
      ext.bin[slot][size_t(x) * ext.n + v] = (code & 2) ? 1 : 0;
      ext.bin[slot][size_t(v) * ext.n + x] = (code & 1) ? 1 : 0;
    }
  for (int s : bins)
    if (base.lang->symbols[s].has(SymFlag::Equivalence)) ext.bin[ext.sym_slot(s)][size_t(x) * ext.n + x] = 1;
  auto us = base.lang->unary_indices();
  if (p.color >= 0)
    for (size_t k = 0; k < us.size(); ++k)
      if (p.color & (1 << k)) ext.set1(us[k], x);
  auto terns = ternary_indices(*base.lang);
  for (size_t s = 0; s < terns.size(); ++s)
    for (auto& a : p.atoms[s]) ext.set(terns[s], {x, a[0], a[1]});
  return ext;
}

std::vector<ExtPattern> ext_patterns(const FinStructure& base, const ClassSpec& spec) {
  auto terns = ternary_indices(*base.lang);
  auto bins = base.lang->binary_indices();
  std::vector<ExtPattern> out;

  std::vector<int> colors;
  if (base.lang->unary_count() == 0) colors.push_back(-1);
  else colors = color_table(spec);

  // all unordered base pairs, for ternary atoms
  std::vector<std::vector<int>> base_pairs;
  for (int i = 0; i < base.n; ++i)
    for (int j = i + 1; j < base.n; ++j) base_pairs.push_back({i, j});

  std::vector<uint8_t> paircur(size_t(base.n) * bins.size(), 0);
  std::function<void(int, int)> rec_pairs;
  std::function<void(ExtPattern&, size_t, size_t)> rec_atoms = [&](ExtPattern& p, size_t s, size_t q) {
    if (s == terns.size()) {
      FinStructure ext = apply_pattern(base, p);
      if (member_extend(spec, ext)) out.push_back(p);
      return;
    }
    if (q == base_pairs.size()) {
      rec_atoms(p, s + 1, 0);
      return;
    }
    rec_atoms(p, s, q + 1);
    p.atoms[s].push_back(base_pairs[q]);
    rec_atoms(p, s, q + 1);
    p.atoms[s].pop_back();
  };

  for (int color : colors) {
    std::function<void(int)> rec = [&](int v) {
      if (v == base.n) {
        ExtPattern p;
        p.color = color;
        p.pairs = paircur;
        p.atoms.resize(terns.size());
        if (terns.empty()) {
          FinStructure ext = apply_pattern(base, p);
          if (member_extend(spec, ext)) out.push_back(p);
        } else {
          rec_atoms(p, 0, 0);
        }
        return;
      }
      // per-vertex: enumerate the joint code vector across binary symbols
      std::function<void(size_t)> per_sym = [&](size_t k) {
        if (k == bins.size()) {
          rec(v + 1);
          return;
        }
        const auto& sym = base.lang->symbols[bins[k]];
        for (uint8_t c = 0; c < 4; ++c) {
          if (sym.has(SymFlag::LinearOrder) && c != 1 && c != 2) continue;
          if ((sym.has(SymFlag::Symmetric) || sym.has(SymFlag::Equivalence)) && c != 0 && c != 3) continue;
          paircur[size_t(v) * bins.size() + k] = c;
          per_sym(k + 1);
        }
      };
      per_sym(0);
    };
    rec(0);
  }
  return out;
}

// ---- iso-class enumeration -------------------------------------------------------

std::vector<std::vector<FinStructure>> enumerate_members(const ClassSpec& spec, int max_size) {
  std::vector<std::vector<FinStructure>> by_size(size_t(max_size) + 1);
  if (max_size < 1) return by_size;
  FinStructure empty(spec.lang, 0);
  std::set<std::vector<uint8_t>> seen;
  for (auto& p : ext_patterns(empty, spec)) {
    FinStructure one = apply_pattern(empty, p);
    auto cc = canonical_code(one);
    if (seen.insert(cc).second) by_size[1].push_back(std::move(one));
  }
  for (int s = 2; s <= max_size; ++s) {
    seen.clear();
    for (auto& base : by_size[size_t(s) - 1])
      for (auto& p : ext_patterns(base, spec)) {
        FinStructure ext = apply_pattern(base, p);
        auto cc = canonical_code(ext);
        if (seen.insert(cc).second) by_size[size_t(s)].push_back(std::move(ext));
      }
  }
  return by_size;
}

namespace {

// canonical code under permutations fixing the first `fixed` vertices
std::vector<uint8_t> pointed_canon(const FinStructure& a, int fixed) {
  std::vector<int> perm(a.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<uint8_t> best;
  std::vector<int> tail(perm.begin() + fixed, perm.end());
  std::sort(tail.begin(), tail.end());
  do {
    std::copy(tail.begin(), tail.end(), perm.begin() + fixed);
    auto c = a.relabeled(perm).code();
    if (best.empty() || c < best) best = c;
  } while (std::next_permutation(tail.begin(), tail.end()));
  return best;
}

}  // namespace

std::vector<FinStructure> pointed_extensions(const ClassSpec& spec, const FinStructure& base, int extra) {
  std::vector<FinStructure> frontier{base}, out{base};
  std::set<std::vector<uint8_t>> seen{pointed_canon(base, base.n)};
  for (int k = 0; k < extra; ++k) {
    std::vector<FinStructure> next;
    for (auto& b : frontier)
      for (auto& p : ext_patterns(b, spec)) {
        FinStructure ext = apply_pattern(b, p);
        auto cc = pointed_canon(ext, base.n);
        if (seen.insert(cc).second) {
          out.push_back(ext);
          next.push_back(std::move(ext));
        }
      }
    frontier = std::move(next);
  }
  return out;
}

// ---- the condition evaluators ------------------------------------------------------

namespace {

// builds C = A + v + w from the restrictions of sigma/tau and the vw-pattern
struct CPattern {
  std::vector<uint8_t> vw;              // binary codes, v->w direction
  std::vector<std::vector<int>> atoms;  // ternary atoms {v,w,a} per ternary slot, listing a in A (or -1 none)
};

FinStructure build_C(const FinStructure& A, const ClassSpec& spec, const ExtPattern& sv,
                     const ExtPattern& sw, const CPattern& cp) {
  auto terns = ternary_indices(*A.lang);
  int na = A.n;
  ExtPattern pv = sv.restricted(A, na, int(terns.size()));
  FinStructure av = apply_pattern(A, pv);
  // w over A + v
  ExtPattern pw = sw.restricted(A, na, int(terns.size()));
  ExtPattern pw2;
  pw2.color = pw.color;
  auto bins = A.lang->binary_indices();
  pw2.pairs = pw.pairs;
  pw2.pairs.insert(pw2.pairs.end(), cp.vw.begin(), cp.vw.end());
  (void)bins;
  (void)spec;
  pw2.atoms = pw.atoms;
  pw2.atoms.resize(terns.size());
  for (size_t s = 0; s < terns.size(); ++s) {
    for (int a : cp.atoms[s])
      pw2.atoms[s].push_back({std::min(a, na), std::max(a, na)});  // atom {w, v, a}; v is vertex na
    std::sort(pw2.atoms[s].begin(), pw2.atoms[s].end());
  }
  return apply_pattern(av, pw2);
}

bool iso_over_prefix(const FinStructure& a, const FinStructure& b, int fixed) {
  if (a.n != b.n) return false;
  return pointed_canon(a, fixed) == pointed_canon(b, fixed);
}

}  // namespace

bool sfap_instance_has_solution(const ClassSpec& spec, const FinStructure& A, const FinStructure& B,
                                const FinStructure& C, const ExtPattern& sigma, const ExtPattern& tau) {
  // D = B + v' realizing sigma; E = D + w' realizing tau with the C pattern
  // over A u {v', w'} and no other relations over D
  auto terns = ternary_indices(*A.lang);
  FinStructure D = apply_pattern(B, sigma);
  if (!member(spec, D)) return true;  // vacuous instance
  int na = A.n, nb = B.n;
  ExtPattern we;
  we.color = tau.color;
  we.pairs = tau.pairs;
  // pair with v' = C's (v,w) pattern reversed appropriately: v is C vertex na, w is na+1
  auto binsyms = A.lang->binary_indices();
  for (size_t k = 0; k < binsyms.size(); ++k) {
    int code = C.paircode(binsyms[k], na + 1, na);  // (R(w,v), R(v,w))
    we.pairs.push_back(uint8_t(code));
  }
  we.atoms.assign(terns.size(), {});
  for (size_t s = 0; s < terns.size(); ++s) {
    we.atoms[s] = tau.atoms[s];
    // atoms from C involving w and v and/or A only: translate v -> index nb
    for (auto& t : C.hi[C.sym_slot(terns[s])]) {
      if (std::find(t.begin(), t.end(), na + 1) == t.end()) continue;  // must involve w
      std::vector<int> others;
      bool uses_v = false, ok = true;
      for (int q : t) {
        if (q == na + 1) continue;
        if (q == na) { uses_v = true; continue; }
        if (q >= na) { ok = false; break; }
        others.push_back(q);
      }
      if (!ok) continue;
      std::vector<int> atom;
      if (uses_v) {
        if (others.size() != 1) continue;
        atom = {others[0], nb};
      } else {
        if (others.size() != 2) continue;
        std::sort(others.begin(), others.end());
        atom = others;
      }
      auto& dst = we.atoms[s];
      if (std::find(dst.begin(), dst.end(), atom) == dst.end()) dst.push_back(atom);
    }
    std::sort(we.atoms[s].begin(), we.atoms[s].end());
    we.atoms[s].erase(std::unique(we.atoms[s].begin(), we.atoms[s].end()), we.atoms[s].end());
  }
  FinStructure E = apply_pattern(D, we);
  if (!member(spec, E)) return false;
  // confirm the C condition (construction should guarantee it)
  std::vector<int> verts(na);
  std::iota(verts.begin(), verts.end(), 0);
  verts.push_back(nb);
  verts.push_back(nb + 1);
  return iso_over_prefix(E.induced(verts), C, na);
}

bool sdap_instance_has_solution(const ClassSpec& spec, const FinStructure& A, const FinStructure& B,
                                const FinStructure& C, const ExtPattern& sigma, const ExtPattern& tau) {
  // E = D + w''; tau pins w'' over B; relations between w'' and v'' are free
  // apart from the C condition over A u {v'', w''}; ternary atoms touching
  // both new vertices and B\A are free too.
  auto terns = ternary_indices(*A.lang);
  FinStructure D = apply_pattern(B, sigma);
  if (!member(spec, D)) return true;
  int na = A.n, nb = B.n;

  // candidate (v'',w'') binary patterns: the C condition forces the pair up
  // to the A-fixing isomorphism, so try the two assignments of {v,w}
  auto binsyms = A.lang->binary_indices();
  std::vector<std::vector<uint8_t>> vw_options;
  {
    std::vector<uint8_t> direct, swapped;
    for (size_t k = 0; k < binsyms.size(); ++k) {
      direct.push_back(uint8_t(C.paircode(binsyms[k], na + 1, na)));
      swapped.push_back(uint8_t(C.paircode(binsyms[k], na, na + 1)));
    }
    vw_options.push_back(direct);
    if (swapped != direct) vw_options.push_back(swapped);
  }

  std::vector<std::vector<int>> free_pairs;  // {v'', b} pairs for free ternary atoms
  for (int b = na; b < nb; ++b) free_pairs.push_back({b, nb});

  for (auto& vw : vw_options) {
    ExtPattern we;
    we.color = tau.color;
    we.pairs = tau.pairs;
    we.pairs.insert(we.pairs.end(), vw.begin(), vw.end());
    we.atoms.assign(terns.size(), {});
    for (size_t s = 0; s < terns.size(); ++s) {
      we.atoms[s] = tau.atoms[s];
      for (auto& t : C.hi[C.sym_slot(terns[s])]) {
        if (std::find(t.begin(), t.end(), na + 1) == t.end()) continue;
        std::vector<int> others;
        bool uses_v = false, ok = true;
        for (int q : t) {
          if (q == na + 1) continue;
          if (q == na) { uses_v = true; continue; }
          if (q >= na) { ok = false; break; }
          others.push_back(q);
        }
        if (!ok) continue;
        std::vector<int> atom;
        if (uses_v) {
          if (others.size() != 1) continue;
          atom = {others[0], nb};
        } else {
          if (others.size() != 2) continue;
          std::sort(others.begin(), others.end());
          atom = others;
        }
        auto& dst = we.atoms[s];
        if (std::find(dst.begin(), dst.end(), atom) == dst.end()) dst.push_back(atom);
      }
      std::sort(we.atoms[s].begin(), we.atoms[s].end());
    }
    // free ternary atoms {w'', v'', b}: search over subsets
    size_t nfree = terns.empty() ? 0 : free_pairs.size() * terns.size();
    for (size_t mask = 0; mask < (size_t(1) << nfree); ++mask) {
      ExtPattern cand = we;
      size_t bit = 0;
      for (size_t s = 0; s < terns.size(); ++s)
        for (auto& fp : free_pairs) {
          if (mask & (size_t(1) << bit)) cand.atoms[s].push_back(fp);
          ++bit;
        }
      for (auto& at : cand.atoms) std::sort(at.begin(), at.end());
      FinStructure E = apply_pattern(D, cand);
      if (!member(spec, E)) continue;
      std::vector<int> verts(na);
      std::iota(verts.begin(), verts.end(), 0);
      verts.push_back(nb);
      verts.push_back(nb + 1);
      if (iso_over_prefix(E.induced(verts), C, na)) return true;
    }
  }
  return false;
}

// ---- the bounded checkers -----------------------------------------------------------

namespace {

struct Instance {
  FinStructure A, B, C;
  ExtPattern sigma, tau;
};

// all SFAP/SDAP instances for one (A,B): sigma,tau realizable over B with
// the right restrictions; C built from the restrictions plus a vw-pattern
template <typename F>
void for_instances(const ClassSpec& spec, const FinStructure& A, const FinStructure& B, F&& fn) {
  auto terns = ternary_indices(*A.lang);
  auto pats = ext_patterns(B, spec);
  auto bins = A.lang->binary_indices();
  int na = A.n;
  for (auto& sigma : pats)
    for (auto& tau : pats) {
      // C candidates: vw binary code per symbol + ternary atoms {v,w,a}
      std::vector<std::vector<uint8_t>> vw_codes{{}};
      for (int s : bins) {
        const auto& sym = A.lang->symbols[s];
        std::vector<std::vector<uint8_t>> next;
        for (auto& pfx : vw_codes)
          for (uint8_t c = 0; c < 4; ++c) {
            if (sym.has(SymFlag::LinearOrder) && c != 1 && c != 2) continue;
            if ((sym.has(SymFlag::Symmetric) || sym.has(SymFlag::Equivalence)) && c != 0 && c != 3)
              continue;
            auto e = pfx;
            e.push_back(c);
            next.push_back(std::move(e));
          }
        vw_codes = std::move(next);
      }
      std::vector<std::vector<std::vector<int>>> atom_sets{{}};
      if (!terns.empty()) {
        atom_sets.clear();
        size_t total = terns.size() * size_t(na);
        for (size_t mask = 0; mask < (size_t(1) << total); ++mask) {
          std::vector<std::vector<int>> atoms(terns.size());
          size_t bit = 0;
          for (size_t s = 0; s < terns.size(); ++s)
            for (int a = 0; a < na; ++a) {
              if (mask & (size_t(1) << bit)) atoms[s].push_back(a);
              ++bit;
            }
          atom_sets.push_back(std::move(atoms));
        }
      } else {
        atom_sets.assign(1, std::vector<std::vector<int>>(terns.size()));
      }
      for (auto& vw : vw_codes)
        for (auto& atoms : atom_sets) {
          CPattern cp;
          cp.vw = vw;
          cp.atoms.resize(terns.size());
          for (size_t s = 0; s < terns.size(); ++s) cp.atoms[s] = atoms[s];
          FinStructure C = build_C(A, spec, sigma, tau, cp);
          if (!member(spec, C)) continue;
          fn(Instance{A, B, C, sigma, tau});
        }
    }
}

AmalgVerdict fap_dap_impl(const ClassSpec& spec, int bound, bool free_variant, AmalgOptions opt);

}  // namespace

AmalgVerdict check_dap_fap(const ClassSpec& spec, int bound, bool free_variant, AmalgOptions opt) {
  return fap_dap_impl(spec, bound, free_variant, opt);
}

namespace {

AmalgVerdict fap_dap_impl(const ClassSpec& spec, int bound, bool free_variant, AmalgOptions opt) {
  AmalgVerdict v;
  v.property = free_variant ? AmalgProperty::FAP : AmalgProperty::DAP;
  v.bound = bound;
  auto members = enumerate_members(spec, bound);
  auto bins = spec.lang->binary_indices();
  auto terns = ternary_indices(*spec.lang);

  struct Task { FinStructure A, B, C; };
  std::vector<Task> tasks;
  for (int sa = 1; sa <= bound; ++sa)
    for (auto& A : members[size_t(sa)]) {
      auto Bs = pointed_extensions(spec, A, bound - sa);
      for (auto& B : Bs)
        for (auto& C : Bs) {
          if (B.n == A.n && C.n == A.n) continue;
          if (B.n + C.n - A.n > bound) continue;  // the amalgam stays within the bound
          tasks.push_back({A, B, C});
        }
    }

  std::vector<int> fail(tasks.size(), 0);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (long ti = 0; ti < long(tasks.size()); ++ti) {
    const auto& t = tasks[size_t(ti)];
    int na = t.A.n, nb = t.B.n, nc = t.C.n;
    int ne = nb + nc - na;
    // E on B followed by C \ A; search cross relations
    FinStructure base(spec.lang, ne);
    // copy B
    for (size_t s = 0; s < spec.lang->symbols.size(); ++s) {
      int ar = spec.lang->symbols[s].arity;
      if (ar == 1) {
        for (int i = 0; i < nb; ++i)
          if (t.B.holds1(int(s), i)) base.set1(int(s), i);
        for (int i = na; i < nc; ++i)
          if (t.C.holds1(int(s), i)) base.set1(int(s), nb + i - na);
      } else if (ar == 2) {
        for (int i = 0; i < nb; ++i)
          for (int j = 0; j < nb; ++j)
            if (t.B.holds2(int(s), i, j)) base.bin[base.sym_slot(int(s))][size_t(i) * ne + j] = 1;
        auto cm = [&](int q) { return q < na ? q : nb + q - na; };
        for (int i = 0; i < nc; ++i)
          for (int j = 0; j < nc; ++j)
            if (t.C.holds2(int(s), i, j) && (i >= na || j >= na))
              base.bin[base.sym_slot(int(s))][size_t(cm(i)) * ne + cm(j)] = 1;
      } else {
        auto cm = [&](int q) { return q < na ? q : nb + q - na; };
        for (auto& tup : t.B.hi[t.B.sym_slot(int(s))]) base.set(int(s), tup);
        for (auto& tup : t.C.hi[t.C.sym_slot(int(s))]) {
          bool fresh = false;
          std::vector<int> u;
          for (int q : tup) {
            if (q >= na) fresh = true;
            u.push_back(cm(q));
          }
          if (fresh) base.set(int(s), u);
        }
      }
    }
    // free variant: no cross relations at all
    if (free_variant) {
      fail[size_t(ti)] = member(spec, base) ? 0 : 1;
      continue;
    }
    // disjoint: search binary cross assignments between B\A and C\A
    // (ternary cross atoms stay empty; the ternary catalogue classes have
    // free amalgamation, where the empty assignment suffices)
    std::vector<std::pair<int, int>> cross;
    for (int i = na; i < nb; ++i)
      for (int j = nb; j < ne; ++j) cross.emplace_back(i, j);
    std::function<bool(size_t)> rec = [&](size_t q) -> bool {
      if (q == cross.size()) return member(spec, base);
      auto [i, j] = cross[q];
      std::function<bool(size_t)> per = [&](size_t k) -> bool {
        if (k == bins.size()) return rec(q + 1);
        int s = bins[k];
        const auto& sym = spec.lang->symbols[s];
        for (uint8_t c = 0; c < 4; ++c) {
          if (sym.has(SymFlag::LinearOrder) && c != 1 && c != 2) continue;
          if ((sym.has(SymFlag::Symmetric) || sym.has(SymFlag::Equivalence)) && c != 0 && c != 3)
            continue;
          base.bin[base.sym_slot(s)][size_t(i) * ne + j] = (c & 2) ? 1 : 0;
          base.bin[base.sym_slot(s)][size_t(j) * ne + i] = (c & 1) ? 1 : 0;
          if (per(k + 1)) return true;
        }
        return false;
      };
      return per(0);
    };
    fail[size_t(ti)] = rec(0) ? 0 : 1;
  }
  for (size_t ti = 0; ti < tasks.size(); ++ti)
    if (fail[ti]) {
      v.holds_up_to_bound = false;
      AmalgWitness w;
      w.A = tasks[ti].A;
      w.B = tasks[ti].B;
      w.C = tasks[ti].C;
      w.note = free_variant ? "no free amalgam exists" : "no disjoint amalgam exists";
      v.witness = std::move(w);
      return v;
    }
  v.holds_up_to_bound = true;
  return v;
}

}  // namespace

AmalgVerdict check_sfap(const ClassSpec& spec, int bound, AmalgOptions opt) {
  if (bound < 3) throw Error("check_sfap: bound >= 3 required");
  AmalgVerdict v;
  v.property = AmalgProperty::SFAP;
  v.bound = bound;
  // SFAP presupposes free amalgamation
  auto fap = check_dap_fap(spec, std::min(bound, 5), true, opt);
  if (!fap.holds_up_to_bound) {
    v.holds_up_to_bound = false;
    v.witness = fap.witness;
    v.witness->note = "free amalgamation fails: " + v.witness->note;
    return v;
  }
  auto members = enumerate_members(spec, std::max(1, bound - 2));
  struct Pair { FinStructure A, B; };
  std::vector<Pair> pairs;
  for (int sa = 1; sa <= bound - 2; ++sa)
    for (auto& A : members[size_t(sa)])
      for (auto& B : pointed_extensions(spec, A, bound - 2 - sa)) pairs.push_back({A, B});

  std::vector<std::optional<AmalgWitness>> found(pairs.size());
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (long pi = 0; pi < long(pairs.size()); ++pi) {
    std::optional<AmalgWitness> local;
    for_instances(spec, pairs[size_t(pi)].A, pairs[size_t(pi)].B, [&](const Instance& inst) {
      if (local) return;
      if (!sfap_instance_has_solution(spec, inst.A, inst.B, inst.C, inst.sigma, inst.tau)) {
        AmalgWitness w;
        w.A = inst.A;
        w.B = inst.B;
        w.C = inst.C;
        w.D = apply_pattern(inst.B, inst.sigma);
        w.sigma = inst.sigma;
        w.tau = inst.tau;
        w.note = "no one-vertex extension E realizes tau freely with the C pattern";
        local = std::move(w);
      }
    });
    found[size_t(pi)] = std::move(local);
  }
  for (auto& f : found)
    if (f) {
      v.holds_up_to_bound = false;
      v.witness = std::move(f);
      return v;
    }
  v.holds_up_to_bound = true;
  return v;
}

AmalgVerdict check_sdap(const ClassSpec& spec, int bound, AmalgOptions opt) {
  if (bound < 4) throw Error("check_sdap: bound >= 4 required");
  AmalgVerdict v;
  v.property = AmalgProperty::SDAP;
  v.bound = bound;
  auto dap = check_dap_fap(spec, std::min(bound, 5), false, opt);
  if (!dap.holds_up_to_bound) {
    v.holds_up_to_bound = false;
    v.witness = dap.witness;
    v.witness->note = "disjoint amalgamation fails: " + v.witness->note;
    return v;
  }
  auto members = enumerate_members(spec, std::max(1, bound - 2));
  auto terns = ternary_indices(*spec.lang);

  // outer pairs (A, C): C = A + v + w
  struct AC { FinStructure A, C; };
  std::vector<AC> acs;
  for (int sa = 1; sa <= bound - 2; ++sa)
    for (auto& A : members[size_t(sa)])
      for (auto& C : pointed_extensions(spec, A, 2))
        if (C.n == A.n + 2) acs.push_back({A, C});

  std::vector<std::optional<AmalgWitness>> found(acs.size());
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (long ai = 0; ai < long(acs.size()); ++ai) {
    const auto& ac = acs[size_t(ai)];
    // candidate (A', C'): A' extends A; C' = disjoint amalgam of A' and C over A
    // candidates are tried in canonical order, (A, C) itself first
    bool some_candidate_works = false;
    AmalgWitness first_fail;
    bool have_first = false;
    for (int extra = 0; extra <= bound - ac.A.n - 2 && !some_candidate_works; ++extra) {
      for (auto& Ap : pointed_extensions(spec, ac.A, extra)) {
        if (Ap.n != ac.A.n + extra) continue;
        // C' candidates: A' u (C \ A) with free completions across
        // (the C' relations beyond A' + C do not enter the inner condition,
        // which quantifies over types of v', w' over A'; enumerate those)
        int na = ac.A.n, nap = Ap.n;
        // v', w' types over A': must restrict to type(v/A), type(w/A)
        auto pats = ext_patterns(Ap, spec);
        auto tv = [&](const ExtPattern& p) { return p.restricted(ac.A, na, int(terns.size())); };
        ExtPattern v_over_A, w_over_A;
        {
          // read off C: v = vertex na, w = vertex na+1
          auto bins = spec.lang->binary_indices();
          v_over_A.color = ac.C.unary_color(na);
          w_over_A.color = ac.C.unary_color(na + 1);
          for (int q = 0; q < na; ++q)
            for (int s : bins) {
              v_over_A.pairs.push_back(uint8_t(ac.C.paircode(s, na, q)));
              w_over_A.pairs.push_back(uint8_t(ac.C.paircode(s, na + 1, q)));
            }
          v_over_A.atoms.assign(terns.size(), {});
          w_over_A.atoms.assign(terns.size(), {});
          for (size_t s = 0; s < terns.size(); ++s)
            for (auto& t : ac.C.hi[ac.C.sym_slot(terns[s])]) {
              bool hv = std::find(t.begin(), t.end(), na) != t.end();
              bool hw = std::find(t.begin(), t.end(), na + 1) != t.end();
              if (hv && !hw) {
                std::vector<int> o;
                for (int q : t)
                  if (q != na) o.push_back(q);
                if (o.size() == 2 && o[0] < na && o[1] < na) {
                  std::sort(o.begin(), o.end());
                  v_over_A.atoms[s].push_back(o);
                }
              }
              if (hw && !hv) {
                std::vector<int> o;
                for (int q : t)
                  if (q != na + 1) o.push_back(q);
                if (o.size() == 2 && o[0] < na && o[1] < na) {
                  std::sort(o.begin(), o.end());
                  w_over_A.atoms[s].push_back(o);
                }
              }
            }
          for (auto& a : v_over_A.atoms) std::sort(a.begin(), a.end());
          for (auto& a : w_over_A.atoms) std::sort(a.begin(), a.end());
        }
        for (auto& pv : pats) {
          if (!(tv(pv) == v_over_A)) continue;
          for (auto& pw : pats) {
            if (!(tv(pw) == w_over_A)) continue;
            // C' built over A' with these types and the C vw-pattern;
            // require membership (it is a disjoint amalgam candidate)
            CPattern cp;
            auto bins = spec.lang->binary_indices();
            for (int s : bins) cp.vw.push_back(uint8_t(ac.C.paircode(s, na + 1, na)));
            cp.atoms.assign(terns.size(), {});
            for (size_t s = 0; s < terns.size(); ++s)
              for (auto& t : ac.C.hi[ac.C.sym_slot(terns[s])]) {
                bool hv = std::find(t.begin(), t.end(), na) != t.end();
                bool hw = std::find(t.begin(), t.end(), na + 1) != t.end();
                if (hv && hw)
                  for (int q : t)
                    if (q < na) cp.atoms[s].push_back(q);
              }
            FinStructure Cp = build_C(Ap, spec, pv, pw, cp);
            if (!member(spec, Cp)) continue;
            // inner sweep over (B >= A', sigma, tau)
            bool candidate_ok = true;
            std::optional<AmalgWitness> inner_fail;
            for (int extb = 0; extb <= bound - 2 - Ap.n && candidate_ok; ++extb)
              for (auto& B : pointed_extensions(spec, Ap, extb)) {
                if (B.n != Ap.n + extb) continue;
                auto bpats = ext_patterns(B, spec);
                auto rv = [&](const ExtPattern& p) { return p.restricted(Ap, nap, int(terns.size())); };
                ExtPattern vtype = pv, wtype = pw;
                for (auto& sg : bpats) {
                  if (!(rv(sg) == vtype)) continue;
                  for (auto& ta : bpats) {
                    if (!(rv(ta) == wtype)) continue;
                    if (!sdap_instance_has_solution(spec, ac.A, B, ac.C, sg, ta)) {
                      candidate_ok = false;
                      if (!inner_fail) {
                        AmalgWitness w;
                        w.A = ac.A;
                        w.B = B;
                        w.C = ac.C;
                        w.D = apply_pattern(B, sg);
                        w.sigma = sg;
                        w.tau = ta;
                        w.Aprime = Ap;
                        w.Cprime = Cp;
                        w.note = "candidate (A',C') admits no E for this (B,sigma,tau,D)";
                        inner_fail = std::move(w);
                      }
                    }
                    if (!candidate_ok) break;
                  }
                  if (!candidate_ok) break;
                }
                if (!candidate_ok) break;
              }
            if (candidate_ok) { some_candidate_works = true; break; }
            if (!have_first && inner_fail) {
              first_fail = *inner_fail;
              have_first = true;
            }
          }
          if (some_candidate_works) break;
        }
        if (some_candidate_works) break;
      }
    }
    if (!some_candidate_works) {
      if (!have_first) {
        first_fail.A = ac.A;
        first_fail.C = ac.C;
        first_fail.note = "no disjoint amalgamation candidate (A',C') exists within the bound";
      }
      found[size_t(ai)] = first_fail;
    }
  }
  for (auto& f : found)
    if (f) {
      v.holds_up_to_bound = false;
      v.witness = std::move(f);
      return v;
    }
  v.holds_up_to_bound = true;
  return v;
}

// ---- JSON -----------------------------------------------------------------------------

std::string AmalgVerdict::to_json(const ClassSpec& spec) const {
  nlohmann::ordered_json j;
  const char* names[] = {"DAP", "FAP", "SFAP", "SDAP"};
  j["property"] = names[int(property)];
  j["result"] = holds_up_to_bound ? "holds-up-to-bound" : "fails";
  j["bound"] = bound;
  j["spec"] = spec.name;
  j["spec_hash"] = to_hex_u64(spec.hash());
  if (witness) {
    nlohmann::ordered_json w;
    w["A"] = nlohmann::ordered_json::parse(structure_to_json(witness->A));
    w["B"] = nlohmann::ordered_json::parse(structure_to_json(witness->B));
    w["C"] = nlohmann::ordered_json::parse(structure_to_json(witness->C));
    if (witness->D.n) w["D"] = nlohmann::ordered_json::parse(structure_to_json(witness->D));
    if (witness->Aprime) w["Aprime"] = nlohmann::ordered_json::parse(structure_to_json(*witness->Aprime));
    if (witness->Cprime) w["Cprime"] = nlohmann::ordered_json::parse(structure_to_json(*witness->Cprime));
    w["sigma_pairs"] = witness->sigma.pairs;
    w["tau_pairs"] = witness->tau.pairs;
    w["note"] = witness->note;
    j["witness"] = w;
  }
  return j.dump(2);
}

}  // namespace brd
