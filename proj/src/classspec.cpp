#include "brd/classspec.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

namespace brd {

namespace {

LanguagePtr sublanguage(const RelLanguage& lang, int arity, std::vector<int>& idxs) {
  RelLanguage sub;
  idxs.clear();
  for (size_t i = 0; i < lang.symbols.size(); ++i) {
    if (lang.symbols[i].arity == arity) {
      idxs.push_back(int(i));
      sub.symbols.push_back(lang.symbols[i]);
    }
  }
  // remap convex references (both ends arity 2, so they stay together)
  for (auto& s : sub.symbols)
    if (s.has(SymFlag::Convex)) {
      int old = s.convex_ref;
      s.convex_ref = -1;
      for (size_t k = 0; k < idxs.size(); ++k)
        if (idxs[k] == old) s.convex_ref = int(k);
      if (s.convex_ref < 0) s.flags &= ~unsigned(SymFlag::Convex);
    }
  return intern_language(std::move(sub));
}

FinStructure reduct(const FinStructure& a, const std::vector<int>& syms, LanguagePtr sublang) {
  FinStructure r(sublang, a.n);
  for (size_t k = 0; k < syms.size(); ++k) {
    int s = syms[k];
    int ar = a.lang->symbols[s].arity;
    if (ar == 1) r.un[r.sym_slot(int(k))] = a.un[a.sym_slot(s)];
    else if (ar == 2) r.bin[r.sym_slot(int(k))] = a.bin[a.sym_slot(s)];
    else r.hi[r.sym_slot(int(k))] = a.hi[a.sym_slot(s)];
  }
  return r;
}

std::vector<uint8_t> small_canon(const FinStructure& a) { return canonical_code(a); }

}  // namespace

uint64_t ClassSpec::hash() const { return fnv1a64(print()); }

// ---- constructors ------------------------------------------------------------

ClassSpecPtr make_unrestricted(LanguagePtr lang, std::map<int, std::vector<FinStructure>> reps,
                               std::string name) {
  auto spec = std::make_shared<ClassSpec>();
  spec->kind = ClassSpec::Kind::Unrestricted;
  spec->lang = lang;
  spec->name = std::move(name);
  for (auto& [arity, list] : reps) {
    if (arity < 1 || arity > lang->max_arity()) throw Error("unrestricted: bad constraint arity");
    std::vector<int> idxs;
    auto sub = sublanguage(*lang, arity, idxs);
    std::vector<FinStructure> stored;
    for (auto& r : list) {
      if (r.n != arity) throw Error("unrestricted: constraint structure size must equal its arity");
      FinStructure red = (*r.lang == *sub) ? r : reduct(r, idxs, sub);
      spec->allowed[arity].insert(small_canon(red));
      stored.push_back(std::move(red));
    }
    if (stored.empty()) throw Error("unrestricted: empty constraint set");
    spec->constraints[arity] = std::move(stored);
  }
  return spec;
}

ClassSpecPtr make_forb(ClassSpecPtr base, std::vector<FinStructure> forbidden, std::string name) {
  if (forbidden.empty()) throw Error("forb: forbidden list must be nonempty");
  for (auto& f : forbidden) {
    if (!(*f.lang == *base->lang)) throw LanguageMismatch("forb: forbidden structure language mismatch");
    if (!r_irreducible(f, 2)) throw Error("forb: forbidden structure is not irreducible");
  }
  auto spec = std::make_shared<ClassSpec>();
  spec->kind = ClassSpec::Kind::Forb;
  spec->lang = base->lang;
  spec->base = std::move(base);
  spec->forbidden = std::move(forbidden);
  spec->name = std::move(name);
  return spec;
}

ClassSpecPtr make_builtin(BuiltinKind kind, int m, int n, int p, std::string name) {
  RelLanguage lang;
  auto order_sym = [&](const std::string& nm) {
    RelSymbol s;
    s.name = nm;
    s.arity = 2;
    s.flags = SymFlag::LinearOrder | SymFlag::Irreflexive;
    lang.symbols.push_back(s);
  };
  auto eq_sym = [&](const std::string& nm, int ref) {
    RelSymbol s;
    s.name = nm;
    s.arity = 2;
    s.flags = SymFlag::Equivalence | SymFlag::Symmetric | SymFlag::Convex;
    s.convex_ref = ref;
    lang.symbols.push_back(s);
  };
  auto unary_sym = [&](const std::string& nm) {
    RelSymbol s;
    s.name = nm;
    s.arity = 1;
    lang.symbols.push_back(s);
  };
  switch (kind) {
    case BuiltinKind::LO_n:
      if (m < 1) throw Error("builtin LO: need m >= 1");
      if (m == 1) order_sym("<");
      else
        for (int i = 0; i < m; ++i) order_sym("<" + std::to_string(i));
      break;
    case BuiltinKind::P_n:
      if (n < 1) throw Error("builtin P: need n >= 1");
      order_sym("<");
      for (int i = 1; i <= n; ++i) unary_sym("P" + std::to_string(i));
      break;
    case BuiltinKind::COE_np:
      if (n < 1) throw Error("builtin COE: need n >= 1");
      order_sym("<");
      for (int i = 0; i < n; ++i) eq_sym("E" + std::to_string(i), 0);
      for (int i = 1; i <= p; ++i) unary_sym("P" + std::to_string(i));
      break;
    case BuiltinKind::LOE_mnp:
      if (m < 1) throw Error("builtin LOE: need m >= 1");
      if (m == 1) order_sym("<");
      else
        for (int i = 0; i < m; ++i) order_sym("<" + std::to_string(i));
      for (int i = 0; i < n; ++i) eq_sym("E" + std::to_string(i), 0);
      for (int i = 1; i <= p; ++i) unary_sym("P" + std::to_string(i));
      break;
  }
  auto spec = std::make_shared<ClassSpec>();
  spec->kind = ClassSpec::Kind::Builtin;
  spec->lang = intern_language(std::move(lang));
  spec->bkind = kind;
  spec->bm = m;
  spec->bn = n;
  spec->bp = p;
  spec->name = std::move(name);
  return spec;
}

ClassSpecPtr make_superpose(std::vector<ClassSpecPtr> parts, std::string name) {
  if (parts.size() < 2) throw Error("superpose: need at least two parts");
  RelLanguage lang;
  for (auto& p : parts) {
    size_t off = lang.symbols.size();
    for (auto& s : p->lang->symbols) {
      RelSymbol t = s;
      if (t.has(SymFlag::Convex)) t.convex_ref = int(off) + s.convex_ref;
      if (lang.index_of(t.name) >= 0) throw Error("superpose: symbol name clash: " + t.name);
      lang.symbols.push_back(t);
    }
  }
  auto spec = std::make_shared<ClassSpec>();
  spec->kind = ClassSpec::Kind::Superpose;
  spec->lang = intern_language(std::move(lang));
  spec->parts = std::move(parts);
  spec->name = std::move(name);
  return spec;
}

ClassSpecPtr make_ordered_expansion(ClassSpecPtr base, std::string name) {
  RelLanguage lang = *base->lang;
  if (lang.index_of("<ord") >= 0) throw Error("ordered: symbol <ord already present");
  RelSymbol s;
  s.name = "<ord";
  s.arity = 2;
  s.flags = SymFlag::LinearOrder | SymFlag::Irreflexive;
  lang.symbols.push_back(s);
  auto spec = std::make_shared<ClassSpec>();
  spec->kind = ClassSpec::Kind::OrderedExpansion;
  spec->lang = intern_language(std::move(lang));
  spec->base = std::move(base);
  spec->name = std::move(name);
  return spec;
}

// ---- membership ----------------------------------------------------------------

namespace {

// touch < 0: full check; touch >= 0: only constraints involving that vertex
bool flags_ok_touch(const FinStructure& a, int touch) {
  if (touch < 0) return a.flags_ok();
  const int x = touch, n = a.n;
  for (size_t s = 0; s < a.lang->symbols.size(); ++s) {
    const auto& sym = a.lang->symbols[s];
    if (sym.arity == 2) {
      bool lo = sym.has(SymFlag::LinearOrder), eq = sym.has(SymFlag::Equivalence);
      if (sym.has(SymFlag::Irreflexive) && a.holds2(int(s), x, x)) return false;
      if (sym.has(SymFlag::Symmetric))
        for (int j = 0; j < n; ++j)
          if (a.holds2(int(s), x, j) != a.holds2(int(s), j, x)) return false;
      if (lo) {
        if (a.holds2(int(s), x, x)) return false;
        for (int j = 0; j < n; ++j)
          if (j != x && a.holds2(int(s), x, j) == a.holds2(int(s), j, x)) return false;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            if (a.holds2(int(s), x, j) && a.holds2(int(s), j, k) && !a.holds2(int(s), x, k)) return false;
            if (a.holds2(int(s), j, x) && a.holds2(int(s), x, k) && !a.holds2(int(s), j, k)) return false;
          }
      }
      if (eq) {
        if (!a.holds2(int(s), x, x)) return false;
        for (int j = 0; j < n; ++j) {
          if (a.holds2(int(s), x, j) != a.holds2(int(s), j, x)) return false;
          if (!a.holds2(int(s), x, j)) continue;
          for (int k = 0; k < n; ++k)
            if (a.holds2(int(s), j, k) && !a.holds2(int(s), x, k)) return false;
        }
      }
      if (sym.has(SymFlag::Convex)) {
        int o = sym.convex_ref;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            // x interior, endpoint or witness of a broken interval
            if (a.holds2(int(s), j, k) && a.holds2(o, j, x) && a.holds2(o, x, k) && !a.holds2(int(s), j, x))
              return false;
            if (a.holds2(int(s), x, k) && a.holds2(o, x, j) && a.holds2(o, j, k) && !a.holds2(int(s), x, j))
              return false;
            if (a.holds2(int(s), j, x) && a.holds2(o, j, k) && a.holds2(o, k, x) && !a.holds2(int(s), j, k))
              return false;
          }
      }
    } else if (sym.arity >= 3 && sym.has(SymFlag::Irreflexive)) {
      for (const auto& t : a.hi[a.sym_slot(int(s))]) {
        if (std::find(t.begin(), t.end(), x) == t.end()) continue;
        std::set<int> d(t.begin(), t.end());
        if (d.size() != t.size()) return false;
      }
    }
  }
  return true;
}

bool kind_ok(const ClassSpec& spec, const FinStructure& a, int touch);

bool unrestricted_ok(const ClassSpec& spec, const FinStructure& a, int touch) {
  for (auto& [arity, codes] : spec.allowed) {
    std::vector<int> idxs;
    auto sub = sublanguage(*a.lang, arity, idxs);
    // iterate arity-subsets (containing touch when incremental)
    std::vector<int> sel(arity);
    std::function<bool(int, int)> rec = [&](int pos, int from) -> bool {
      if (pos == arity) {
        if (touch >= 0 && std::find(sel.begin(), sel.end(), touch) == sel.end()) return true;
        FinStructure sred = reduct(a.induced(sel), idxs, sub);
        return codes.count(small_canon(sred)) > 0;
      }
      for (int v = from; v < a.n; ++v) {
        sel[pos] = v;
        if (!rec(pos + 1, v + 1)) return false;
      }
      return true;
    };
    if (!rec(0, 0)) return false;
  }
  return true;
}

bool forb_ok(const ClassSpec& spec, const FinStructure& a, int touch) {
  if (!kind_ok(*spec.base, a, touch)) return false;
  for (auto& f : spec.forbidden) {
    if (f.n > a.n) continue;
    for (auto& e : embeddings(f, a)) {
      if (touch >= 0 && std::find(e.begin(), e.end(), touch) == e.end()) continue;
      return false;
    }
  }
  return true;
}

bool builtin_ok(const ClassSpec& spec, const FinStructure& a, int touch) {
  // flags already verified; remaining: partition by unaries, coarsening chain
  auto us = a.lang->unary_indices();
  if (!us.empty()) {
    for (int v = 0; v < a.n; ++v) {
      if (touch >= 0 && v != touch) continue;
      int c = 0;
      for (int u : us) c += a.holds1(u, v);
      if (c != 1) return false;
    }
  }
  // nested equivalence chain: E_{i+1} coarsens E_i (declared order fine->coarse)
  std::vector<int> eqs;
  for (size_t s = 0; s < a.lang->symbols.size(); ++s)
    if (a.lang->symbols[s].has(SymFlag::Equivalence)) eqs.push_back(int(s));
  for (size_t k = 0; k + 1 < eqs.size(); ++k)
    for (int i = 0; i < a.n; ++i) {
      if (touch >= 0 && i != touch) continue;
      for (int j = 0; j < a.n; ++j)
        if (a.holds2(eqs[k], i, j) && !a.holds2(eqs[k + 1], i, j)) return false;
    }
  return true;
}

bool kind_ok(const ClassSpec& spec, const FinStructure& a, int touch) {
  switch (spec.kind) {
    case ClassSpec::Kind::Unrestricted:
      return unrestricted_ok(spec, a, touch);
    case ClassSpec::Kind::Forb:
      return forb_ok(spec, a, touch);
    case ClassSpec::Kind::Builtin:
      return builtin_ok(spec, a, touch);
    case ClassSpec::Kind::Superpose: {
      size_t off = 0;
      for (auto& p : spec.parts) {
        std::vector<int> idxs(p->lang->symbols.size());
        std::iota(idxs.begin(), idxs.end(), int(off));
        FinStructure r = reduct(a, idxs, p->lang);
        if (!kind_ok(*p, r, touch)) return false;
        off += p->lang->symbols.size();
      }
      return true;
    }
    case ClassSpec::Kind::OrderedExpansion: {
      std::vector<int> idxs(spec.base->lang->symbols.size());
      std::iota(idxs.begin(), idxs.end(), 0);
      FinStructure r = reduct(a, idxs, spec.base->lang);
      return kind_ok(*spec.base, r, touch);
    }
  }
  return false;
}

}  // namespace

bool member(const ClassSpec& spec, const FinStructure& a) {
  if (!(a.lang == spec.lang || *a.lang == *spec.lang))
    throw LanguageMismatch("member: language mismatch");
  if (!flags_ok_touch(a, -1)) return false;
  return kind_ok(spec, a, -1);
}

bool member_extend(const ClassSpec& spec, const FinStructure& a) {
  if (!flags_ok_touch(a, a.n - 1)) return false;
  return kind_ok(spec, a, a.n - 1);
}

bool r_irreducible(const FinStructure& f, int r) {
  if (r < 2) throw Error("r_irreducible: r >= 2 required");
  if (f.n < r) return true;  // vacuous
  std::vector<int> sel(r);
  std::function<bool(int, int)> rec = [&](int pos, int from) -> bool {
    if (pos == r) {
      // some held tuple covering all selected elements
      for (size_t s = 0; s < f.lang->symbols.size(); ++s) {
        int ar = f.lang->symbols[s].arity;
        if (ar < r) continue;
        if (ar == 2) {
          if (f.holds2(int(s), sel[0], sel[1]) || f.holds2(int(s), sel[1], sel[0])) return true;
        } else {
          for (const auto& t : f.hi[f.sym_slot(int(s))]) {
            bool all = true;
            for (int v : sel)
              if (std::find(t.begin(), t.end(), v) == t.end()) { all = false; break; }
            if (all) return true;
          }
        }
      }
      return false;
    }
    for (int v = from; v < f.n; ++v) {
      sel[pos] = v;
      if (!rec(pos + 1, v + 1)) return false;
    }
    return true;
  };
  return rec(0, 0);
}

// ---- 1-types --------------------------------------------------------------------

QfOneType QfOneType::restricted(int k) const {
  QfOneType r;
  r.m = k;
  r.color = color;
  size_t per = m ? pairs.size() / m : 0;
  r.pairs.assign(pairs.begin(), pairs.begin() + long(per) * k);
  return r;
}

bool QfOneType::operator<(const QfOneType& o) const {
  if (color != o.color) return color < o.color;
  return pairs < o.pairs;
}

int labeled_rank_count(const RelLanguage& lang) {
  int c = 0;
  for (auto& s : lang.symbols) c += s.has(SymFlag::Convex) && s.has(SymFlag::Equivalence);
  return c;
}

std::vector<int> coord_rank(const RelLanguage& lang, const uint8_t* pairs_at_v) {
  std::vector<int> rank;
  auto bins = lang.binary_indices();
  // position of each binary symbol within the pair vector
  std::map<int, int> pos;
  for (size_t k = 0; k < bins.size(); ++k) pos[bins[k]] = int(k);
  for (int s : bins) {
    const auto& sym = lang.symbols[s];
    if (sym.has(SymFlag::Convex) && sym.has(SymFlag::Equivalence)) continue;  // folded at its order
    if (sym.has(SymFlag::LinearOrder)) {
      int code = pairs_at_v[pos[s]];
      int above = (code & 2) ? 0 : 1;  // bit2 = R(x,v): x below v
      rank.push_back(above);
      // fold attached convex equivalences: closeness = number that hold
      int n_eq = 0, held = 0;
      for (int e : bins)
        if (lang.symbols[e].has(SymFlag::Convex) && lang.symbols[e].convex_ref == s) {
          ++n_eq;
          held += pairs_at_v[pos[e]] == 3;
        }
      if (n_eq) rank.push_back(above == 0 ? held : n_eq - held);
    } else {
      rank.push_back(pairs_at_v[pos[s]]);
    }
  }
  return rank;
}

int compare_types(const RelLanguage& lang, const QfOneType& a, const QfOneType& b) {
  if (a.color != b.color) return a.color < b.color ? -1 : 1;
  int m = std::min(a.m, b.m);
  int nb = lang.binary_count();
  for (int v = 0; v < m; ++v) {
    auto ra = coord_rank(lang, a.pairs.data() + size_t(v) * nb);
    auto rb = coord_rank(lang, b.pairs.data() + size_t(v) * nb);
    if (ra != rb) return ra < rb ? -1 : 1;
  }
  if (a.m != b.m) return a.m < b.m ? -1 : 1;
  return 0;
}

int psi_of_pairvec(const RelLanguage& lang, const std::vector<uint8_t>& pv) {
  auto bins = lang.binary_indices();
  int n_eq = 0, held = 0;
  for (size_t k = 0; k < bins.size(); ++k) {
    const auto& sym = lang.symbols[bins[k]];
    if (sym.has(SymFlag::Convex) && sym.has(SymFlag::Equivalence)) {
      ++n_eq;
      held += pv[k] == 3;
    }
  }
  return n_eq - held;
}

FinStructure realize_type(const FinStructure& a, const QfOneType& t) {
  FinStructure ext = a.extended();
  int x = a.n;
  auto bins = a.lang->binary_indices();
  for (int v = 0; v < a.n; ++v)
    for (size_t k = 0; k < bins.size(); ++k) {
      uint8_t code = t.pairs[size_t(v) * bins.size() + k];
      int slot = ext.sym_slot(bins[k]);
      ext.bin[slot][size_t(x) * ext.n + v] = (code & 2) ? 1 : 0;
      ext.bin[slot][size_t(v) * ext.n + x] = (code & 1) ? 1 : 0;
    }
  auto us = a.lang->unary_indices();
  if (t.color >= 0)
    for (size_t k = 0; k < us.size(); ++k)
      if (t.color & (1 << k)) ext.set1(us[k], x);
  // equivalence symbols are reflexive on the new vertex
  for (int s : bins)
    if (a.lang->symbols[s].has(SymFlag::Equivalence)) ext.bin[ext.sym_slot(s)][size_t(x) * ext.n + x] = 1;
  return ext;
}

std::vector<int> color_table(const ClassSpec& spec) {
  auto us = spec.lang->unary_indices();
  std::vector<int> out;
  if (us.empty()) return out;
  for (int c = 0; c < (1 << us.size()); ++c) {
    FinStructure one(spec.lang, 1);
    for (size_t k = 0; k < us.size(); ++k)
      if (c & (1 << k)) one.set1(us[k], 0);
    for (int s : spec.lang->binary_indices())
      if (spec.lang->symbols[s].has(SymFlag::Equivalence)) one.set2(s, 0, 0);
    try {
      if (member(spec, one)) out.push_back(c);
    } catch (const Error&) {
    }
  }
  return out;
}

bool spec_uses_unary_colored_tree(const ClassSpec& spec) {
  if (spec.lang->unary_count() == 0) return false;
  for (auto& s : spec.lang->symbols)
    if (s.has(SymFlag::LinearOrder) || s.has(SymFlag::Equivalence)) return true;
  return false;
}

namespace {

// DFS over coordinate assignments, coordinates in positional rank order,
// pruning with member_extend on the partial extension.
struct TypeSearch {
  const FinStructure& a;
  const ClassSpec& spec;
  bool include_unary;
  size_t cap;
  Rng* rng;  // shuffles branch order when sampling
  std::vector<QfOneType> out;
  FinStructure ext;
  std::vector<int> bins;
  const QfOneType* fixed_prefix = nullptr;

  TypeSearch(const FinStructure& a_, const ClassSpec& spec_, bool iu, size_t cap_, Rng* rng_)
      : a(a_), spec(spec_), include_unary(iu), cap(cap_), rng(rng_), ext(a_.extended()),
        bins(a_.lang->binary_indices()) {}

  // all pair-code vectors at one base vertex, sorted by coordinate rank
  std::vector<std::vector<uint8_t>> coordinate_candidates() {
    std::vector<std::vector<uint8_t>> cands;
    std::vector<uint8_t> cur(bins.size(), 0);
    std::function<void(size_t)> rec = [&](size_t k) {
      if (k == bins.size()) {
        cands.push_back(cur);
        return;
      }
      const auto& sym = a.lang->symbols[bins[k]];
      for (uint8_t c = 0; c < 4; ++c) {
        if (sym.has(SymFlag::LinearOrder) && c != 1 && c != 2) continue;
        if ((sym.has(SymFlag::Symmetric) || sym.has(SymFlag::Equivalence)) && c != 0 && c != 3) continue;
        cur[k] = c;
        rec(k + 1);
      }
    };
    rec(0);
    std::stable_sort(cands.begin(), cands.end(), [&](const auto& x, const auto& y) {
      return coord_rank(*a.lang, x.data()) < coord_rank(*a.lang, y.data());
    });
    return cands;
  }

  void apply_coord(int v, const std::vector<uint8_t>& code) {
    int x = a.n;
    for (size_t k = 0; k < bins.size(); ++k) {
      int slot = ext.sym_slot(bins[k]);
      ext.bin[slot][size_t(x) * ext.n + v] = (code[k] & 2) ? 1 : 0;
      ext.bin[slot][size_t(v) * ext.n + x] = (code[k] & 1) ? 1 : 0;
    }
  }

  bool coord_ok(int v) {
    // constraints among {x, 0..v}: run the touch-x check on the induced prefix
    int x = a.n;
    std::vector<int> verts(v + 2);
    std::iota(verts.begin(), verts.end() - 1, 0);
    verts.back() = x;
    FinStructure part = ext.induced(verts);
    return member_extend(spec, part);
  }

  void run(const QfOneType* prefix) {
    fixed_prefix = prefix;
    int x = a.n;
    for (int s : bins)
      if (a.lang->symbols[s].has(SymFlag::Equivalence)) ext.bin[ext.sym_slot(s)][size_t(x) * ext.n + x] = 1;

    std::vector<int> colors;
    auto us = a.lang->unary_indices();
    if (us.empty()) colors.push_back(-1);
    else if (!include_unary) colors.push_back(-2);
    else {
      if (prefix && prefix->color != -2) colors.push_back(prefix->color);
      else
        colors = color_table(spec);
    }
    auto cands = coordinate_candidates();
    for (int color : colors) {
      for (size_t k = 0; k < us.size(); ++k) ext.set1(us[k], x, color >= 0 && (color & (1 << k)));
      dfs(0, color, cands);
      if (out.size() >= cap) break;
    }
  }

  void dfs(int v, int color, const std::vector<std::vector<uint8_t>>& cands) {
    if (out.size() >= cap) return;
    if (v == a.n) {
      QfOneType t;
      t.m = a.n;
      t.color = color;
      t.pairs.reserve(size_t(a.n) * bins.size());
      for (int w = 0; w < a.n; ++w)
        for (size_t k = 0; k < bins.size(); ++k) t.pairs.push_back(uint8_t(ext.paircode(bins[k], a.n, w)));
      out.push_back(std::move(t));
      return;
    }
    if (fixed_prefix && v < fixed_prefix->m) {
      std::vector<uint8_t> code(bins.size());
      for (size_t k = 0; k < bins.size(); ++k) code[k] = fixed_prefix->pairs[size_t(v) * bins.size() + k];
      apply_coord(v, code);
      if (coord_ok(v)) dfs(v + 1, color, cands);
      return;
    }
    std::vector<int> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    if (rng)
      for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng->below(i)]);
    for (int ci : order) {
      if (out.size() >= cap) return;
      apply_coord(v, cands[ci]);
      if (coord_ok(v)) dfs(v + 1, color, cands);
    }
  }
};

}  // namespace

std::vector<QfOneType> qf_one_types(const FinStructure& a, const ClassSpec& spec, bool include_unary,
                                    size_t cap) {
  if (!(a.lang == spec.lang || *a.lang == *spec.lang))
    throw LanguageMismatch("qf_one_types: language mismatch");
  if (!member(spec, a)) throw Error("qf_one_types: structure is not a member of the class");
  TypeSearch ts(a, spec, include_unary, cap, nullptr);
  ts.run(nullptr);
  std::sort(ts.out.begin(), ts.out.end(), [&](const QfOneType& x, const QfOneType& y) {
    return compare_types(*a.lang, x, y) < 0;
  });
  return ts.out;
}

bool type_realizable(const FinStructure& a, const ClassSpec& spec, const QfOneType& t) {
  if (t.color == -2 && a.lang->unary_count() > 0) {
    for (int c : color_table(spec)) {
      QfOneType u = t;
      u.color = c;
      if (type_realizable(a, spec, u)) return true;
    }
    return false;
  }
  FinStructure ext = realize_type(a, t);
  return member_extend(spec, ext);
}

namespace detail {

// sampling hook used by the prefix generator
std::vector<QfOneType> sample_types(const FinStructure& a, const ClassSpec& spec, const QfOneType* prefix,
                                    Rng& rng, size_t cap, bool include_unary) {
  TypeSearch ts(a, spec, include_unary, cap, &rng);
  ts.run(prefix);
  return ts.out;
}

}  // namespace detail

// ---- printing -------------------------------------------------------------------

namespace {

void collect_defs(const ClassSpec& spec, std::ostream& os, std::map<const ClassSpec*, std::string>& names,
                  int& counter, bool& lang_emitted);

std::string struct_text(const FinStructure& s, const std::string& nm) {
  std::ostringstream os;
  os << "struct " << nm << " = { size " << s.n << ";";
  for (size_t k = 0; k < s.lang->symbols.size(); ++k) {
    const auto& sym = s.lang->symbols[k];
    std::ostringstream ts;
    bool any = false;
    if (sym.arity == 1) {
      for (int i = 0; i < s.n; ++i)
        if (s.holds1(int(k), i)) { ts << " (" << i << ")"; any = true; }
    } else if (sym.arity == 2) {
      for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.n; ++j) {
          if (!s.holds2(int(k), i, j)) continue;
          if (sym.has(SymFlag::Symmetric) && j < i) continue;
          if (sym.has(SymFlag::Equivalence) && i == j) continue;
          ts << " (" << i << "," << j << ")";
          any = true;
        }
    } else {
      std::set<std::vector<int>> seen;
      for (auto t : s.hi[s.sym_slot(int(k))]) {
        if (sym.has(SymFlag::Symmetric)) std::sort(t.begin(), t.end());
        if (!seen.insert(t).second) continue;
        ts << " (";
        for (size_t q = 0; q < t.size(); ++q) ts << (q ? "," : "") << t[q];
        ts << ")";
        any = true;
      }
    }
    if (any) os << " " << sym.name << ":" << ts.str() << ";";
  }
  os << " }";
  return os.str();
}

void collect_defs(const ClassSpec& spec, std::ostream& os, std::map<const ClassSpec*, std::string>& names,
                  int& counter, bool& lang_emitted) {
  if (names.count(&spec)) return;
  std::string nm = spec.name.empty() ? ("c" + std::to_string(counter++)) : spec.name;
  switch (spec.kind) {
    case ClassSpec::Kind::Unrestricted: {
      if (!lang_emitted) {
        os << spec.lang->print() << "\n";
        lang_emitted = true;
      }
      std::ostringstream body;
      body << "class " << nm << " = unrestricted {";
      bool first_set = true;
      for (auto& [arity, reps] : spec.constraints) {
        body << (first_set ? " " : " ") << arity << ": [";
        first_set = false;
        for (size_t i = 0; i < reps.size(); ++i) {
          std::string sn = "s" + std::to_string(counter++);
          // constraint representatives live over the arity-sublanguage; emit them inline
          os << struct_text(reps[i], sn) << "\n";
          body << (i ? ", " : "") << sn;
        }
        body << "];";
      }
      body << " }";
      os << body.str() << "\n";
      break;
    }
    case ClassSpec::Kind::Forb: {
      collect_defs(*spec.base, os, names, counter, lang_emitted);
      std::ostringstream body;
      body << "class " << nm << " = forb(" << names[spec.base.get()] << ") {";
      for (size_t i = 0; i < spec.forbidden.size(); ++i) {
        std::string sn = "f" + std::to_string(counter++);
        os << struct_text(spec.forbidden[i], sn) << "\n";
        body << (i ? ", " : " ") << sn;
      }
      body << " }";
      os << body.str() << "\n";
      break;
    }
    case ClassSpec::Kind::Builtin: {
      os << "class " << nm << " = builtin ";
      switch (spec.bkind) {
        case BuiltinKind::LO_n: os << "LO " << spec.bm; break;
        case BuiltinKind::P_n: os << "P " << spec.bn; break;
        case BuiltinKind::COE_np: os << "COE " << spec.bn << " " << spec.bp; break;
        case BuiltinKind::LOE_mnp: os << "LOE " << spec.bm << " " << spec.bn << " " << spec.bp; break;
      }
      os << "\n";
      break;
    }
    case ClassSpec::Kind::Superpose: {
      for (auto& p : spec.parts) collect_defs(*p, os, names, counter, lang_emitted);
      os << "class " << nm << " = superpose(";
      for (size_t i = 0; i < spec.parts.size(); ++i) os << (i ? ", " : "") << names[spec.parts[i].get()];
      os << ")\n";
      break;
    }
    case ClassSpec::Kind::OrderedExpansion: {
      collect_defs(*spec.base, os, names, counter, lang_emitted);
      os << "class " << nm << " = ordered(" << names[spec.base.get()] << ")\n";
      break;
    }
  }
  names[&spec] = nm;
}

}  // namespace

std::string ClassSpec::print() const {
  std::ostringstream os;
  std::map<const ClassSpec*, std::string> names;
  int counter = 0;
  bool lang_emitted = false;
  collect_defs(*this, os, names, counter, lang_emitted);
  return os.str();
}

}  // namespace brd
