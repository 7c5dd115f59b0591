#include "brd/codingtree.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace brd {

namespace detail {
std::vector<QfOneType> sample_types(const FinStructure& a, const ClassSpec& spec, const QfOneType* prefix,
                                    Rng& rng, size_t cap, bool include_unary);
}

// ---- EnumPrefix -----------------------------------------------------------------

FinStructure EnumPrefix::initial(int m) const {
  std::vector<int> verts(m);
  std::iota(verts.begin(), verts.end(), 0);
  return k_n.induced(verts);
}

QfOneType EnumPrefix::type_of(int i, int m, bool include_unary) const {
  QfOneType t;
  t.m = m;
  t.color = include_unary ? k_n.unary_color(i) : (k_n.lang->unary_count() ? -2 : -1);
  auto bins = k_n.lang->binary_indices();
  t.pairs.reserve(size_t(m) * bins.size());
  for (int v = 0; v < m; ++v)
    for (int s : bins) t.pairs.push_back(uint8_t(k_n.paircode(s, i, v)));
  return t;
}

int EnumPrefix::unmet_count() const {
  int c = 0;
  for (auto& o : schedule) c += o.realized_by < 0;
  return c;
}

bool EnumPrefix::level_saturated(int m) const {
  if (m >= tracked_levels) return false;
  for (auto& o : schedule)
    if (o.level == m && o.realized_by < 0) return false;
  return true;
}

namespace {

std::vector<uint8_t> type_key(const QfOneType& t) {
  std::vector<uint8_t> k;
  k.push_back(uint8_t(t.color + 2));
  k.insert(k.end(), t.pairs.begin(), t.pairs.end());
  return k;
}

// single linear order: positions carry everything, no search needed
EnumPrefix lo_prefix(ClassSpecPtr spec, int n, uint64_t seed, const PrefixOptions& opt) {
  Rng rng = Rng::stream(seed, 17);
  std::vector<int> order;  // vertex ids, ascending by position
  EnumPrefix out;
  out.spec = spec;
  out.n = n;
  out.seed = seed;

  struct Ob { int level, cut, realized_by; };
  std::vector<Ob> obs;
  std::deque<size_t> pending;

  auto cut_of_slot = [&](int slot, int m) {
    int c = 0;
    for (int q = 0; q < slot; ++q) c += order[q] < m;
    return c;
  };

  for (int k = 0; k < n; ++k) {
    if (k < opt.obligation_level_cap && size_t(k + 1) <= opt.obligation_cap) {
      for (int c = 0; c <= k; ++c) {
        obs.push_back({k, c, -1});
        pending.push_back(obs.size() - 1);
      }
      out.tracked_levels = k + 1;
    }
    while (!pending.empty() && obs[pending.front()].realized_by >= 0) pending.pop_front();
    int want_level = -1, want_cut = -1;
    if (!pending.empty()) {
      want_level = obs[pending.front()].level;
      want_cut = obs[pending.front()].cut;
    }
    std::vector<int> slots;
    for (int p = 0; p <= k; ++p)
      if (want_level < 0 || cut_of_slot(p, want_level) == want_cut) slots.push_back(p);
    int slot = slots.empty() ? int(rng.below(uint64_t(k + 1))) : slots[rng.below(slots.size())];
    order.insert(order.begin() + slot, k);
    int kslot = int(std::find(order.begin(), order.end(), k) - order.begin());
    for (auto& ob : obs)
      if (ob.realized_by < 0 && ob.level <= k && cut_of_slot(kslot, ob.level) == ob.cut)
        ob.realized_by = k;
  }

  FinStructure a(spec->lang, n);
  for (size_t p = 0; p < order.size(); ++p)
    for (size_t q = p + 1; q < order.size(); ++q) a.set2(0, order[p], order[q]);
  out.k_n = std::move(a);
  for (auto& ob : obs) {
    Obligation o;
    o.level = ob.level;
    o.realized_by = ob.realized_by;
    o.type.m = ob.level;
    o.type.color = -1;
    o.type.pairs.resize(ob.level, 0);
    for (int j = 0; j < ob.level; ++j) {
      int rank = 0;
      for (int q = 0; q < ob.level; ++q) rank += out.k_n.holds2(0, q, j);
      o.type.pairs[j] = rank >= ob.cut ? 2 : 1;  // x below v_j iff v_j sits at or above the cut
    }
    out.schedule.push_back(std::move(o));
  }
  return out;
}

}  // namespace

EnumPrefix generic_prefix(ClassSpecPtr spec, int n, uint64_t seed, PrefixOptions opt) {
  if (spec->kind == ClassSpec::Kind::Builtin && spec->bkind == BuiltinKind::LO_n && spec->bm == 1)
    return lo_prefix(spec, n, seed, opt);

  FinStructure cur(spec->lang, 0);
  EnumPrefix out;
  out.spec = spec;
  out.n = n;
  out.seed = seed;

  std::vector<std::map<std::vector<uint8_t>, size_t>> level_index;
  std::deque<size_t> pending;
  bool tracking = true;

  for (int k = 0; k < n; ++k) {
    if (tracking && k < opt.obligation_level_cap) {
      auto ts = qf_one_types(cur, *spec, true, opt.obligation_cap + 1);
      if (ts.size() > opt.obligation_cap) {
        tracking = false;
      } else {
        level_index.emplace_back();
        for (auto& t : ts) {
          Obligation o;
          o.level = k;
          o.type = t;
          out.schedule.push_back(std::move(o));
          level_index.back()[type_key(out.schedule.back().type)] = out.schedule.size() - 1;
          pending.push_back(out.schedule.size() - 1);
        }
        out.tracked_levels = k + 1;
      }
    }
    while (!pending.empty() && out.schedule[pending.front()].realized_by >= 0) pending.pop_front();
    const QfOneType* want = pending.empty() ? nullptr : &out.schedule[pending.front()].type;

    Rng step_rng = Rng::stream(seed, 1000 + uint64_t(k));
    auto cands = detail::sample_types(cur, *spec, want, step_rng, opt.sample_cap, true);
    if (cands.empty() && want)
      throw Error("generic_prefix: obligation at level " + std::to_string(want->m) +
                  " is unrealizable over the prefix (spec inconsistent?)");
    if (cands.empty()) throw Error("generic_prefix: no one-vertex extension exists");
    const QfOneType& pick = cands[step_rng.below(cands.size())];
    cur = realize_type(cur, pick);
    for (int m = 0; m < std::min(out.tracked_levels, k + 1); ++m) {
      QfOneType r = pick.restricted(m);
      auto it = level_index[m].find(type_key(r));
      if (it != level_index[m].end() && out.schedule[it->second].realized_by < 0)
        out.schedule[it->second].realized_by = k;
    }
  }
  out.k_n = std::move(cur);
  return out;
}

// ---- slabs ---------------------------------------------------------------------

char preferred_variant(const ClassSpec& spec) { return spec_uses_unary_colored_tree(spec) ? 'U' : 'S'; }

CodingTreeSlab build_slab(const EnumPrefix& prefix, char variant, int depth) {
  if (depth >= prefix.n) throw Error("build_slab: depth must be below the prefix length");
  CodingTreeSlab slab;
  slab.variant = variant;
  slab.prefix = prefix;
  slab.depth = depth;
  bool iu = variant == 'S';
  const RelLanguage& lang = *prefix.k_n.lang;
  for (int m = 0; m <= depth; ++m) {
    std::vector<QfOneType> lvl;
    for (int i = m; i < prefix.n; ++i) {
      QfOneType t = prefix.type_of(i, m, iu);
      bool dup = false;
      for (auto& u : lvl)
        if (u == t) { dup = true; break; }
      if (!dup) lvl.push_back(std::move(t));
    }
    std::sort(lvl.begin(), lvl.end(),
              [&](const QfOneType& a, const QfOneType& b) { return compare_types(lang, a, b) < 0; });
    QfOneType c = prefix.type_of(m, m, iu);
    int pos = -1;
    for (size_t q = 0; q < lvl.size(); ++q)
      if (lvl[q] == c) pos = int(q);
    slab.levels.push_back(std::move(lvl));
    slab.coding_pos.push_back(pos);
    slab.coding_color.push_back(prefix.k_n.unary_color(m));
  }
  return slab;
}

bool CodingTreeSlab::contains(int m, const QfOneType& t) const {
  if (m > depth) return false;
  for (auto& u : levels[m])
    if (u == t) return true;
  return false;
}

// ---- fibers ---------------------------------------------------------------------

int Fiber::lca_split(int a, int b) const {
  for (size_t k = 0; k < splits.size(); ++k) {
    const auto& s = splits[k];
    if (s.lo <= a && a < s.hi && s.lo <= b && b < s.hi && ((a < s.mid) != (b < s.mid)))
      return int(k);
  }
  return -1;
}

// ---- skeleton --------------------------------------------------------------------

CodingSkeleton::CodingSkeleton(ClassSpecPtr s, EnumPrefix p) : spec(std::move(s)), prefix(std::move(p)) {
  variant = preferred_variant(*spec);
  labeled = labeled_rank_count(*spec->lang) > 0;
}

const FinStructure& CodingSkeleton::initial(int m) const {
  auto it = initial_cache_.find(m);
  if (it != initial_cache_.end()) return it->second;
  return initial_cache_.emplace(m, prefix.initial(m)).first->second;
}

QfOneType CodingSkeleton::coding_type(int m) const { return prefix.type_of(m, m, variant == 'S'); }

namespace {

FinStructure realize_any_color(const FinStructure& a, const ClassSpec& spec, const QfOneType& t) {
  if (t.color != -2 || a.lang->unary_count() == 0) return realize_type(a, t);
  for (int c : color_table(spec)) {
    QfOneType u = t;
    u.color = c;
    FinStructure ext = realize_type(a, u);
    if (member_extend(spec, ext)) return ext;
  }
  throw Error("no unary color realizes the type");
}

// the determined label pattern between two distinct extension directions
int mutual_psi(const ClassSpec& spec, const FinStructure& base, const QfOneType& t1, const QfOneType& t2) {
  FinStructure b1 = realize_any_color(base, spec, t1);
  Rng dummy(0);
  auto exts = detail::sample_types(b1, spec, &t2, dummy, 64, t2.color != -2);
  if (exts.empty()) throw Error("mutual_psi: direction pair unrealizable");
  auto bins = base.lang->binary_indices();
  int psi = -1;
  for (auto& e : exts) {
    std::vector<uint8_t> pv(e.pairs.end() - long(bins.size()), e.pairs.end());
    int p = psi_of_pairvec(*base.lang, pv);
    if (psi < 0) psi = p;
    else if (psi != p)
      throw Error("mutual_psi: pattern between directions not determined (labeled clause (c) fails)");
  }
  return psi;
}

std::vector<uint8_t> coord_of(const QfOneType& t, int v, int nb) {
  return std::vector<uint8_t>(t.pairs.begin() + long(v) * nb, t.pairs.begin() + long(v + 1) * nb);
}

}  // namespace

const Fiber& CodingSkeleton::fiber(int epoch, const QfOneType& sigma) const {
  auto key = std::make_pair(epoch, type_key(sigma));
  auto it = fiber_cache_.find(key);
  if (it != fiber_cache_.end()) return it->second;

  Fiber f;
  const FinStructure& base = initial(epoch + 1);
  Rng dummy(0);
  f.cands = detail::sample_types(base, *spec, &sigma, dummy, size_t(-1), variant == 'S');
  if (f.cands.empty()) throw Error("fiber: type has no one-point extension");
  std::sort(f.cands.begin(), f.cands.end(), [&](const QfOneType& a, const QfOneType& b) {
    return compare_types(*spec->lang, a, b) < 0;
  });
  int K = int(f.cands.size());
  std::vector<int> delta(std::max(0, K - 1), 1);
  if (labeled)
    for (int k = 0; k + 1 < K; ++k) delta[size_t(k)] = mutual_psi(*spec, base, f.cands[k], f.cands[k + 1]);
  std::function<void(int, int)> rec = [&](int lo, int hi) {
    if (hi - lo <= 1) return;
    int best = lo;
    for (int k = lo; k + 1 < hi; ++k)
      if (delta[k] > delta[best]) best = k;
    f.splits.push_back(Fiber::Split{lo, best + 1, hi, labeled ? delta[best] : -1});
    rec(lo, best + 1);
    rec(best + 1, hi);
  };
  rec(0, K);
  if (K == 1) f.cont = 0;
  else {
    int best = 0;
    for (int k = 0; k + 1 < K; ++k)
      if (delta[k] < delta[best]) best = k;
    f.cont = best;
  }
  return fiber_cache_.emplace(std::move(key), std::move(f)).first->second;
}

const QfOneType& CodingSkeleton::continuation(int m) const {
  auto it = cont_cache_.find(m);
  if (it != cont_cache_.end()) return it->second;
  const Fiber& f = fiber(m, coding_type(m));
  return cont_cache_.emplace(m, f.cands[f.cont]).first->second;
}

PairRelation CodingSkeleton::relate(int i, int j) const {
  if (i == j) throw Error("relate: need distinct coding nodes");
  if (i > j) {
    auto r = relate(j, i);
    if (r.same_component && !r.comparable) {
      std::swap(r.cand_i, r.cand_j);
      r.i_left = !r.i_left;
    }
    return r;
  }
  auto ck = std::make_pair(i, j);
  auto cached = rel_cache_.find(ck);
  if (cached != rel_cache_.end()) return cached->second;

  PairRelation rel;
  int nb = spec->lang->binary_count();
  if (variant == 'S' && spec->lang->unary_count() &&
      prefix.k_n.unary_color(i) != prefix.k_n.unary_color(j)) {
    rel.same_component = false;
    rel_cache_[ck] = rel;
    return rel;
  }
  int div = -1;
  std::vector<uint8_t> ci, cj;
  for (int m = 0; m < i; ++m) {
    ci = prefix.k_n.pairvec(i, m);
    cj = prefix.k_n.pairvec(j, m);
    if (ci != cj) { div = m; break; }
  }
  if (div < 0) {
    cj = prefix.k_n.pairvec(j, i);
    ci = coord_of(continuation(i), i, nb);
    if (ci == cj) {
      rel.comparable = true;
      rel_cache_[ck] = rel;
      return rel;
    }
    div = i;
  }
  QfOneType sigma = prefix.type_of(i, div, variant == 'S');
  const Fiber& f = fiber(div, sigma);
  auto idx_of = [&](const std::vector<uint8_t>& coord) {
    for (size_t k = 0; k < f.cands.size(); ++k)
      if (coord_of(f.cands[k], div, nb) == coord) return int(k);
    throw Error("skeleton: realized coordinate missing from its fiber");
  };
  rel.cand_i = (div == i) ? f.cont : idx_of(ci);
  rel.cand_j = idx_of(cj);
  rel.meet.epoch = div;
  rel.meet.sigma_key = type_key(sigma);
  rel.meet.split_idx = f.lca_split(rel.cand_i, rel.cand_j);
  if (rel.meet.split_idx < 0) throw Error("skeleton: no separating split found");
  rel.i_left = rel.cand_i < rel.cand_j;
  if (labeled) rel.psi = f.splits[rel.meet.split_idx].psi;
  rel_cache_[ck] = rel;
  return rel;
}

bool CodingSkeleton::comparable(int i, int j) const {
  if (i == j) return true;
  auto r = relate(std::min(i, j), std::max(i, j));
  return r.same_component && r.comparable;
}

DecoratedTree CodingSkeleton::closure(const std::vector<int>& subset_in) const {
  if (subset_in.empty()) throw Error("closure: empty antichain");
  std::vector<int> subset = subset_in;
  std::sort(subset.begin(), subset.end());
  int n = int(subset.size());
  int nb = spec->lang->binary_count();
  bool multi = variant == 'S' && spec->lang->unary_count() > 0;

  std::map<int, std::vector<int>> comps;
  for (int t : subset) comps[multi ? prefix.k_n.unary_color(t) : -1].push_back(t);

  struct Ev {
    bool coding;
    int vertex = -1;
    MeetKey key;
    QfOneType sigma;
    int psi = -1;
  };
  std::vector<Ev> events;
  for (int t : subset) {
    Ev e;
    e.coding = true;
    e.vertex = t;
    events.push_back(std::move(e));
  }
  std::vector<MeetKey> seen;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      auto r = relate(subset[a], subset[b]);
      if (!r.same_component) continue;
      if (r.comparable) throw Error("closure: comparable coding nodes supplied");
      bool dup = false;
      for (auto& k : seen)
        if (k == r.meet) { dup = true; break; }
      if (dup) continue;
      seen.push_back(r.meet);
      Ev e;
      e.coding = false;
      e.key = r.meet;
      e.sigma = prefix.type_of(subset[a], r.meet.epoch, variant == 'S');
      e.psi = r.psi;
      events.push_back(std::move(e));
    }
  if (int(seen.size()) != n - int(comps.size()))
    throw Error("closure: meet count mismatch (ambient tree not diagonal?)");

  const RelLanguage& lang = *spec->lang;
  std::stable_sort(events.begin(), events.end(), [&](const Ev& x, const Ev& y) {
    int ex = x.coding ? x.vertex : x.key.epoch;
    int ey = y.coding ? y.vertex : y.key.epoch;
    if (ex != ey) return ex < ey;
    if (x.coding != y.coding) return !x.coding;  // epoch splits precede the coding level
    if (x.coding) return x.vertex < y.vertex;
    int c = compare_types(lang, x.sigma, y.sigma);
    if (c != 0) return c < 0;
    return x.key.split_idx < y.key.split_idx;
  });

  auto cand_at = [&](int t, const Ev& e) -> int {
    const Fiber& f = fiber(e.key.epoch, e.sigma);
    if (t == e.key.epoch) return f.cont;
    auto coord = prefix.k_n.pairvec(t, e.key.epoch);
    for (size_t k = 0; k < f.cands.size(); ++k)
      if (coord_of(f.cands[k], e.key.epoch, nb) == coord) return int(k);
    throw Error("closure: terminal coordinate missing from its fiber");
  };

  std::vector<std::pair<int, std::vector<int>>> components;
  for (auto& [color, terms] : comps) components.emplace_back(multi ? color : -1, terms);

  std::vector<ClosureEvent> evs;
  for (auto& e : events) {
    ClosureEvent ce;
    if (e.coding) {
      ce.coding = true;
      ce.vertex = e.vertex;
      ce.color = prefix.k_n.unary_color(e.vertex);
    } else {
      const auto& sp = fiber(e.key.epoch, e.sigma).splits[e.key.split_idx];
      ce.psi = e.psi;
      for (int t : subset) {
        if (t < e.key.epoch) continue;  // coded below this meet
        // the S-variant type carries the unary color, so the sigma equality
        // also filters components
        if (!(prefix.type_of(t, e.key.epoch, variant == 'S') == e.sigma)) continue;
        int c = cand_at(t, e);
        if (c >= sp.lo && c < sp.mid) ce.left.push_back(t);
        else if (c >= sp.mid && c < sp.hi) ce.right.push_back(t);
      }
    }
    evs.push_back(std::move(ce));
  }
  return build_closure_tree(nb, labeled, components, evs,
                            [&](int t, int u) { return prefix.k_n.pairvec(t, u); });
}

// ---- explicit materialization ------------------------------------------------------

DiagCodingTree diagonal_subtree(std::shared_ptr<CodingSkeleton> skel, int depth, DiagTreeOptions opt) {
  if (depth > skel->prefix.n) throw Error("diagonal_subtree: depth exceeds prefix length");
  DiagCodingTree t;
  t.skel = skel;
  t.depth = depth;
  bool iu = skel->variant == 'S';

  struct NS {
    QfOneType sigma;      // restricted type over the current epoch's base
    const Fiber* fib = nullptr;
    int blo = 0, bhi = 0; // candidate block within the fiber
  };
  std::vector<NS> cur;
  {
    FinStructure empty(skel->spec->lang, 0);
    for (auto& r : qf_one_types(empty, *skel->spec, iu)) cur.push_back(NS{r, nullptr, 0, 0});
  }

  auto emit = [&](char kind, int epoch, int critical, int psi) {
    DiagCodingTree::Level lvl;
    lvl.kind = kind;
    lvl.epoch = epoch;
    lvl.critical = critical;
    lvl.psi = psi;
    for (auto& ns : cur) lvl.types.push_back(ns.sigma);
    for (auto& ns : cur) lvl.cand.push_back(ns.bhi - ns.blo == 1 ? ns.blo : -1);
    t.levels.push_back(std::move(lvl));
  };
  for (int m = 0; m < depth; ++m) {
    // enter epoch m
    for (auto& ns : cur) {
      ns.fib = &skel->fiber(m, ns.sigma);
      if (opt.bind_to_slab && m + 1 < skel->prefix.n) {
        for (auto& cand : ns.fib->cands) {
          bool found = false;
          for (int i = m + 1; i < skel->prefix.n && !found; ++i)
            found = skel->prefix.type_of(i, m + 1, iu) == cand;
          if (!found)
            throw DepthExhausted("diagonal_subtree: slab level " + std::to_string(m + 1) +
                                 " misses a realizable 1-type (saturation obligation unmet)");
        }
      }
      ns.blo = 0;
      ns.bhi = int(ns.fib->cands.size());
    }
    // one split per level, node order then fiber preorder
    for (size_t k = 0; k < cur.size();) {
      const Fiber* fib = cur[k].fib;
      if (cur[k].bhi - cur[k].blo <= 1) { ++k; continue; }
      // the next split of this block in preorder
      int found = -1;
      for (size_t s = 0; s < fib->splits.size(); ++s)
        if (fib->splits[s].lo == cur[k].blo && fib->splits[s].hi == cur[k].bhi) { found = int(s); break; }
      if (found < 0) throw Error("diagonal_subtree: laminar block missing");
      const auto& sp = fib->splits[size_t(found)];
      emit('s', m, int(k), sp.psi);
      NS left = cur[k], right = cur[k];
      left.bhi = sp.mid;
      right.blo = sp.mid;
      cur[k] = left;
      cur.insert(cur.begin() + long(k) + 1, right);
      if (int(cur.size()) > opt.max_width) throw Error("diagonal_subtree: width cap exceeded");
    }
    // coding level
    QfOneType ct = skel->coding_type(m);
    const Fiber& cf = skel->fiber(m, ct);
    int crit = -1;
    for (size_t k = 0; k < cur.size(); ++k)
      if (cur[k].sigma == ct && cur[k].blo == cf.cont) crit = int(k);
    if (crit < 0) throw Error("diagonal_subtree: coding node not present at its level");
    emit('c', m, crit, -1);
    t.coding_level_of.push_back(int(t.levels.size()) - 1);
    // advance into epoch m+1: refine every node by its candidate
    for (auto& ns : cur) {
      ns.sigma = ns.fib->cands[ns.blo];
      ns.fib = nullptr;
    }
  }

  // levels carry the pre-event state; the width grows by one exactly after
  // each split level, at the split position, so parents are positional
  int last_split_pos = -1;
  for (size_t li = 0; li < t.levels.size(); ++li) {
    auto& lvl = t.levels[li];
    int w = int(lvl.types.size());
    lvl.parent.assign(size_t(w), 0);
    if (li == 0 || last_split_pos < 0) {
      for (int q = 0; q < w; ++q) lvl.parent[size_t(q)] = q;
    } else {
      for (int q = 0; q < w; ++q)
        lvl.parent[size_t(q)] = q <= last_split_pos ? std::min(q, last_split_pos) : q - 1;
    }
    last_split_pos = lvl.kind == 's' ? lvl.critical : -1;
  }
  return t;
}

DiagCodingTree diagonal_subtree(const CodingTreeSlab& slab, ClassSpecPtr spec, DiagTreeOptions opt) {
  auto skel = std::make_shared<CodingSkeleton>(spec, slab.prefix);
  skel->variant = slab.variant;
  return diagonal_subtree(skel, slab.depth, opt);
}

// ---- serialization ------------------------------------------------------------------

namespace {

std::string type_label(const RelLanguage& lang, const QfOneType& t) {
  std::ostringstream os;
  if (t.color >= 0) os << "u" << t.color << "|";
  auto bins = lang.binary_indices();
  for (int v = 0; v < t.m; ++v) {
    if (v) os << " ";
    for (size_t k = 0; k < bins.size(); ++k) os << int(t.pairs[size_t(v) * bins.size() + k]);
  }
  return os.str();
}

}  // namespace

std::string DiagCodingTree::to_dot() const {
  const RelLanguage& lang = *skel->spec->lang;
  std::ostringstream os;
  os << "digraph codingtree {\n  rankdir=BT;\n  node [shape=box, fontsize=9];\n";
  for (size_t li = 0; li < levels.size(); ++li) {
    const auto& lvl = levels[li];
    for (size_t q = 0; q < lvl.types.size(); ++q) {
      std::string shape = int(q) == lvl.critical ? (lvl.kind == 'c' ? "doublecircle" : "diamond") : "box";
      os << "  n" << li << "_" << q << " [label=\"" << type_label(lang, lvl.types[q]);
      if (int(q) == lvl.critical && lvl.kind == 's' && lvl.psi >= 0) os << " psi=" << lvl.psi;
      os << "\", shape=" << shape << "];\n";
    }
    if (li > 0)
      for (size_t q = 0; q < lvl.types.size(); ++q)
        os << "  n" << (li - 1) << "_" << lvl.parent[q] << " -> n" << li << "_" << q << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string DiagCodingTree::to_json() const {
  nlohmann::ordered_json j;
  j["depth"] = depth;
  j["variant"] = std::string(1, skel->variant);
  j["labeled"] = skel->labeled;
  auto lv = nlohmann::ordered_json::array();
  const RelLanguage& lang = *skel->spec->lang;
  for (auto& l : levels) {
    nlohmann::ordered_json lj;
    lj["kind"] = std::string(1, l.kind);
    lj["epoch"] = l.epoch;
    lj["critical"] = l.critical;
    if (l.psi >= 0) lj["psi"] = l.psi;
    lj["parent"] = l.parent;
    auto ts = nlohmann::ordered_json::array();
    for (auto& ty : l.types) ts.push_back(type_label(lang, ty));
    lj["types"] = ts;
    lv.push_back(lj);
  }
  j["levels"] = lv;
  return j.dump(2);
}

// ---- validation -----------------------------------------------------------------------

void validate_diagonal(const DiagCodingTree& t) {
  for (size_t li = 0; li < t.levels.size(); ++li) {
    const auto& lvl = t.levels[li];
    if (lvl.critical < 0 || lvl.critical >= int(lvl.types.size()))
      throw Error("validate_diagonal: critical node out of range");
    if (li + 1 < t.levels.size()) {
      const auto& next = t.levels[li + 1];
      int grow = int(next.types.size()) - int(lvl.types.size());
      if (lvl.kind == 's') {
        if (grow != 1) throw Error("validate_diagonal: split level must grow the width by one");
        int dup = 0;
        for (size_t q = 0; q + 1 < next.parent.size(); ++q)
          if (next.parent[q] == next.parent[q + 1]) ++dup;
        if (dup != 1) throw Error("validate_diagonal: splitting degree must be two");
        if (next.parent[size_t(lvl.critical)] != lvl.critical ||
            next.parent[size_t(lvl.critical) + 1] != lvl.critical)
          throw Error("validate_diagonal: split children misplaced");
      } else {
        if (grow != 0) throw Error("validate_diagonal: coding level must not branch");
      }
    }
  }
}

void validate_requirement2(const DiagCodingTree& t) {
  const auto& skel = *t.skel;
  bool iu = skel.variant == 'S';
  for (int m = 0; m < t.depth; ++m) {
    const auto& lvl = t.levels[size_t(t.coding_level_of[size_t(m)])];
    std::vector<QfOneType> succ;
    for (size_t q = 0; q < lvl.types.size(); ++q) {
      const Fiber& f = skel.fiber(m, lvl.types[q]);
      if (lvl.cand[q] < 0) throw Error("requirement 2: unresolved block at a coding level");
      succ.push_back(f.cands[size_t(lvl.cand[q])]);
    }
    auto want = qf_one_types(skel.initial(m + 1), *skel.spec, iu);
    if (succ.size() != want.size())
      throw Error("requirement 2: successor count differs from the next level of 1-types");
    for (size_t q = 0; q < succ.size(); ++q)
      if (!(succ[q] == want[q]))
        throw Error("requirement 2: the order-preserving bijection to the next level fails");
  }
}

void validate_requirement3(const DiagCodingTree& t) {
  const auto& skel = *t.skel;
  int nb = skel.spec->lang->binary_count();
  for (int i = 0; i < t.depth; ++i)
    for (int j = i + 1; j < t.depth; ++j) {
      if (!skel.comparable(i, j)) continue;
      auto ci = coord_of(skel.continuation(i), i, nb);
      auto cj = coord_of(skel.continuation(j), j, nb);
      if (ci != cj) throw Error("requirement 3: passing types along comparable coding nodes differ");
    }
}

void validate_psi_clauses(const DiagCodingTree& t) {
  if (!t.skel->labeled) return;
  // (a) psi non-increasing along every path of splitting nodes
  int L = int(t.levels.size());
  std::vector<int> cur_psi(t.levels.empty() ? 0 : t.levels[0].types.size(), INT32_MAX);
  std::vector<std::vector<int>> psi_above(size_t(L));
  for (int li = 0; li < L; ++li) {
    const auto& lvl = t.levels[size_t(li)];
    std::vector<int> now(lvl.types.size());
    for (size_t q = 0; q < lvl.types.size(); ++q)
      now[q] = li == 0 ? INT32_MAX : psi_above[size_t(li - 1)][size_t(lvl.parent[q])];
    if (lvl.kind == 's') {
      int q = lvl.critical;
      if (lvl.psi > now[size_t(q)] && now[size_t(q)] != INT32_MAX)
        throw Error("psi clause (a): label increases along a path");
      now[size_t(q)] = lvl.psi;
    }
    psi_above[size_t(li)] = now;
  }
  // (d) the maximal splitting node below each coding node has psi = 0
  for (int m = 0; m < t.depth; ++m) {
    int cl = t.coding_level_of[size_t(m)];
    int pos = t.levels[size_t(cl)].critical;
    int psi = -1;
    int p = pos;
    for (int li = cl; li > 0; --li) {
      p = t.levels[size_t(li)].parent[size_t(p)];
      const auto& prev = t.levels[size_t(li - 1)];
      if (prev.kind == 's' && prev.critical == p) { psi = prev.psi; break; }
    }
    if (psi != 0)
      throw Error("psi clause (d): maximal splitting node below coding node " + std::to_string(m) +
                  " has psi " + std::to_string(psi));
  }
  // (b), finite surrogate: every label that occurs keeps occurring late
  std::map<int, int> last_epoch;
  int max_epoch = -1;
  for (auto& lvl : t.levels)
    if (lvl.kind == 's' && lvl.psi >= 0) {
      last_epoch[lvl.psi] = std::max(last_epoch[lvl.psi], lvl.epoch);
      max_epoch = std::max(max_epoch, lvl.epoch);
    }
  for (auto& [psi, last] : last_epoch)
    if (max_epoch - last > 4)
      throw Error("psi clause (b) surrogate: label " + std::to_string(psi) +
                  " stops occurring well before the built depth");
  // (c): labels are a function of the coded pair pattern
  for (int i = 0; i < t.depth; ++i)
    for (int j = i + 1; j < t.depth; ++j) {
      auto r = t.skel->relate(i, j);
      if (!r.same_component || r.comparable) continue;
      int want = psi_of_pairvec(*t.skel->spec->lang, t.skel->prefix.k_n.pairvec(i, j));
      if (r.psi != want)
        throw Error("psi clause (c): split label disagrees with the coded pair pattern");
    }
}

}  // namespace brd
