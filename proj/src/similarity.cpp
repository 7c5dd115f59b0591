#include "brd/similarity.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

#include "brd/codingtree.hpp"

namespace brd {

int DecoratedTree::critical_of(int level) const {
  for (int id : levels[level])
    if (nodes[id].kind != 'p') return id;
  return -1;
}

std::vector<int> DecoratedTree::children(int node) const {
  std::vector<int> out;
  int lv = nodes[node].level;
  if (lv + 1 >= level_count()) return out;
  for (int id : levels[lv + 1])
    if (nodes[id].parent == node) out.push_back(id);
  return out;
}

void DecoratedTree::validate() const {
  for (int lv = 0; lv < level_count(); ++lv) {
    int crit = 0;
    for (int id : levels[lv]) {
      const Node& nd = nodes[id];
      if (nd.level != lv) throw Error("decorated tree: level index mismatch");
      if (nd.kind != 'p') ++crit;
      if (lv == 0) {
        if (nd.parent != -1) throw Error("decorated tree: root with parent");
      } else {
        if (nd.parent < 0 || nodes[nd.parent].level != lv - 1)
          throw Error("decorated tree: broken parent link");
        if (nodes[nd.parent].kind == 'c' && !children(nd.parent).empty() &&
            children(nd.parent).size() > 1)
          throw Error("decorated tree: coding node splits");
      }
    }
    if (crit != 1) throw Error("decorated tree: exactly one critical node per level required");
    // lex order consistent with a planar embedding: parents nondecreasing
    for (size_t k = 0; k + 1 < levels[lv].size(); ++k) {
      int p1 = nodes[levels[lv][k]].parent, p2 = nodes[levels[lv][k + 1]].parent;
      if (lv > 0) {
        auto pos = [&](int p) {
          const auto& prev = levels[lv - 1];
          return int(std::find(prev.begin(), prev.end(), p) - prev.begin());
        };
        if (pos(p1) > pos(p2)) throw Error("decorated tree: lex order not planar");
      }
    }
  }
  for (size_t id = 0; id < nodes.size(); ++id) {
    const Node& nd = nodes[id];
    if (nd.kind == 's') {
      auto ch = children(int(id));
      if (ch.size() != 2) throw Error("decorated tree: splitting degree must be 2");
    }
  }
}

namespace {

// serialize one level; what is included depends on the mode
void serialize_level(const DecoratedTree& t, int lv, bool with_pass, bool with_psi,
                     std::vector<uint8_t>& out) {
  const auto& ids = t.levels[lv];
  out.push_back(uint8_t(ids.size()));
  int crit_id = t.critical_of(lv);
  char kind = t.nodes[crit_id].kind;
  out.push_back(uint8_t(kind));
  // positions of parents within the previous level
  for (int id : ids) {
    int ppos = 0;
    if (lv > 0) {
      const auto& prev = t.levels[lv - 1];
      ppos = int(std::find(prev.begin(), prev.end(), t.nodes[id].parent) - prev.begin());
    }
    out.push_back(uint8_t(ppos));
    out.push_back(t.nodes[id].kind == 'p' ? 0 : 1);
  }
  if (kind == 'c') {
    int ci = 0;
    for (size_t k = 0; k < ids.size(); ++k)
      if (ids[k] == crit_id) ci = int(k);
    out.push_back(uint8_t(ci));
    out.push_back(uint8_t(t.nodes[crit_id].color + 2));
    if (with_pass) {
      for (int id : ids) {
        if (id == crit_id) {
          out.push_back(0xfe);
          continue;
        }
        out.push_back(0xfd);
        out.insert(out.end(), t.nodes[id].pass.begin(), t.nodes[id].pass.end());
      }
    }
  } else if (kind == 's' && with_psi) {
    out.push_back(uint8_t(t.nodes[crit_id].psi + 2));
  }
  // root colors matter on the first level (multi-rooted trees)
  if (lv == 0)
    for (int id : ids) out.push_back(uint8_t(t.nodes[id].color + 2));
}

std::vector<uint8_t> serialize(const DecoratedTree& t, bool with_psi, bool top_pass, int max_level) {
  std::vector<uint8_t> out;
  out.push_back(uint8_t(max_level + 1));
  out.push_back(uint8_t(t.nb));
  for (int lv = 0; lv <= max_level; ++lv)
    serialize_level(t, lv, lv < max_level || top_pass, with_psi, out);
  return out;
}

}  // namespace

SimCode sim_code(const DecoratedTree& t, bool labeled) {
  if (labeled && !t.labeled) throw Error("sim_code: labeled mode on an unlabeled tree");
  // closures keep every coding-level decoration; the top level of a closed
  // antichain tree is a lone coding node, so plain and plus coincide
  return SimCode{serialize(t, labeled, true, t.level_count() - 1)};
}

bool similar(const DecoratedTree& s, const DecoratedTree& t, SimMode mode) {
  if ((mode == SimMode::L || mode == SimMode::LPlus) && (!s.labeled || !t.labeled))
    throw Error("similar: L mode on unlabeled trees");
  if (s.nb != t.nb) return false;
  if (s.level_count() != t.level_count()) return false;
  int top = s.level_count() - 1;
  switch (mode) {
    case SimMode::Plain:
      return serialize(s, false, false, top) == serialize(t, false, false, top);
    case SimMode::Plus:
      return serialize(s, false, true, top) == serialize(t, false, true, top);
    case SimMode::L:
      return serialize(s, true, false, top) == serialize(t, true, false, top);
    case SimMode::LPlus:
      return serialize(s, true, true, top) == serialize(t, true, true, top);
    case SimMode::Weak: {
      if (top < 1) return true;
      bool lab = s.labeled && t.labeled;
      return serialize(s, lab, true, top - 1) == serialize(t, lab, true, top - 1);
    }
  }
  return false;
}

// ---- explicit bijection search (test oracle) --------------------------------

namespace {

bool map_respects(const DecoratedTree& s, const DecoratedTree& t, const std::vector<int>& f,
                  SimMode mode) {
  int top = s.level_count() - 1;
  int limit = mode == SimMode::Weak ? top - 1 : top;
  bool want_psi = mode == SimMode::L || mode == SimMode::LPlus ||
                  (mode == SimMode::Weak && s.labeled && t.labeled);
  bool want_top_pass = mode == SimMode::Plus || mode == SimMode::LPlus || mode == SimMode::Weak;
  for (size_t id = 0; id < s.nodes.size(); ++id) {
    const auto& a = s.nodes[id];
    if (a.level > limit) continue;
    const auto& b = t.nodes[f[id]];
    if (a.level != b.level || a.kind != b.kind) return false;
    if (a.kind == 'c' && a.color != b.color) return false;
    if (a.level == 0 && a.color != b.color) return false;
    if (want_psi && a.kind == 's' && a.psi != b.psi) return false;
    if (a.level > 0 && f[a.parent] != b.parent) return false;
    // lex preservation
    const auto& sl = s.levels[a.level];
    const auto& tl = t.levels[a.level];
    int pa = int(std::find(sl.begin(), sl.end(), int(id)) - sl.begin());
    int pb = int(std::find(tl.begin(), tl.end(), f[id]) - tl.begin());
    if (pa != pb) return false;
    bool is_coding_level = s.nodes[s.critical_of(a.level)].kind == 'c';
    if (is_coding_level && a.kind != 'c' && (a.level < limit || (a.level == limit && want_top_pass)))
      if (a.pass != b.pass) return false;
  }
  return true;
}

}  // namespace

bool similar_by_map_search(const DecoratedTree& s, const DecoratedTree& t, SimMode mode) {
  if (s.level_count() != t.level_count() || s.nb != t.nb) return false;
  int limit = mode == SimMode::Weak ? s.level_count() - 2 : s.level_count() - 1;
  for (int lv = 0; lv <= limit; ++lv)
    if (s.levels[lv].size() != t.levels[lv].size()) return false;
  // enumerate per-level bijections
  std::vector<int> f(s.nodes.size(), -1);
  std::function<bool(int)> rec = [&](int lv) -> bool {
    if (lv > limit) return map_respects(s, t, f, mode);
    std::vector<int> perm(t.levels[lv].size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (size_t k = 0; k < s.levels[lv].size(); ++k) f[s.levels[lv][k]] = t.levels[lv][perm[k]];
      if (rec(lv + 1)) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
  };
  return rec(0);
}

// ---- meet closure ------------------------------------------------------------

DecoratedTree meet_close(const DiagCodingTree& tree, const std::vector<int>& coding_indices) {
  return tree.closure_of(coding_indices);
}

// ---- closure assembly ----------------------------------------------------------

DecoratedTree build_closure_tree(int nb, bool labeled,
                                 const std::vector<std::pair<int, std::vector<int>>>& components,
                                 const std::vector<ClosureEvent>& events,
                                 const std::function<std::vector<uint8_t>(int, int)>& pair_of) {
  struct Branch { int color; std::vector<int> terms; };
  std::vector<Branch> alive;
  for (auto& [color, terms] : components) {
    Branch b{color, terms};
    std::sort(b.terms.begin(), b.terms.end());
    alive.push_back(std::move(b));
  }
  DecoratedTree out;
  out.nb = nb;
  out.labeled = labeled;
  std::vector<int> cur_ids;
  for (auto& b : alive) {
    DecoratedTree::Node nd;
    nd.level = 0;
    nd.parent = -1;
    nd.color = b.color;
    cur_ids.push_back(int(out.nodes.size()));
    out.nodes.push_back(std::move(nd));
  }
  out.levels.push_back(cur_ids);

  for (size_t lv = 0; lv < events.size(); ++lv) {
    const ClosureEvent& e = events[lv];
    int bpos = -1;
    if (e.coding) {
      for (size_t k = 0; k < alive.size(); ++k)
        if (std::find(alive[k].terms.begin(), alive[k].terms.end(), e.vertex) != alive[k].terms.end())
          bpos = int(k);
      if (bpos < 0 || alive[size_t(bpos)].terms.size() != 1)
        throw Error("closure: coding branch not a singleton at its level");
      auto& nd = out.nodes[cur_ids[size_t(bpos)]];
      nd.kind = 'c';
      nd.color = e.color;
      for (size_t k = 0; k < alive.size(); ++k) {
        if (int(k) == bpos) continue;
        out.nodes[cur_ids[k]].pass = pair_of(alive[k].terms[0], e.vertex);
      }
    } else {
      std::vector<int> all = e.left;
      all.insert(all.end(), e.right.begin(), e.right.end());
      std::sort(all.begin(), all.end());
      for (size_t k = 0; k < alive.size(); ++k)
        if (alive[k].terms == all) bpos = int(k);
      if (bpos < 0) throw Error("closure: split branch not found");
      auto& nd = out.nodes[cur_ids[size_t(bpos)]];
      nd.kind = 's';
      nd.psi = e.psi;
    }

    if (lv + 1 == events.size()) break;

    std::vector<Branch> next_alive;
    std::vector<int> parent_pos;
    for (size_t k = 0; k < alive.size(); ++k) {
      if (e.coding && int(k) == bpos) continue;
      if (!e.coding && int(k) == bpos) {
        Branch left{alive[k].color, e.left}, right{alive[k].color, e.right};
        std::sort(left.terms.begin(), left.terms.end());
        std::sort(right.terms.begin(), right.terms.end());
        if (left.terms.empty() || right.terms.empty()) throw Error("closure: degenerate split");
        next_alive.push_back(std::move(left));
        parent_pos.push_back(int(k));
        next_alive.push_back(std::move(right));
        parent_pos.push_back(int(k));
      } else {
        next_alive.push_back(alive[k]);
        parent_pos.push_back(int(k));
      }
    }
    std::vector<int> next_ids;
    for (size_t k = 0; k < next_alive.size(); ++k) {
      DecoratedTree::Node nd;
      nd.level = int(lv) + 1;
      nd.parent = cur_ids[size_t(parent_pos[k])];
      next_ids.push_back(int(out.nodes.size()));
      out.nodes.push_back(std::move(nd));
    }
    alive = std::move(next_alive);
    cur_ids = std::move(next_ids);
    out.levels.push_back(cur_ids);
  }
  return out;
}

// ---- ptp ----------------------------------------------------------------------

bool ptp_check(const std::vector<int>& f, const DecoratedTree& s, const DecoratedTree& t) {
  if (f.size() != s.nodes.size()) throw Error("ptp_check: map size mismatch");
  // clause 1: lengths strictly ordered
  for (size_t i = 0; i < f.size(); ++i)
    for (size_t j = 0; j < f.size(); ++j)
      if (s.nodes[i].level < s.nodes[j].level && !(t.nodes[f[i]].level < t.nodes[f[j]].level))
        return false;
  // clause 2: coding nodes to coding nodes, same unary color
  std::vector<int> s_codings, t_of_s;
  for (size_t i = 0; i < f.size(); ++i)
    if (s.nodes[i].kind == 'c') {
      if (t.nodes[f[i]].kind != 'c') return false;
      if (s.nodes[i].color != t.nodes[f[i]].color) return false;
      s_codings.push_back(int(i));
      t_of_s.push_back(f[i]);
    }
  // clause 3: passing types preserved at the image coding nodes
  auto pass_at = [](const DecoratedTree& tr, int node, int coding_node) -> const std::vector<uint8_t>* {
    int cl = tr.nodes[coding_node].level;
    if (tr.nodes[node].level <= cl) return nullptr;
    int u = node;
    while (tr.nodes[u].level > cl) u = tr.nodes[u].parent;
    return &tr.nodes[u].pass;
  };
  for (size_t i = 0; i < f.size(); ++i)
    for (size_t k = 0; k < s_codings.size(); ++k) {
      auto ps = pass_at(s, int(i), s_codings[k]);
      auto pt = pass_at(t, f[int(i)], t_of_s[k]);
      if (!ps != !pt) return false;
      if (ps && pt && *ps != *pt) return false;
    }
  return true;
}

}  // namespace brd
