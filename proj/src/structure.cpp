#include "brd/structure.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace brd {

std::string to_hex(const std::vector<uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

std::string to_hex_u64(uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

int RelLanguage::index_of(const std::string& name) const {
  for (size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i].name == name) return int(i);
  return -1;
}

int RelLanguage::unary_count() const {
  int c = 0;
  for (auto& s : symbols) c += s.arity == 1;
  return c;
}

int RelLanguage::binary_count() const {
  int c = 0;
  for (auto& s : symbols) c += s.arity == 2;
  return c;
}

int RelLanguage::max_arity() const {
  int m = 0;
  for (auto& s : symbols) m = std::max(m, s.arity);
  return m;
}

std::vector<int> RelLanguage::unary_indices() const {
  std::vector<int> r;
  for (size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i].arity == 1) r.push_back(int(i));
  return r;
}

std::vector<int> RelLanguage::binary_indices() const {
  std::vector<int> r;
  for (size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i].arity == 2) r.push_back(int(i));
  return r;
}

void RelLanguage::validate() const {
  std::set<std::string> names;
  for (auto& s : symbols) {
    if (!names.insert(s.name).second) throw Error("duplicate symbol name: " + s.name);
    if (s.arity < 1 || s.arity > 4) throw Error("unsupported arity for " + s.name);
    unsigned order2 = SymFlag::LinearOrder | SymFlag::Equivalence;
    if ((s.flags & (order2 | unsigned(SymFlag::Convex))) && s.arity != 2)
      throw Error("order/equivalence/convex flags require arity 2: " + s.name);
    if (s.has(SymFlag::Convex)) {
      if (s.convex_ref < 0 || s.convex_ref >= int(symbols.size()) ||
          !symbols[s.convex_ref].has(SymFlag::LinearOrder))
        throw Error("convex flag must reference a linear-order symbol: " + s.name);
    }
  }
}

bool RelLanguage::operator==(const RelLanguage& o) const {
  if (symbols.size() != o.symbols.size()) return false;
  for (size_t i = 0; i < symbols.size(); ++i) {
    const auto &a = symbols[i], &b = o.symbols[i];
    if (a.name != b.name || a.arity != b.arity || a.flags != b.flags || a.convex_ref != b.convex_ref)
      return false;
  }
  return true;
}

std::string RelLanguage::print() const {
  std::ostringstream os;
  os << "language { ";
  for (auto& s : symbols) {
    os << "rel " << s.name << " : " << s.arity;
    std::vector<std::string> fl;
    if (s.has(SymFlag::Symmetric)) fl.push_back("symmetric");
    if (s.has(SymFlag::Irreflexive)) fl.push_back("irreflexive");
    if (s.has(SymFlag::LinearOrder)) fl.push_back("linear-order");
    if (s.has(SymFlag::Equivalence)) fl.push_back("equivalence");
    if (s.has(SymFlag::Convex)) fl.push_back("convex:" + symbols[s.convex_ref].name);
    if (!fl.empty()) {
      os << " [";
      for (size_t i = 0; i < fl.size(); ++i) os << (i ? ", " : "") << fl[i];
      os << "]";
    }
    os << "; ";
  }
  os << "}";
  return os.str();
}

LanguagePtr intern_language(RelLanguage lang) {
  lang.validate();
  static std::mutex mu;
  static std::vector<std::shared_ptr<const RelLanguage>> pool;
  std::lock_guard<std::mutex> lock(mu);
  for (auto& p : pool)
    if (*p == lang) return p;
  pool.push_back(std::make_shared<const RelLanguage>(std::move(lang)));
  return pool.back();
}

FinStructure::FinStructure(LanguagePtr l, int size) : lang(std::move(l)), n(size) {
  for (auto& s : lang->symbols) {
    if (s.arity == 1) un.emplace_back(n, 0);
    else if (s.arity == 2) bin.emplace_back(size_t(n) * n, 0);
    else hi.emplace_back();
  }
}

int FinStructure::sym_slot(int sym) const {
  int slot = 0;
  int ar = lang->symbols[sym].arity;
  for (int i = 0; i < sym; ++i) {
    int a = lang->symbols[i].arity;
    if (ar == 1 && a == 1) ++slot;
    else if (ar == 2 && a == 2) ++slot;
    else if (ar >= 3 && a >= 3) ++slot;
  }
  return slot;
}

bool FinStructure::holds1(int sym, int a) const { return un[sym_slot(sym)][a]; }
bool FinStructure::holds2(int sym, int a, int b) const { return bin[sym_slot(sym)][size_t(a) * n + b]; }

bool FinStructure::holds(int sym, const std::vector<int>& t) const {
  int ar = lang->symbols[sym].arity;
  if (ar == 1) return holds1(sym, t[0]);
  if (ar == 2) return holds2(sym, t[0], t[1]);
  const auto& tt = hi[sym_slot(sym)];
  return std::binary_search(tt.begin(), tt.end(), t);
}

void FinStructure::set1(int sym, int a, bool v) { un[sym_slot(sym)][a] = v; }
void FinStructure::set2(int sym, int a, int b, bool v) {
  bin[sym_slot(sym)][size_t(a) * n + b] = v;
  if (lang->symbols[sym].has(SymFlag::Symmetric)) bin[sym_slot(sym)][size_t(b) * n + a] = v;
}

void FinStructure::set(int sym, const std::vector<int>& t, bool v) {
  int ar = lang->symbols[sym].arity;
  if (ar == 1) { set1(sym, t[0], v); return; }
  if (ar == 2) { set2(sym, t[0], t[1], v); return; }
  auto& tt = hi[sym_slot(sym)];
  if (lang->symbols[sym].has(SymFlag::Symmetric)) {
    // store all permutations of the tuple
    std::vector<int> p = t;
    std::sort(p.begin(), p.end());
    do {
      auto it = std::lower_bound(tt.begin(), tt.end(), p);
      bool present = it != tt.end() && *it == p;
      if (v && !present) tt.insert(it, p);
      if (!v && present) tt.erase(it);
    } while (std::next_permutation(p.begin(), p.end()));
  } else {
    auto it = std::lower_bound(tt.begin(), tt.end(), t);
    bool present = it != tt.end() && *it == t;
    if (v && !present) tt.insert(it, t);
    if (!v && present) tt.erase(it);
  }
}

int FinStructure::paircode(int sym, int a, int b) const {
  return (holds2(sym, a, b) ? 2 : 0) | (holds2(sym, b, a) ? 1 : 0);
}

std::vector<uint8_t> FinStructure::pairvec(int a, int b) const {
  std::vector<uint8_t> v;
  for (size_t s = 0; s < lang->symbols.size(); ++s)
    if (lang->symbols[s].arity == 2) v.push_back(uint8_t(paircode(int(s), a, b)));
  return v;
}

int FinStructure::unary_color(int v) const {
  auto us = lang->unary_indices();
  if (us.empty()) return -1;
  int color = 0;
  bool any = false;
  for (size_t k = 0; k < us.size(); ++k)
    if (holds1(us[k], v)) { color |= 1 << k; any = true; }
  return any ? color : -2;
}

FinStructure FinStructure::induced(const std::vector<int>& verts) const {
  FinStructure r(lang, int(verts.size()));
  int m = int(verts.size());
  for (size_t s = 0; s < lang->symbols.size(); ++s) {
    int ar = lang->symbols[s].arity;
    if (ar == 1) {
      for (int i = 0; i < m; ++i)
        if (holds1(int(s), verts[i])) r.set1(int(s), i);
    } else if (ar == 2) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if (holds2(int(s), verts[i], verts[j])) r.bin[r.sym_slot(int(s))][size_t(i) * m + j] = 1;
    } else {
      std::vector<int> inv(n, -1);
      for (int i = 0; i < m; ++i) inv[verts[i]] = i;
      for (const auto& t : hi[sym_slot(int(s))]) {
        std::vector<int> u(t.size());
        bool ok = true;
        for (size_t k = 0; k < t.size(); ++k) {
          u[k] = inv[t[k]];
          if (u[k] < 0) { ok = false; break; }
        }
        if (ok) {
          auto& tt = r.hi[r.sym_slot(int(s))];
          auto it = std::lower_bound(tt.begin(), tt.end(), u);
          if (it == tt.end() || *it != u) tt.insert(it, u);
        }
      }
    }
  }
  return r;
}

FinStructure FinStructure::relabeled(const std::vector<int>& perm) const {
  FinStructure r(lang, n);
  for (size_t s = 0; s < lang->symbols.size(); ++s) {
    int ar = lang->symbols[s].arity;
    if (ar == 1) {
      for (int i = 0; i < n; ++i)
        if (holds1(int(s), i)) r.set1(int(s), perm[i]);
    } else if (ar == 2) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (holds2(int(s), i, j)) r.bin[r.sym_slot(int(s))][size_t(perm[i]) * n + perm[j]] = 1;
    } else {
      for (const auto& t : hi[sym_slot(int(s))]) {
        std::vector<int> u(t.size());
        for (size_t k = 0; k < t.size(); ++k) u[k] = perm[t[k]];
        auto& tt = r.hi[r.sym_slot(int(s))];
        auto it = std::lower_bound(tt.begin(), tt.end(), u);
        if (it == tt.end() || *it != u) tt.insert(it, u);
      }
    }
  }
  return r;
}

FinStructure FinStructure::extended() const {
  FinStructure r(lang, n + 1);
  for (size_t s = 0; s < lang->symbols.size(); ++s) {
    int ar = lang->symbols[s].arity;
    if (ar == 1) {
      for (int i = 0; i < n; ++i)
        if (holds1(int(s), i)) r.set1(int(s), i);
    } else if (ar == 2) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (holds2(int(s), i, j)) r.bin[r.sym_slot(int(s))][size_t(i) * (n + 1) + j] = 1;
    } else {
      r.hi[r.sym_slot(int(s))] = hi[sym_slot(int(s))];
    }
  }
  return r;
}

namespace {

bool equivalence_ok(const FinStructure& a, int sym) {
  for (int i = 0; i < a.n; ++i)
    if (!a.holds2(sym, i, i)) return false;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) {
      if (a.holds2(sym, i, j) != a.holds2(sym, j, i)) return false;
      if (!a.holds2(sym, i, j)) continue;
      for (int k = 0; k < a.n; ++k)
        if (a.holds2(sym, j, k) && !a.holds2(sym, i, k)) return false;
    }
  return true;
}

bool linear_order_ok(const FinStructure& a, int sym) {
  for (int i = 0; i < a.n; ++i) {
    if (a.holds2(sym, i, i)) return false;
    for (int j = i + 1; j < a.n; ++j)
      if (a.holds2(sym, i, j) == a.holds2(sym, j, i)) return false;
  }
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      if (a.holds2(sym, i, j))
        for (int k = 0; k < a.n; ++k)
          if (a.holds2(sym, j, k) && !a.holds2(sym, i, k)) return false;
  return true;
}

// every class is an interval of the referenced order
bool convex_ok(const FinStructure& a, int sym, int ord) {
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) {
      if (!a.holds2(sym, i, j)) continue;
      for (int k = 0; k < a.n; ++k)
        if (a.holds2(ord, i, k) && a.holds2(ord, k, j) && !a.holds2(sym, i, k)) return false;
    }
  return true;
}

}  // namespace

void FinStructure::check_flags() const {
  for (size_t s = 0; s < lang->symbols.size(); ++s) {
    const auto& sym = lang->symbols[s];
    if (sym.arity == 2) {
      if (sym.has(SymFlag::Irreflexive))
        for (int i = 0; i < n; ++i)
          if (holds2(int(s), i, i)) throw Error(sym.name + ": irreflexive violated");
      if (sym.has(SymFlag::Symmetric))
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (holds2(int(s), i, j) != holds2(int(s), j, i))
              throw Error(sym.name + ": symmetric violated");
      if (sym.has(SymFlag::LinearOrder) && !linear_order_ok(*this, int(s)))
        throw Error(sym.name + ": not a strict total order");
      if (sym.has(SymFlag::Equivalence) && !equivalence_ok(*this, int(s)))
        throw Error(sym.name + ": not an equivalence");
      if (sym.has(SymFlag::Convex) && !convex_ok(*this, int(s), sym.convex_ref))
        throw Error(sym.name + ": classes not convex");
    } else if (sym.arity >= 3 && sym.has(SymFlag::Irreflexive)) {
      for (const auto& t : hi[sym_slot(int(s))]) {
        std::set<int> d(t.begin(), t.end());
        if (d.size() != t.size()) throw Error(sym.name + ": irreflexive violated");
      }
    }
  }
}

bool FinStructure::flags_ok() const noexcept {
  try {
    check_flags();
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::vector<uint8_t> FinStructure::code() const {
  std::vector<uint8_t> out;
  out.push_back(uint8_t(n));
  for (auto& u : un) out.insert(out.end(), u.begin(), u.end());
  for (auto& b : bin) out.insert(out.end(), b.begin(), b.end());
  for (auto& tt : hi) {
    out.push_back(0xfe);
    for (auto& t : tt) {
      out.push_back(0xff);
      for (int x : t) out.push_back(uint8_t(x));
    }
  }
  return out;
}

// ---- isomorphism -----------------------------------------------------------

namespace {

// cheap invariant per vertex used to prune the permutation search
std::vector<uint64_t> vertex_profile(const FinStructure& a) {
  std::vector<uint64_t> prof(a.n, 0);
  for (int v = 0; v < a.n; ++v) {
    uint64_t h = 1469598103934665603ULL;
    for (size_t s = 0; s < a.lang->symbols.size(); ++s) {
      int ar = a.lang->symbols[s].arity;
      if (ar == 1) {
        h = h * 1099511628211ULL + (a.holds1(int(s), v) ? 3 : 7);
      } else if (ar == 2) {
        int out = 0, in = 0, both = 0;
        for (int w = 0; w < a.n; ++w) {
          if (w == v) continue;
          bool o = a.holds2(int(s), v, w), i = a.holds2(int(s), w, v);
          out += o;
          in += i;
          both += o && i;
        }
        h = h * 1099511628211ULL + uint64_t(out * 131071 + in * 257 + both);
      } else {
        int deg = 0;
        for (const auto& t : a.hi[a.sym_slot(int(s))]) deg += std::count(t.begin(), t.end(), v);
        h = h * 1099511628211ULL + uint64_t(deg);
      }
    }
    prof[v] = h;
  }
  return prof;
}

bool partial_ok(const FinStructure& a, const FinStructure& b, const std::vector<int>& map, int k) {
  // vertex k of a was just mapped; verify all tuples within {0..k}
  for (size_t s = 0; s < a.lang->symbols.size(); ++s) {
    int ar = a.lang->symbols[s].arity;
    if (ar == 1) {
      if (a.holds1(int(s), k) != b.holds1(int(s), map[k])) return false;
    } else if (ar == 2) {
      for (int j = 0; j <= k; ++j) {
        if (a.holds2(int(s), k, j) != b.holds2(int(s), map[k], map[j])) return false;
        if (a.holds2(int(s), j, k) != b.holds2(int(s), map[j], map[k])) return false;
      }
    } else {
      // arity 3/4: check tuples fully inside the mapped prefix touching k
      std::vector<int> idx(k + 1);
      std::iota(idx.begin(), idx.end(), 0);
      std::vector<int> t(ar), u(ar);
      // enumerate tuples over {0..k} containing k (distinct entries assumed by use)
      std::vector<int> stack(ar, 0);
      // simple odometer
      size_t total = 1;
      for (int q = 0; q < ar; ++q) total *= size_t(k + 1);
      for (size_t code = 0; code < total; ++code) {
        size_t c = code;
        bool touches = false;
        for (int q = 0; q < ar; ++q) {
          t[q] = int(c % size_t(k + 1));
          c /= size_t(k + 1);
          touches |= t[q] == k;
        }
        if (!touches) continue;
        for (int q = 0; q < ar; ++q) u[q] = map[t[q]];
        if (a.holds(int(s), t) != b.holds(int(s), u)) return false;
      }
    }
  }
  return true;
}

bool iso_search(const FinStructure& a, const FinStructure& b, const std::vector<uint64_t>& pa,
                const std::vector<uint64_t>& pb, std::vector<int>& map, std::vector<char>& used, int k) {
  if (k == a.n) return true;
  for (int w = 0; w < b.n; ++w) {
    if (used[w] || pa[k] != pb[w]) continue;
    map[k] = w;
    used[w] = 1;
    if (partial_ok(a, b, map, k) && iso_search(a, b, pa, pb, map, used, k + 1)) return true;
    used[w] = 0;
  }
  return false;
}

}  // namespace

bool iso_check(const FinStructure& a, const FinStructure& b) {
  if (!(a.lang == b.lang || *a.lang == *b.lang)) throw LanguageMismatch("iso_check: language mismatch");
  if (a.n != b.n) return false;
  auto pa = vertex_profile(a), pb = vertex_profile(b);
  auto sa = pa, sb = pb;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb) return false;
  std::vector<int> map(a.n, -1);
  std::vector<char> used(a.n, 0);
  return iso_search(a, b, pa, pb, map, used, 0);
}

namespace {

void emb_search(const FinStructure& a, const FinStructure& b, std::vector<int>& map,
                std::vector<char>& used, int k, std::vector<std::vector<int>>& out) {
  if (k == a.n) {
    out.push_back(map);
    return;
  }
  for (int w = 0; w < b.n; ++w) {
    if (used[w]) continue;
    map[k] = w;
    used[w] = 1;
    if (partial_ok(a, b, map, k)) emb_search(a, b, map, used, k + 1, out);
    used[w] = 0;
  }
}

}  // namespace

std::vector<std::vector<int>> embeddings(const FinStructure& a, const FinStructure& b) {
  if (!(a.lang == b.lang || *a.lang == *b.lang)) throw LanguageMismatch("embeddings: language mismatch");
  std::vector<std::vector<int>> out;
  std::vector<int> map(a.n, -1);
  std::vector<char> used(b.n, 0);
  emb_search(a, b, map, used, 0, out);
  return out;
}

long aut_order(const FinStructure& a) {
  if (a.n == 0) return 1;
  return long(embeddings(a, a).size());
}

std::vector<uint8_t> canonical_code(const FinStructure& a) {
  if (a.n > 8) throw Error("canonical_code: size cap is 8");
  std::vector<int> perm(a.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<uint8_t> best;
  do {
    auto c = a.relabeled(perm).code();
    if (best.empty() || c < best) best = c;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<OrderedCopy> ordered_copies(const FinStructure& a) {
  if (a.n > 6) throw Error("ordered_copies: size cap is 6");
  std::vector<int> perm(a.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::set<std::vector<uint8_t>> seen;
  std::vector<OrderedCopy> out;
  std::vector<int> enumeration(a.n);
  do {
    // perm places vertex i at position perm[i]; enumeration is its inverse
    auto r = a.relabeled(perm);
    auto c = r.code();
    if (seen.insert(c).second) {
      for (int i = 0; i < a.n; ++i) enumeration[perm[i]] = i;
      out.push_back(OrderedCopy{a, enumeration, r});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(out.begin(), out.end());
  return out;
}

// ---- JSON ------------------------------------------------------------------

std::string structure_to_json(const FinStructure& a) {
  nlohmann::ordered_json j;
  auto& langj = j["lang"];
  langj = nlohmann::ordered_json::array();
  for (auto& s : a.lang->symbols) {
    nlohmann::ordered_json sj;
    sj["name"] = s.name;
    sj["arity"] = s.arity;
    std::vector<std::string> fl;
    if (s.has(SymFlag::Symmetric)) fl.push_back("symmetric");
    if (s.has(SymFlag::Irreflexive)) fl.push_back("irreflexive");
    if (s.has(SymFlag::LinearOrder)) fl.push_back("linear-order");
    if (s.has(SymFlag::Equivalence)) fl.push_back("equivalence");
    if (s.has(SymFlag::Convex)) fl.push_back("convex:" + a.lang->symbols[s.convex_ref].name);
    sj["flags"] = fl;
    langj.push_back(sj);
  }
  j["n"] = a.n;
  auto& rels = j["rels"];
  for (size_t s = 0; s < a.lang->symbols.size(); ++s) {
    const auto& sym = a.lang->symbols[s];
    auto arr = nlohmann::ordered_json::array();
    if (sym.arity == 1) {
      for (int i = 0; i < a.n; ++i)
        if (a.holds1(int(s), i)) arr.push_back(nlohmann::ordered_json::array({i}));
    } else if (sym.arity == 2) {
      for (int i = 0; i < a.n; ++i)
        for (int j2 = 0; j2 < a.n; ++j2)
          if (a.holds2(int(s), i, j2)) arr.push_back(nlohmann::ordered_json::array({i, j2}));
    } else {
      for (const auto& t : a.hi[a.sym_slot(int(s))]) arr.push_back(t);
    }
    rels[sym.name] = arr;
  }
  return j.dump();
}

FinStructure structure_from_json(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text);
  RelLanguage lang;
  for (auto& sj : j.at("lang")) {
    RelSymbol s;
    s.name = sj.at("name").get<std::string>();
    s.arity = sj.at("arity").get<int>();
    for (auto& f : sj.at("flags")) {
      std::string fs = f.get<std::string>();
      if (fs == "symmetric") s.flags |= unsigned(SymFlag::Symmetric);
      else if (fs == "irreflexive") s.flags |= unsigned(SymFlag::Irreflexive);
      else if (fs == "linear-order") s.flags |= unsigned(SymFlag::LinearOrder);
      else if (fs == "equivalence") s.flags |= unsigned(SymFlag::Equivalence);
      else if (fs.rfind("convex:", 0) == 0) s.flags |= unsigned(SymFlag::Convex);
      else throw Error("unknown flag in JSON: " + fs);
    }
    lang.symbols.push_back(s);
  }
  // second pass for convex references (names known now)
  size_t k = 0;
  for (auto& sj : j.at("lang")) {
    for (auto& f : sj.at("flags")) {
      std::string fs = f.get<std::string>();
      if (fs.rfind("convex:", 0) == 0) lang.symbols[k].convex_ref = lang.index_of(fs.substr(7));
    }
    ++k;
  }
  FinStructure a(intern_language(std::move(lang)), j.at("n").get<int>());
  for (auto it = j.at("rels").begin(); it != j.at("rels").end(); ++it) {
    int sym = a.lang->index_of(it.key());
    if (sym < 0) throw Error("unknown symbol in JSON rels: " + it.key());
    for (auto& t : it.value()) {
      std::vector<int> tup = t.get<std::vector<int>>();
      if (int(tup.size()) != a.lang->symbols[sym].arity) throw Error("tuple arity mismatch");
      if (a.lang->symbols[sym].arity == 2) a.bin[a.sym_slot(sym)][size_t(tup[0]) * a.n + tup[1]] = 1;
      else a.set(sym, tup);
    }
  }
  return a;
}

}  // namespace brd
