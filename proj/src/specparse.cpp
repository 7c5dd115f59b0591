#include "brd/specparse.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace brd {

const FinStructure* SpecEnv::find_struct(const std::string& name) const {
  for (auto& [n, s] : structs)
    if (n == name) return &s;
  return nullptr;
}

ClassSpecPtr SpecEnv::find_class(const std::string& name) const {
  for (auto& [n, c] : classes)
    if (n == name) return c;
  return nullptr;
}

namespace {

struct Token {
  enum Kind { Ident, Int, Punct, End } kind;
  std::string text;
  long value = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  std::string file;
  size_t pos = 0;
  int line = 1, col = 1;

  Lexer(const SpecSource& s) : src(s.text), file(s.path.empty() ? "<spec>" : s.path) {}

  void advance(char c) {
    if (c == '\n') { ++line; col = 1; }
    else ++col;
    ++pos;
  }

  static bool ident_start(char c) { return std::isalpha(unsigned(c)) || c == '_' || c == '<'; }
  static bool ident_char(char c) {
    return std::isalnum(unsigned(c)) || c == '_' || c == '<' || c == '>' || c == '-';
  }

  Token next() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '#') {
        while (pos < src.size() && src[pos] != '\n') advance(src[pos]);
        continue;
      }
      if (std::isspace(unsigned(c))) { advance(c); continue; }
      break;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) { t.kind = Token::End; return t; }
    char c = src[pos];
    if (std::isdigit(unsigned(c))) {
      t.kind = Token::Int;
      while (pos < src.size() && std::isdigit(unsigned(src[pos]))) {
        t.text.push_back(src[pos]);
        advance(src[pos]);
      }
      t.value = std::stol(t.text);
      return t;
    }
    if (ident_start(c)) {
      t.kind = Token::Ident;
      while (pos < src.size() && ident_char(src[pos])) {
        t.text.push_back(src[pos]);
        advance(src[pos]);
      }
      return t;
    }
    t.kind = Token::Punct;
    t.text.push_back(c);
    advance(c);
    return t;
  }
};

struct Parser {
  Lexer lex;
  Token cur;
  SpecEnv env;

  explicit Parser(const SpecSource& s) : lex(s) { cur = lex.next(); }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(lex.file, cur.line, cur.col, msg); }

  void bump() { cur = lex.next(); }

  bool at_punct(const char* p) { return cur.kind == Token::Punct && cur.text == p; }
  bool at_ident(const char* w) { return cur.kind == Token::Ident && cur.text == w; }

  void expect_punct(const char* p) {
    if (!at_punct(p)) fail(std::string("expected '") + p + "', got '" + cur.text + "'");
    bump();
  }

  std::string expect_ident(const char* what) {
    if (cur.kind != Token::Ident) fail(std::string("expected ") + what);
    std::string s = cur.text;
    bump();
    return s;
  }

  long expect_int(const char* what) {
    if (cur.kind != Token::Int) fail(std::string("expected ") + what);
    long v = cur.value;
    bump();
    return v;
  }

  void parse() {
    while (cur.kind != Token::End) {
      if (at_ident("language")) parse_language();
      else if (at_ident("struct")) parse_struct();
      else if (at_ident("class")) parse_class();
      else fail("expected 'language', 'struct' or 'class'");
    }
    if (env.classes.empty()) fail("document defines no class");
  }

  void parse_language() {
    if (env.lang) fail("only one language block per document");
    bump();
    expect_punct("{");
    RelLanguage lang;
    std::vector<std::pair<int, std::string>> convex_fixups;
    while (!at_punct("}")) {
      if (!at_ident("rel")) fail("expected 'rel'");
      bump();
      RelSymbol sym;
      sym.name = expect_ident("symbol name");
      expect_punct(":");
      sym.arity = int(expect_int("arity"));
      if (sym.arity < 1 || sym.arity > 3) fail("arity must be 1, 2 or 3");
      if (at_punct("[")) {
        bump();
        while (true) {
          std::string f = expect_ident("flag");
          if (f == "symmetric") sym.flags |= unsigned(SymFlag::Symmetric);
          else if (f == "irreflexive") sym.flags |= unsigned(SymFlag::Irreflexive);
          else if (f == "linear-order") sym.flags |= unsigned(SymFlag::LinearOrder);
          else if (f == "equivalence") sym.flags |= unsigned(SymFlag::Equivalence) | unsigned(SymFlag::Symmetric);
          else if (f == "convex") {
            expect_punct(":");
            sym.flags |= unsigned(SymFlag::Convex);
            convex_fixups.emplace_back(int(lang.symbols.size()), expect_ident("order symbol name"));
          } else fail("unknown flag '" + f + "'");
          if (at_punct(",")) { bump(); continue; }
          break;
        }
        expect_punct("]");
      }
      expect_punct(";");
      lang.symbols.push_back(sym);
    }
    bump();
    for (auto& [k, nm] : convex_fixups) {
      int r = lang.index_of(nm);
      if (r < 0) fail("convex references unknown symbol '" + nm + "'");
      lang.symbols[k].convex_ref = r;
    }
    try {
      env.lang = intern_language(std::move(lang));
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  void parse_struct() {
    if (!env.lang) fail("struct before language block");
    bump();
    std::string name = expect_ident("struct name");
    if (env.find_struct(name)) fail("duplicate struct '" + name + "'");
    expect_punct("=");
    expect_punct("{");
    if (!at_ident("size")) fail("expected 'size'");
    bump();
    int n = int(expect_int("size"));
    expect_punct(";");
    FinStructure a(env.lang, n);
    while (!at_punct("}")) {
      std::string sname = expect_ident("symbol name");
      int sym = env.lang->index_of(sname);
      if (sym < 0) fail("unknown symbol '" + sname + "'");
      expect_punct(":");
      int ar = env.lang->symbols[sym].arity;
      while (at_punct("(")) {
        bump();
        std::vector<int> tup;
        while (true) {
          long v = expect_int("vertex");
          if (v < 0 || v >= n) fail("vertex out of range");
          tup.push_back(int(v));
          if (at_punct(",")) { bump(); continue; }
          break;
        }
        expect_punct(")");
        if (int(tup.size()) != ar) fail("tuple arity mismatch for '" + sname + "'");
        a.set(sym, tup);
      }
      expect_punct(";");
    }
    bump();
    // equivalences are reflexive; the DSL never writes the diagonal
    for (int s : env.lang->binary_indices())
      if (env.lang->symbols[s].has(SymFlag::Equivalence))
        for (int v = 0; v < n; ++v) a.set2(s, v, v);
    try {
      a.check_flags();
    } catch (const Error& e) {
      fail("struct '" + name + "': " + e.what());
    }
    env.structs.emplace_back(name, std::move(a));
  }

  FinStructure lookup_struct(const std::string& nm) {
    const FinStructure* s = env.find_struct(nm);
    if (!s) fail("unknown struct '" + nm + "'");
    return *s;
  }

  ClassSpecPtr lookup_class(const std::string& nm) {
    auto c = env.find_class(nm);
    if (!c) fail("unknown class '" + nm + "'");
    return c;
  }

  void parse_class() {
    bump();
    std::string name = expect_ident("class name");
    if (env.find_class(name)) fail("duplicate class '" + name + "'");
    expect_punct("=");
    ClassSpecPtr spec;
    try {
      if (at_ident("unrestricted")) spec = parse_unrestricted(name);
      else if (at_ident("forb")) spec = parse_forb(name);
      else if (at_ident("builtin")) spec = parse_builtin(name);
      else if (at_ident("superpose")) spec = parse_superpose(name);
      else if (at_ident("ordered")) spec = parse_ordered(name);
      else fail("expected a class expression");
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
    env.classes.emplace_back(name, std::move(spec));
  }

  ClassSpecPtr parse_unrestricted(const std::string& name) {
    if (!env.lang) fail("unrestricted class before language block");
    bump();
    expect_punct("{");
    std::map<int, std::vector<FinStructure>> reps;
    while (!at_punct("}")) {
      int arity;
      if (cur.kind == Token::Int) {
        arity = int(cur.value);
        bump();
      } else {
        std::string key = expect_ident("symbol or arity");
        int sym = env.lang->index_of(key);
        if (sym < 0) fail("unknown symbol '" + key + "'");
        arity = env.lang->symbols[sym].arity;
      }
      expect_punct(":");
      expect_punct("[");
      while (true) {
        reps[arity].push_back(lookup_struct(expect_ident("struct name")));
        if (at_punct(",")) { bump(); continue; }
        break;
      }
      expect_punct("]");
      if (at_punct(";")) bump();
    }
    bump();
    return make_unrestricted(env.lang, std::move(reps), name);
  }

  ClassSpecPtr parse_forb(const std::string& name) {
    bump();
    expect_punct("(");
    auto base = lookup_class(expect_ident("base class"));
    expect_punct(")");
    expect_punct("{");
    std::vector<FinStructure> forb;
    while (true) {
      forb.push_back(lookup_struct(expect_ident("struct name")));
      if (at_punct(",")) { bump(); continue; }
      break;
    }
    expect_punct("}");
    return make_forb(std::move(base), std::move(forb), name);
  }

  ClassSpecPtr parse_builtin(const std::string& name) {
    bump();
    std::string kind = expect_ident("builtin kind");
    auto num = [&]() { return int(expect_int("builtin argument")); };
    ClassSpecPtr spec;
    if (kind == "LO") spec = make_builtin(BuiltinKind::LO_n, num(), 0, 0, name);
    else if (kind == "P") spec = make_builtin(BuiltinKind::P_n, 0, num(), 0, name);
    else if (kind == "COE") {
      int n = num(), p = num();
      spec = make_builtin(BuiltinKind::COE_np, 0, n, p, name);
    } else if (kind == "LOE") {
      int m = num(), n = num(), p = num();
      spec = make_builtin(BuiltinKind::LOE_mnp, m, n, p, name);
    } else fail("unknown builtin kind '" + kind + "'");
    if (env.lang && !(*env.lang == *spec->lang))
      fail("builtin language does not match the document language");
    return spec;
  }

  ClassSpecPtr parse_superpose(const std::string& name) {
    bump();
    expect_punct("(");
    std::vector<ClassSpecPtr> parts;
    while (true) {
      parts.push_back(lookup_class(expect_ident("class name")));
      if (at_punct(",")) { bump(); continue; }
      break;
    }
    expect_punct(")");
    return make_superpose(std::move(parts), name);
  }

  ClassSpecPtr parse_ordered(const std::string& name) {
    bump();
    expect_punct("(");
    auto base = lookup_class(expect_ident("class name"));
    expect_punct(")");
    return make_ordered_expansion(std::move(base), name);
  }
};

}  // namespace

SpecEnv parse_document(const SpecSource& src) {
  Parser p(src);
  p.parse();
  return std::move(p.env);
}

ClassSpecPtr parse_spec(const SpecSource& src) {
  auto env = parse_document(src);
  return env.classes.back().second;
}

const std::map<std::string, std::string>& preset_sources() {
  static const std::string graphs_doc = R"(# generic graphs (Rado) and the triangle-free restriction
language { rel E : 2 [symmetric, irreflexive]; }
struct vertex = { size 1; }
struct edge = { size 2; E: (0,1); }
struct nonedge = { size 2; }
struct path3 = { size 3; E: (0,1) (1,2); }
struct K3 = { size 3; E: (0,1) (0,2) (1,2); }
struct empty3 = { size 3; }
struct oneedge3 = { size 3; E: (0,1); }
class graphs = unrestricted { E: [edge, nonedge] }
)";
  static const std::map<std::string, std::string> presets = {
      {"graphs", graphs_doc},
      {"rado", graphs_doc},
      {"t3free", graphs_doc + "class t3free = forb(graphs) { K3 }\n"},
      {"digraphs", R"(language { rel A : 2 [irreflexive]; }
struct vertex = { size 1; }
struct arc = { size 2; A: (0,1); }
struct noarc = { size 2; }
class digraphs = unrestricted { A: [arc, noarc] }
)"},
      {"tournaments", R"(language { rel T : 2 [irreflexive]; }
struct vertex = { size 1; }
struct arc = { size 2; T: (0,1); }
struct cycle3 = { size 3; T: (0,1) (1,2) (2,0); }
class tournaments = unrestricted { T: [arc] }
)"},
      {"hyper3", R"(language { rel H : 3 [symmetric, irreflexive]; }
struct vertex = { size 1; }
struct triple = { size 3; H: (0,1,2); }
struct notriple = { size 3; }
class hyper3 = unrestricted { H: [triple, notriple] }
)"},
      {"pyramidfree", R"(language { rel H : 3 [symmetric, irreflexive]; }
struct vertex = { size 1; }
struct triple = { size 3; H: (0,1,2); }
struct notriple = { size 3; }
struct pyramid = { size 4; H: (0,1,2) (0,1,3) (0,2,3); }
class hyper3 = unrestricted { H: [triple, notriple] }
class pyramidfree = forb(hyper3) { pyramid }
)"},
      {"bipartite", R"(language { rel E : 2 [symmetric, irreflexive]; rel P1 : 1; rel P2 : 1; }
struct v1 = { size 1; P1: (0); }
struct v2 = { size 1; P2: (0); }
struct edge = { size 2; E: (0,1); }
struct nonedge = { size 2; }
struct crossedge = { size 2; E: (0,1); P1: (0); P2: (1); }
class base = unrestricted { 1: [v1, v2]; E: [edge, nonedge] }
struct bad1 = { size 2; E: (0,1); P1: (0) (1); }
struct bad2 = { size 2; E: (0,1); P2: (0) (1); }
class bipartite = forb(base) { bad1, bad2 }
)"},
      {"q", R"(language { rel < : 2 [linear-order, irreflexive]; }
struct chain1 = { size 1; }
struct chain2 = { size 2; <: (0,1); }
struct chain3 = { size 3; <: (0,1) (0,2) (1,2); }
struct chain4 = { size 4; <: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3); }
struct vertex = { size 1; }
class q = builtin LO 1
)"},
      {"q2", R"(language { rel < : 2 [linear-order, irreflexive]; rel P1 : 1; rel P2 : 1; }
struct vertex = { size 1; }
struct v1 = { size 1; P1: (0); }
struct v2 = { size 1; P2: (0); }
struct pair12 = { size 2; <: (0,1); P1: (0); P2: (1); }
class q2 = builtin P 2
)"},
      {"qq", R"(language { rel < : 2 [linear-order, irreflexive]; rel E0 : 2 [equivalence, convex:<]; }
struct vertex = { size 1; }
struct eqpair = { size 2; <: (0,1); E0: (0,1); }
struct neqpair = { size 2; <: (0,1); }
struct chain1 = { size 1; }
class qq = builtin COE 1 0
)"},
      {"qq2", R"(language { rel < : 2 [linear-order, irreflexive]; rel E0 : 2 [equivalence, convex:<]; rel E1 : 2 [equivalence, convex:<]; }
struct vertex = { size 1; }
class qq2 = builtin COE 2 0
)"},
      {"lo2", R"(class lo2 = builtin LO 2
)"},
      {"orderedgraphs", R"(language { rel E : 2 [symmetric, irreflexive]; }
struct edge = { size 2; E: (0,1); }
struct nonedge = { size 2; }
class graphs = unrestricted { E: [edge, nonedge] }
class orderedgraphs = ordered(graphs)
)"},
  };
  return presets;
}

SpecEnv load_preset(const std::string& name) {
  auto& m = preset_sources();
  auto it = m.find(name);
  if (it == m.end()) throw Error("unknown preset '" + name + "'");
  return parse_document(SpecSource{it->second, "<preset:" + name + ">"});
}

SpecEnv load_spec_argument(const std::string& arg) {
  auto& m = preset_sources();
  if (m.count(arg)) return load_preset(arg);
  std::ifstream in(arg);
  if (!in) throw Error("no preset or file named '" + arg + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_document(SpecSource{ss.str(), arg});
}

}  // namespace brd
