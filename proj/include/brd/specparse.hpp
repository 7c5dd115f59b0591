#pragma once

#include <map>
#include <string>
#include <vector>

#include "brd/classspec.hpp"

namespace brd {

struct SpecSource {
  std::string text;
  std::string path;  // provenance, used in error messages
};

struct ParseError : Error {
  std::string file;
  int line, col;
  ParseError(std::string f, int l, int c, const std::string& msg)
      : Error(f + ":" + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        file(std::move(f)), line(l), col(c) {}
};

// Parsed document: named structures and classes over one declared language.
struct SpecEnv {
  LanguagePtr lang;  // null when the document only uses builtins
  std::vector<std::pair<std::string, FinStructure>> structs;
  std::vector<std::pair<std::string, ClassSpecPtr>> classes;

  const FinStructure* find_struct(const std::string& name) const;
  ClassSpecPtr find_class(const std::string& name) const;
};

SpecEnv parse_document(const SpecSource& src);

// Denotation of a document: the last class it defines.
ClassSpecPtr parse_spec(const SpecSource& src);

// Built-in catalogue presets (graphs, digraphs, tournaments, hyper3,
// pyramidfree, bipartite, t3free, q, q2, qq, ...). Each is a DSL document.
const std::map<std::string, std::string>& preset_sources();
SpecEnv load_preset(const std::string& name);

// Resolves a CLI spec argument: preset name or a path to a .fcls file.
SpecEnv load_spec_argument(const std::string& arg);

}  // namespace brd
