// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SURFGEN_CORPUS_HPP_
#define SURFGEN_CORPUS_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "surfgen/errors.hpp"

namespace surfgen {

// A token is an attribute slot iff its text starts with '$' (e.g. "$city-to").
enum class TokenKind { Word, Attribute };

struct Token {
  std::string text;
  TokenKind kind = TokenKind::Word;

  Token() = default;
  explicit Token(std::string t);  // derives kind; rejects empty text and whitespace
  bool is_attribute() const { return kind == TokenKind::Attribute; }
};

inline bool operator==(const Token& a, const Token& b) { return a.text == b.text; }
inline bool operator!=(const Token& a, const Token& b) { return !(a == b); }

// Set of attribute names, each including the leading '$'.
using AttributeSet = std::set<std::string>;

// A phrase with attribute slots left unfilled, e.g. "flights from $city-fr".
struct Template {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  std::string text() const;  // tokens joined by single spaces
};

inline bool operator==(const Template& a, const Template& b) {
  return a.tokens == b.tokens;
}

// attribute name -> surface value ("$city-to" -> "New York City")
using Bindings = std::map<std::string, std::string>;

// Dependency tree node; children are kept closest-to-head first on each side.
struct TreeNode {
  Token token;
  std::vector<TreeNode> left;
  std::vector<TreeNode> right;
};

struct DependencyTree {
  TreeNode root;
};

// ---- template operations ---------------------------------------------------

// Splits a line on whitespace. Errors: EmptyLine, DuplicateAttribute.
Template parse_template_line(const std::string& line);

// The (deduplicated by construction) attribute slots of a template.
AttributeSet extract_attribute_set(const Template& t);

// Replaces each attribute token by its bound value; plain words pass through.
// Values may span several words. Error: MissingBinding (names the attribute).
std::string fill_slots(const Template& t, const Bindings& b);

// ---- dependency tree operations --------------------------------------------

// Parses one JSON record {"tokens": [...], "heads": [...]} where heads[i] is
// the parent index of token i and the unique root has head -1. A child index
// smaller than its head's index makes it a left child. Errors: MalformedRecord,
// IndexOutOfRange, MultipleRoots, Cycle, DuplicateAttribute, NonProjective.
DependencyTree parse_tree_record(const std::string& record);

// In-order surface string of the tree: left children outermost first, then the
// head, then right children innermost first, recursively.
Template linearize(const DependencyTree& tree);

// Inverse of parse_tree_record; emits a single JSON line.
std::string tree_to_record(const DependencyTree& tree);

AttributeSet tree_attribute_set(const DependencyTree& tree);

// ---- canonical forms and file I/O -------------------------------------------

// Sorted, space-joined attribute names; the canonical key for an attribute set.
std::string canonical_attrs(const AttributeSet& a);
AttributeSet parse_canonical_attrs(const std::string& s);

std::vector<Template> read_template_corpus(const std::string& path);
void write_template_corpus(const std::vector<Template>& corpus, const std::string& path);

std::vector<DependencyTree> read_treebank(const std::string& path);
void write_treebank(const std::vector<DependencyTree>& treebank, const std::string& path);

// One "$attr<TAB>value" pair per line; blank lines and '#' comments skipped.
Bindings read_bindings(const std::string& path);

}  // namespace surfgen

#endif  // SURFGEN_CORPUS_HPP_
