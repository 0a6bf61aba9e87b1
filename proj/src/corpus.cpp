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

#include "surfgen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace surfgen {

namespace {

bool has_space(const std::string& s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

Token::Token(std::string t) : text(std::move(t)) {
  if (text.empty()) raise(Errc::InvalidArgument, "empty token");
  if (has_space(text)) raise(Errc::InvalidArgument, "token contains whitespace: '" + text + "'");
  kind = text[0] == '$' ? TokenKind::Attribute : TokenKind::Word;
}

std::string Template::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

Template parse_template_line(const std::string& line) {
  Template t;
  std::istringstream in(line);
  std::string piece;
  while (in >> piece) t.tokens.emplace_back(piece);
  if (t.tokens.empty()) raise(Errc::EmptyLine, "template line has no tokens");
  std::set<std::string> seen;
  for (const Token& tok : t.tokens) {
    if (tok.is_attribute() && !seen.insert(tok.text).second)
      raise(Errc::DuplicateAttribute, tok.text + " appears more than once");
  }
  return t;
}

AttributeSet extract_attribute_set(const Template& t) {
  AttributeSet a;
  for (const Token& tok : t.tokens)
    if (tok.is_attribute()) a.insert(tok.text);
  return a;
}

std::string fill_slots(const Template& t, const Bindings& b) {
  std::string out;
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    const Token& tok = t.tokens[i];
    if (i) out += ' ';
    if (tok.is_attribute()) {
      auto it = b.find(tok.text);
      if (it == b.end()) raise(Errc::MissingBinding, tok.text);
      out += it->second;
    } else {
      out += tok.text;
    }
  }
  return out;
}

namespace {

void linearize_node(const TreeNode& n, std::vector<Token>* out) {
  // Left children are stored closest-first, so the surface order is the
  // reverse of the stored order.
  for (auto it = n.left.rbegin(); it != n.left.rend(); ++it) linearize_node(*it, out);
  out->push_back(n.token);
  for (const TreeNode& c : n.right) linearize_node(c, out);
}

TreeNode build_node(int i, const std::vector<std::string>& tokens,
                    const std::vector<std::vector<int>>& left,
                    const std::vector<std::vector<int>>& right) {
  TreeNode n;
  n.token = Token(tokens[static_cast<std::size_t>(i)]);
  for (int c : left[static_cast<std::size_t>(i)]) n.left.push_back(build_node(c, tokens, left, right));
  for (int c : right[static_cast<std::size_t>(i)]) n.right.push_back(build_node(c, tokens, left, right));
  return n;
}

}  // namespace

DependencyTree parse_tree_record(const std::string& record) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(record);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::MalformedRecord, e.what());
  }
  if (!j.is_object() || !j.contains("tokens") || !j.contains("heads") ||
      !j["tokens"].is_array() || !j["heads"].is_array())
    raise(Errc::MalformedRecord, "record needs \"tokens\" and \"heads\" arrays");

  std::vector<std::string> tokens;
  std::vector<int> heads;
  for (const auto& v : j["tokens"]) {
    if (!v.is_string()) raise(Errc::MalformedRecord, "tokens must be strings");
    tokens.push_back(v.get<std::string>());
  }
  for (const auto& v : j["heads"]) {
    if (!v.is_number_integer()) raise(Errc::MalformedRecord, "heads must be integers");
    heads.push_back(v.get<int>());
  }
  const int n = static_cast<int>(tokens.size());
  if (n == 0) raise(Errc::MalformedRecord, "empty token list");
  if (static_cast<int>(heads.size()) != n)
    raise(Errc::IndexOutOfRange, "tokens and heads differ in length");

  int root = -1;
  for (int i = 0; i < n; ++i) {
    const int h = heads[static_cast<std::size_t>(i)];
    if (h == -1) {
      if (root != -1) raise(Errc::MultipleRoots, "more than one head of -1");
      root = i;
      continue;
    }
    if (h < 0 || h >= n) raise(Errc::IndexOutOfRange, "head index " + std::to_string(h));
    if (h == i) raise(Errc::Cycle, "token " + std::to_string(i) + " is its own head");
  }
  if (root == -1) raise(Errc::Cycle, "no root; every token has a parent");

  // Walking up from any token must reach the root in at most n steps.
  for (int i = 0; i < n; ++i) {
    int cur = i, steps = 0;
    while (cur != root) {
      cur = heads[static_cast<std::size_t>(cur)];
      if (++steps > n) raise(Errc::Cycle, "cycle reachable from token " + std::to_string(i));
    }
  }

  std::set<std::string> attrs;
  for (const std::string& t : tokens) {
    if (!t.empty() && t[0] == '$' && !attrs.insert(t).second)
      raise(Errc::DuplicateAttribute, t + " appears more than once");
  }

  // Children sorted by surface distance from the head: for left children the
  // closest one has the largest index, for right children the smallest.
  std::vector<std::vector<int>> left(static_cast<std::size_t>(n)), right(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int h = heads[static_cast<std::size_t>(i)];
    if (h == -1) continue;
    if (i < h)
      left[static_cast<std::size_t>(h)].push_back(i);
    else
      right[static_cast<std::size_t>(h)].push_back(i);
  }
  for (auto& v : left) std::sort(v.begin(), v.end(), std::greater<int>());
  for (auto& v : right) std::sort(v.begin(), v.end());

  DependencyTree tree{build_node(root, tokens, left, right)};

  // The in-order reading must reproduce the record; anything else means the
  // tree is not projective and has no faithful surface string.
  Template lin = linearize(tree);
  for (int i = 0; i < n; ++i) {
    if (lin.tokens[static_cast<std::size_t>(i)].text != tokens[static_cast<std::size_t>(i)])
      raise(Errc::NonProjective, "linearization does not reproduce token order");
  }
  return tree;
}

Template linearize(const DependencyTree& tree) {
  Template t;
  linearize_node(tree.root, &t.tokens);
  return t;
}

std::string tree_to_record(const DependencyTree& tree) {
  // A left child's parent position is not known when the child is emitted, so
  // each node records -1 first and patches its children afterwards.
  std::vector<std::string> tokens;
  std::vector<int> heads;
  std::function<int(const TreeNode&)> emit = [&](const TreeNode& n) {
    std::vector<int> kids;
    for (auto it = n.left.rbegin(); it != n.left.rend(); ++it) kids.push_back(emit(*it));
    const int self = static_cast<int>(tokens.size());
    tokens.push_back(n.token.text);
    heads.push_back(-1);
    for (const TreeNode& c : n.right) kids.push_back(emit(c));
    for (int k : kids) heads[static_cast<std::size_t>(k)] = self;
    return self;
  };
  emit(tree.root);

  nlohmann::json j;
  j["tokens"] = tokens;
  j["heads"] = heads;
  return j.dump();
}

AttributeSet tree_attribute_set(const DependencyTree& tree) {
  return extract_attribute_set(linearize(tree));
}

std::string canonical_attrs(const AttributeSet& a) {
  std::string out;
  for (const std::string& s : a) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

AttributeSet parse_canonical_attrs(const std::string& s) {
  AttributeSet a;
  std::istringstream in(s);
  std::string piece;
  while (in >> piece) a.insert(piece);
  return a;
}

std::vector<Template> read_template_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot open " + path);
  std::vector<Template> corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    try {
      corpus.push_back(parse_template_line(line));
    } catch (const Error& e) {
      raise(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

void write_template_corpus(const std::vector<Template>& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::IoError, "cannot write " + path);
  for (const Template& t : corpus) out << t.text() << '\n';
}

std::vector<DependencyTree> read_treebank(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot open " + path);
  std::vector<DependencyTree> bank;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    try {
      bank.push_back(parse_tree_record(line));
    } catch (const Error& e) {
      raise(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return bank;
}

void write_treebank(const std::vector<DependencyTree>& treebank, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::IoError, "cannot write " + path);
  for (const DependencyTree& t : treebank) out << tree_to_record(t) << '\n';
}

Bindings read_bindings(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot open " + path);
  Bindings b;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      raise(Errc::BadFormat, path + ":" + std::to_string(lineno) + ": expected attr<TAB>value");
    std::string attr = line.substr(0, tab);
    std::string value = line.substr(tab + 1);
    if (attr.empty() || attr[0] != '$')
      raise(Errc::BadFormat, path + ":" + std::to_string(lineno) + ": attribute must start with '$'");
    if (value.empty())
      raise(Errc::BadFormat, path + ":" + std::to_string(lineno) + ": empty value");
    b[attr] = value;
  }
  return b;
}

}  // namespace surfgen
