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

#include "surfgen/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "surfgen/errors.hpp"

namespace surfgen {

const char* rank_name(Rank r) {
  switch (r) {
    case Rank::Correct: return "Correct";
    case Rank::Ok: return "OK";
    case Rank::Bad: return "Bad";
    case Rank::NoOutput: return "NoOutput";
  }
  return "unknown";
}

std::optional<Rank> parse_rank(const std::string& s) {
  if (s == "Correct") return Rank::Correct;
  if (s == "OK") return Rank::Ok;
  if (s == "Bad") return Rank::Bad;
  if (s == "NoOutput") return Rank::NoOutput;
  return std::nullopt;
}

std::vector<std::pair<AttributeSet, std::uint32_t>> dedupe_attribute_sets(
    const std::vector<Template>& corpus) {
  std::map<AttributeSet, std::uint32_t> counts;
  for (const Template& t : corpus) ++counts[extract_attribute_set(t)];
  return {counts.begin(), counts.end()};
}

double error_reduction(double baseline_correct_pct, double system_correct_pct) {
  const double base_err = 100.0 - baseline_correct_pct;
  if (base_err <= 0.0) return 0.0;
  return (1.0 - (100.0 - system_correct_pct) / base_err) * 100.0;
}

ScoreReport score_report(const std::vector<Judgment>& judgments,
                         const std::vector<std::pair<AttributeSet, std::uint32_t>>& counts,
                         const std::string& baseline) {
  std::map<AttributeSet, std::uint32_t> weight;
  for (const auto& [attrs, c] : counts) weight[attrs] += c;

  // system -> attrs -> rank, rejecting repeats and unknown sets
  std::map<std::string, std::map<AttributeSet, Rank>> by_system;
  for (const Judgment& j : judgments) {
    if (!weight.count(j.attrs))
      raise(Errc::InvalidArgument,
            "judgment for an attribute set not in the corpus: " + canonical_attrs(j.attrs));
    auto [it, fresh] = by_system[j.system].emplace(j.attrs, j.rank);
    if (!fresh)
      raise(Errc::DuplicateJudgment,
            j.system + " judged twice for: " + canonical_attrs(j.attrs));
  }
  if (!by_system.count(baseline))
    raise(Errc::InvalidArgument, "no judgments for baseline system: " + baseline);

  std::uint64_t total_w = 0;
  for (const auto& [attrs, c] : weight) total_w += c;
  const std::size_t total_u = weight.size();
  if (total_u == 0) raise(Errc::InvalidArgument, "empty corpus");

  ScoreReport report;
  report.baseline = baseline;
  for (const auto& [system, ranks] : by_system) {
    SystemScore s;
    s.system = system;
    std::array<std::uint64_t, kRankCount> tally_w{};
    std::array<std::uint64_t, kRankCount> tally_u{};
    for (const auto& [attrs, c] : weight) {
      auto it = ranks.find(attrs);
      if (it == ranks.end())
        raise(Errc::MissingJudgment, system + " missing: " + canonical_attrs(attrs));
      const auto r = static_cast<std::size_t>(it->second);
      tally_w[r] += c;
      tally_u[r] += 1;
    }
    for (std::size_t r = 0; r < kRankCount; ++r) {
      s.weighted[r] = 100.0 * static_cast<double>(tally_w[r]) / static_cast<double>(total_w);
      s.unweighted[r] = 100.0 * static_cast<double>(tally_u[r]) / static_cast<double>(total_u);
    }
    report.systems.push_back(std::move(s));
  }

  double base_w = 0.0, base_u = 0.0;
  for (const SystemScore& s : report.systems) {
    if (s.system == baseline) {
      base_w = s.weighted[0];
      base_u = s.unweighted[0];
    }
  }
  for (SystemScore& s : report.systems) {
    s.weighted_error_reduction = error_reduction(base_w, s.weighted[0]);
    s.unweighted_error_reduction = error_reduction(base_u, s.unweighted[0]);
  }
  std::stable_sort(report.systems.begin(), report.systems.end(),
                   [&baseline](const SystemScore& a, const SystemScore& b) {
                     if ((a.system == baseline) != (b.system == baseline))
                       return a.system == baseline;
                     return a.system < b.system;
                   });
  return report;
}

namespace {

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

void render_table(std::ostringstream& out, const ScoreReport& report, bool weighted) {
  out << (weighted ? "Weighted" : "Unweighted") << '\n';
  std::size_t name_w = 6;
  for (const SystemScore& s : report.systems) name_w = std::max(name_w, s.system.size());
  const char* cols[] = {"% Correct", "% OK", "% Bad", "% No output", "% error reduction"};
  out << "  ";
  out.width(static_cast<std::streamsize>(name_w));
  out << std::left << "system" << std::right;
  for (const char* c : cols) {
    out << "  ";
    out.width(static_cast<std::streamsize>(std::string(c).size()));
    out << c;
  }
  out << '\n';
  for (const SystemScore& s : report.systems) {
    out << "  ";
    out.width(static_cast<std::streamsize>(name_w));
    out << std::left << s.system << std::right;
    const auto& pct = weighted ? s.weighted : s.unweighted;
    const double er = weighted ? s.weighted_error_reduction : s.unweighted_error_reduction;
    const std::string cells[] = {fmt1(pct[0]), fmt1(pct[1]), fmt1(pct[2]), fmt1(pct[3]),
                                 s.system == report.baseline ? std::string("-") : fmt1(er)};
    for (std::size_t i = 0; i < 5; ++i) {
      out << "  ";
      out.width(static_cast<std::streamsize>(std::string(cols[i]).size()));
      out << cells[i];
    }
    out << '\n';
  }
}

}  // namespace

std::string render_report(const ScoreReport& report) {
  std::ostringstream out;
  render_table(out, report, true);
  out << '\n';
  render_table(out, report, false);
  return out.str();
}

std::vector<Judgment> read_judgments(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot open " + path);
  std::vector<Judgment> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto where = path + ":" + std::to_string(lineno);
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      parts.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (parts.size() != 3)
      raise(Errc::BadFormat, where + ": expected system<TAB>attrs<TAB>rank");
    if (parts[0].empty()) raise(Errc::BadFormat, where + ": empty system name");
    Judgment j;
    j.system = parts[0];
    try {
      j.attrs = parse_canonical_attrs(parts[1]);
    } catch (const Error& e) {
      raise(e.code(), where + ": " + e.what());
    }
    const auto rank = parse_rank(parts[2]);
    if (!rank) raise(Errc::BadFormat, where + ": unknown rank " + parts[2]);
    j.rank = *rank;
    out.push_back(std::move(j));
  }
  return out;
}

void write_judgments(const std::vector<Judgment>& judgments, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::IoError, "cannot open " + path);
  for (const Judgment& j : judgments)
    out << j.system << '\t' << canonical_attrs(j.attrs) << '\t' << rank_name(j.rank) << '\n';
  if (!out.flush()) raise(Errc::IoError, "write failed: " + path);
}

// ---------------------------------------------------------------------------
// Synthetic grammar

SynthGrammar SynthGrammar::flights() {
  SynthGrammar g;
  g.head_ = "flights";
  auto one = [](std::vector<std::string> toks, std::vector<int> heads) {
    SynthFragment f;
    f.tokens = std::move(toks);
    f.heads = std::move(heads);
    return f;
  };
  g.attrs_ = {
      {"$trip", true, {one({"$trip"}, {-1})}},
      {"$time-dep", true, {one({"$time-dep"}, {-1})}},
      {"$city-fr", false, {one({"from", "$city-fr"}, {-1, 0}),
                           one({"leaving", "$city-fr"}, {-1, 0})}},
      {"$city-to", false, {one({"to", "$city-to"}, {-1, 0}),
                           one({"into", "$city-to"}, {-1, 0})}},
      {"$air", false, {one({"on", "$air"}, {-1, 0}),
                       one({"with", "$air"}, {-1, 0})}},
      {"$stops", false, {one({"with", "$stops"}, {-1, 0})}},
      {"$time-arr", false, {one({"arriving", "at", "$time-arr"}, {-1, 0, 1}),
                            one({"landing", "at", "$time-arr"}, {-1, 0, 1})}},
      {"$date-dep", false, {one({"on", "$date-dep"}, {-1, 0})}},
      {"$class", false, {one({"in", "$class"}, {-1, 0})}},
      {"$price", false, {one({"under", "$price"}, {-1, 0}),
                         one({"for", "under", "$price"}, {-1, 0, 1})}},
  };
  return g;
}

const SynthAttribute& SynthGrammar::attribute(const std::string& name) const {
  for (const SynthAttribute& a : attrs_) {
    if (a.name == name) return a;
  }
  raise(Errc::UnknownAttribute, name + " not in grammar");
}

namespace {

// present attributes in grammar surface order, validating the set
std::vector<const SynthAttribute*> present_in_order(const SynthGrammar& g,
                                                    const AttributeSet& attrs) {
  if (attrs.empty()) raise(Errc::EmptyAttributeSet, "nothing to express");
  for (const std::string& a : attrs) g.attribute(a);
  std::vector<const SynthAttribute*> present;
  for (const SynthAttribute& a : g.attributes()) {
    if (attrs.count(a.name)) present.push_back(&a);
  }
  return present;
}

TreeNode fragment_tree(const SynthFragment& f) {
  int root = -1;
  const int n = static_cast<int>(f.tokens.size());
  for (int i = 0; i < n; ++i) {
    if (f.heads[i] < 0) root = i;
  }
  std::function<TreeNode(int)> build = [&](int i) {
    TreeNode node;
    node.token = Token(f.tokens[static_cast<std::size_t>(i)]);
    for (int j = i - 1; j >= 0; --j) {
      if (f.heads[static_cast<std::size_t>(j)] == i) node.left.push_back(build(j));
    }
    for (int j = i + 1; j < n; ++j) {
      if (f.heads[static_cast<std::size_t>(j)] == i) node.right.push_back(build(j));
    }
    return node;
  };
  return build(root);
}

}  // namespace

std::vector<std::string> SynthGrammar::reference_templates(const AttributeSet& attrs) const {
  const auto present = present_in_order(*this, attrs);
  std::vector<std::size_t> pick(present.size(), 0);
  std::vector<std::string> out;
  while (true) {
    std::string text;
    auto append_fragment = [&text](const SynthFragment& f) {
      for (const std::string& t : f.tokens) {
        if (!text.empty()) text += ' ';
        text += t;
      }
    };
    for (std::size_t i = 0; i < present.size(); ++i) {
      if (present[i]->prefix) append_fragment(present[i]->variants[pick[i]]);
    }
    if (!text.empty()) text += ' ';
    text += head_;
    for (std::size_t i = 0; i < present.size(); ++i) {
      if (!present[i]->prefix) append_fragment(present[i]->variants[pick[i]]);
    }
    out.push_back(std::move(text));
    std::size_t k = present.size();
    while (k > 0 && ++pick[k - 1] == present[k - 1]->variants.size()) pick[--k] = 0;
    if (k == 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SynthGrammar::matches_reference(const AttributeSet& attrs, const std::string& text) const {
  const std::vector<std::string> refs = reference_templates(attrs);
  return std::binary_search(refs.begin(), refs.end(), text);
}

std::pair<Template, DependencyTree> SynthGrammar::realize(const AttributeSet& attrs,
                                                          std::mt19937_64& rng) const {
  const auto present = present_in_order(*this, attrs);
  // pick a phrasing per attribute: the first four times out of five
  std::vector<const SynthFragment*> frags;
  frags.reserve(present.size());
  for (const SynthAttribute* a : present) {
    std::size_t v = 0;
    if (a->variants.size() > 1) v = (rng() % 5 == 0) ? 1 : 0;
    frags.push_back(&a->variants[v]);
  }

  Template tmpl;
  DependencyTree tree;
  tree.root.token = Token(head_);
  std::vector<TreeNode> prefix_nodes;
  for (std::size_t i = 0; i < present.size(); ++i) {
    if (!present[i]->prefix) continue;
    for (const std::string& t : frags[i]->tokens) tmpl.tokens.emplace_back(t);
    prefix_nodes.push_back(fragment_tree(*frags[i]));
  }
  tmpl.tokens.emplace_back(head_);
  for (std::size_t i = 0; i < present.size(); ++i) {
    if (present[i]->prefix) continue;
    for (const std::string& t : frags[i]->tokens) tmpl.tokens.emplace_back(t);
    tree.root.right.push_back(fragment_tree(*frags[i]));
  }
  // left children are stored closest-first; the last prefix fragment sits
  // next to the head
  for (auto it = prefix_nodes.rbegin(); it != prefix_nodes.rend(); ++it)
    tree.root.left.push_back(std::move(*it));
  return {std::move(tmpl), std::move(tree)};
}

namespace {

std::uint32_t mask_of(const SynthGrammar& g, const AttributeSet& names) {
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < g.attributes().size(); ++i) {
    if (names.count(g.attributes()[i].name)) m |= 1u << i;
  }
  return m;
}

AttributeSet set_of(const SynthGrammar& g, std::uint32_t mask) {
  AttributeSet s;
  for (std::size_t i = 0; i < g.attributes().size(); ++i) {
    if (mask & (1u << i)) s.insert(g.attributes()[i].name);
  }
  return s;
}

}  // namespace

SynthCorpus synth_corpus(const SynthGrammar& grammar, std::uint64_t seed, std::uint32_t n) {
  if (n < 1) raise(Errc::InvalidArgument, "n must be >= 1");
  const std::size_t na = grammar.attributes().size();
  if (na < 8 || na > 20) raise(Errc::InvalidArgument, "grammar must have 8..20 attributes");
  std::mt19937_64 rng(seed);

  // requests always carry at least one postfix attribute, so every template
  // ends on a slot rather than trailing off after the head noun
  std::uint32_t prefix_mask = 0;
  for (std::size_t i = 0; i < na; ++i) {
    if (grammar.attributes()[i].prefix) prefix_mask |= 1u << i;
  }
  std::vector<std::uint32_t> masks;
  masks.reserve((1u << na) - 1);
  for (std::uint32_t m = 1; m < (1u << na); ++m) {
    if ((m & ~prefix_mask) != 0) masks.push_back(m);
  }
  for (std::size_t i = masks.size() - 1; i > 0; --i)
    std::swap(masks[i], masks[rng() % (i + 1)]);

  // hand-seeded heads of the frequent pool: the bread-and-butter requests
  const std::uint32_t m1 = mask_of(grammar, {"$city-fr", "$city-to"});
  const std::uint32_t m2 = mask_of(grammar, {"$time-dep", "$city-fr", "$city-to"});
  masks.erase(std::remove_if(masks.begin(), masks.end(),
                             [&](std::uint32_t m) { return m == m1 || m == m2; }),
              masks.end());

  std::vector<std::uint32_t> common = {m1, m2};
  std::size_t at = 0;
  while (common.size() < 40) common.push_back(masks[at++]);
  std::vector<std::uint32_t> rare(masks.begin() + static_cast<std::ptrdiff_t>(at),
                                  masks.begin() + static_cast<std::ptrdiff_t>(at + 40));
  at += 40;
  std::vector<std::uint32_t> novel(masks.begin() + static_cast<std::ptrdiff_t>(at),
                                   masks.begin() + static_cast<std::ptrdiff_t>(at + 50));

  // skewed frequencies over the common pool: integer weights ~ 1/(rank+1)
  std::vector<std::uint64_t> cum;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < common.size(); ++i) {
    total += 1000000 / (i + 1);
    cum.push_back(total);
  }
  auto draw_common = [&]() {
    const std::uint64_t x = rng() % total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), x);
    return common[static_cast<std::size_t>(it - cum.begin())];
  };
  auto draw_seen = [&]() {
    return rng() % 10 < 9 ? draw_common() : rare[rng() % rare.size()];
  };

  SynthCorpus out;
  out.train.reserve(n);
  out.treebank.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto [tmpl, tree] = grammar.realize(set_of(grammar, draw_seen()), rng);
    out.train.push_back(std::move(tmpl));
    out.treebank.push_back(std::move(tree));
  }
  const std::uint32_t n_test = n / 4;
  out.test.reserve(n_test);
  for (std::uint32_t i = 0; i < n_test; ++i) {
    const std::uint32_t mask = rng() % 4 == 0 ? novel[rng() % novel.size()] : draw_seen();
    out.test.push_back(grammar.realize(set_of(grammar, mask), rng).first);
  }
  return out;
}

}  // namespace surfgen
