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

#include "surfgen/nlg3.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace surfgen {

namespace {

History child_history(const std::string& head, const std::vector<std::string>& side_children,
                      const std::string& parent, const char* dir,
                      const AttributeSet& remaining) {
  History h;
  h.add(kHead, head);
  const std::size_t n = side_children.size();
  h.add(kSib1, n >= 1 ? side_children[n - 1] : kBoundarySymbol);
  h.add(kSib2, n >= 2 ? side_children[n - 2] : kBoundarySymbol);
  h.add(kPar, parent);
  h.add(kDir, dir);
  for (const std::string& a : remaining) h.add(kAttr, a);
  return h;
}

using EmitFn = std::function<void(History, const std::string&)>;

void replay_node(const TreeNode& n, const std::string& parent, AttributeSet* remaining,
                 const EmitFn& emit) {
  std::vector<std::string> gen;
  for (const TreeNode& c : n.left) {
    emit(child_history(n.token.text, gen, parent, kLeft, *remaining), c.token.text);
    if (c.token.is_attribute()) remaining->erase(c.token.text);
    replay_node(c, n.token.text, remaining, emit);
    gen.push_back(c.token.text);
  }
  emit(child_history(n.token.text, gen, parent, kLeft, *remaining), kStopSymbol);
  gen.clear();
  for (const TreeNode& c : n.right) {
    emit(child_history(n.token.text, gen, parent, kRight, *remaining), c.token.text);
    if (c.token.is_attribute()) remaining->erase(c.token.text);
    replay_node(c, n.token.text, remaining, emit);
    gen.push_back(c.token.text);
  }
  emit(child_history(n.token.text, gen, parent, kRight, *remaining), kStopSymbol);
}

// Every prediction made while generating the tree, in generation order: the
// dummy root emits the top word, then each node grows left children then right
// children, recursing into each child before the next sibling.
void replay_tree(const DependencyTree& tree, const EmitFn& emit) {
  AttributeSet remaining = tree_attribute_set(tree);
  emit(child_history(kRootSymbol, {}, kRootSymbol, kRight, remaining), tree.root.token.text);
  if (tree.root.token.is_attribute()) remaining.erase(tree.root.token.text);
  replay_node(tree.root, kRootSymbol, &remaining, emit);
}

}  // namespace

std::vector<Event> nlg3_events(const std::vector<DependencyTree>& treebank) {
  std::vector<Event> events;
  for (const DependencyTree& tree : treebank) {
    replay_tree(tree, [&events](History h, const std::string& outcome) {
      Event e;
      e.history = std::move(h);
      e.outcome = outcome;
      events.push_back(std::move(e));
    });
  }
  return events;
}

PatternSchema nlg3_patterns() {
  return PatternSchema("nlg3", {
                                   Pattern{"siblings", {kSib1, kSib2, kDir, kAttr}, {}},
                                   Pattern{"parsib", {kSib1, kHead, kDir, kAttr}, {}},
                                   Pattern{"pargrand", {kHead, kPar, kDir, kAttr}, {}},
                               });
}

Vocabulary nlg3_vocabulary(const std::vector<DependencyTree>& treebank) {
  std::set<std::string> words;
  std::function<void(const TreeNode&)> walk = [&](const TreeNode& n) {
    words.insert(n.token.text);
    for (const TreeNode& c : n.left) walk(c);
    for (const TreeNode& c : n.right) walk(c);
  };
  for (const DependencyTree& t : treebank) walk(t.root);
  return Vocabulary(std::vector<std::string>(words.begin(), words.end()));
}

std::vector<Feature> descendant_filter(std::vector<Feature> features,
                                       const std::vector<DependencyTree>& treebank,
                                       const PatternSchema& schema) {
  // word -> attributes seen anywhere in a subtree rooted at that word,
  // the word itself included.
  std::map<std::string, std::set<std::string>> under;
  std::function<AttributeSet(const TreeNode&)> collect = [&](const TreeNode& n) {
    AttributeSet sub;
    if (n.token.is_attribute()) sub.insert(n.token.text);
    for (const TreeNode& c : n.left) {
      AttributeSet s = collect(c);
      sub.insert(s.begin(), s.end());
    }
    for (const TreeNode& c : n.right) {
      AttributeSet s = collect(c);
      sub.insert(s.begin(), s.end());
    }
    under[n.token.text].insert(sub.begin(), sub.end());
    return sub;
  };
  for (const DependencyTree& t : treebank) collect(t.root);

  std::vector<Feature> kept;
  kept.reserve(features.size());
  for (Feature& f : features) {
    if (f.outcome == kStopSymbol) {
      kept.push_back(std::move(f));
      continue;
    }
    const auto attr = schema.bound_value(f.context, kAttr);
    if (!attr) {
      kept.push_back(std::move(f));
      continue;
    }
    auto it = under.find(f.outcome);
    if (it != under.end() && it->second.count(*attr)) kept.push_back(std::move(f));
  }
  return kept;
}

double tree_log_probability(const MaxentModel& model, const DependencyTree& tree,
                            const AttributeSet& attrs, const Nlg3Config& cfg) {
  if (cfg.max_children < 1) raise(Errc::InvalidArgument, "max_children must be >= 1");
  if (tree_attribute_set(tree) != attrs)
    raise(Errc::AttributeMismatch, "tree attributes differ from the requested set");

  std::size_t nodes = 0;
  bool over = false;
  std::function<void(const TreeNode&)> walk = [&](const TreeNode& n) {
    ++nodes;
    if (n.left.size() > cfg.max_children || n.right.size() > cfg.max_children) over = true;
    for (const TreeNode& c : n.left) walk(c);
    for (const TreeNode& c : n.right) walk(c);
  };
  walk(tree.root);
  if (over) return -std::numeric_limits<double>::infinity();

  // Uniform child-count term per side per node; the dummy root has none.
  double lp = -2.0 * static_cast<double>(nodes) *
              std::log(static_cast<double>(cfg.max_children) + 1.0);
  const Vocabulary& vocab = model.vocab();
  replay_tree(tree, [&](History h, const std::string& outcome) {
    auto oid = vocab.id(outcome);
    if (!oid) raise(Errc::InvalidArgument, "tree word not in model vocabulary: " + outcome);
    lp += model.conditional_log_prob(h)[*oid];
  });
  return lp;
}

double tree_probability(const MaxentModel& model, const DependencyTree& tree,
                        const AttributeSet& attrs, const Nlg3Config& cfg) {
  return std::exp(tree_log_probability(model, tree, attrs, cfg));
}

namespace {

struct SNode {
  std::uint32_t tok = 0;
  std::int32_t parent = -1;
  std::vector<std::uint32_t> left, right;  // closest-first
};

struct Frame {
  std::uint32_t node = 0;
  bool right_side = false;
};

struct TCand {
  std::vector<SNode> nodes;
  std::vector<Frame> stack;  // back() = active site; empty nodes = root prediction
  std::vector<std::string> remaining;
  double lp = 0.0;
  std::string text;  // linearization, for deterministic tie-breaks
};

void lin_arena(const std::vector<SNode>& nodes, const Vocabulary& vocab, std::uint32_t i,
               std::string* out) {
  const SNode& n = nodes[i];
  for (auto it = n.left.rbegin(); it != n.left.rend(); ++it) lin_arena(nodes, vocab, *it, out);
  if (!out->empty()) *out += ' ';
  *out += vocab.word(n.tok);
  for (std::uint32_t c : n.right) lin_arena(nodes, vocab, c, out);
}

TreeNode to_tree(const std::vector<SNode>& nodes, const Vocabulary& vocab, std::uint32_t i) {
  const SNode& n = nodes[i];
  TreeNode t;
  t.token = Token(vocab.word(n.tok));
  for (std::uint32_t c : n.left) t.left.push_back(to_tree(nodes, vocab, c));
  for (std::uint32_t c : n.right) t.right.push_back(to_tree(nodes, vocab, c));
  return t;
}

History site_history(const TCand& c, const Vocabulary& vocab) {
  AttributeSet rem(c.remaining.begin(), c.remaining.end());
  if (c.nodes.empty()) return child_history(kRootSymbol, {}, kRootSymbol, kRight, rem);
  const Frame& fr = c.stack.back();
  const SNode& n = c.nodes[fr.node];
  const std::vector<std::uint32_t>& side = fr.right_side ? n.right : n.left;
  std::vector<std::string> gen;
  gen.reserve(side.size());
  for (std::uint32_t k : side) gen.push_back(vocab.word(c.nodes[k].tok));
  const std::string par = n.parent >= 0
                              ? vocab.word(c.nodes[static_cast<std::uint32_t>(n.parent)].tok)
                              : std::string(kRootSymbol);
  return child_history(vocab.word(n.tok), gen, par, fr.right_side ? kRight : kLeft, rem);
}

}  // namespace

std::vector<ScoredTree> nlg3_search(const MaxentModel& model, const AttributeSet& attrs,
                                    const Nlg3Config& cfg) {
  if (cfg.beam < 1 || cfg.max_tokens < 1 || cfg.max_children < 1)
    raise(Errc::InvalidArgument, "beam, max_tokens and max_children must be >= 1");
  if (attrs.empty()) raise(Errc::EmptyAttributeSet, "nothing to express");
  const Vocabulary& vocab = model.vocab();
  for (const std::string& a : attrs) {
    if (a.empty() || a[0] != '$') raise(Errc::UnknownAttribute, a + " is not an attribute name");
    if (!vocab.contains(a)) raise(Errc::UnknownAttribute, a + " never seen in training");
  }

  const std::uint32_t n_words = vocab.stop_id();
  std::vector<bool> is_attr(n_words, false);
  for (std::uint32_t w = 0; w < n_words; ++w) is_attr[w] = vocab.word(w)[0] == '$';

  std::vector<TCand> beam(1);
  beam[0].remaining.assign(attrs.begin(), attrs.end());
  std::vector<TCand> completed;

  // Both per-side child-count terms are charged the moment a node is created
  // rather than when its sides close. Every node pays them exactly once either
  // way, so completed totals agree with tree_log_probability; paying up front
  // keeps partials comparable, otherwise a candidate could look good by
  // growing instead of closing.
  const double node_prior = -2.0 * std::log(static_cast<double>(cfg.max_children) + 1.0);

  std::vector<double> dist;
  const std::uint32_t max_rounds = 3 * cfg.max_tokens + 5;
  for (std::uint32_t round = 0; round < max_rounds; ++round) {
    if (beam.empty() || completed.size() >= cfg.beam) break;
    std::vector<TCand> next;
    for (const TCand& c : beam) {
      dist = model.conditional_log_prob(site_history(c, vocab));
      if (c.nodes.empty()) {
        // The dummy root emits exactly one child, the top word of the tree;
        // predicting stop here would leave nothing to say.
        for (std::uint32_t w = 0; w < n_words; ++w) {
          const std::string& name = vocab.word(w);
          if (is_attr[w] && !std::binary_search(c.remaining.begin(), c.remaining.end(), name))
            continue;
          TCand nc;
          nc.nodes.push_back(SNode{w, -1, {}, {}});
          nc.stack.push_back(Frame{0, false});
          nc.remaining = c.remaining;
          if (is_attr[w])
            nc.remaining.erase(
                std::lower_bound(nc.remaining.begin(), nc.remaining.end(), name));
          nc.lp = c.lp + dist[w] + node_prior;
          next.push_back(std::move(nc));
        }
        continue;
      }
      const Frame fr = c.stack.back();
      const std::vector<std::uint32_t>& side =
          fr.right_side ? c.nodes[fr.node].right : c.nodes[fr.node].left;
      // stop: close this side, resume the parent site, possibly finish
      {
        TCand nc = c;
        nc.lp += dist[vocab.stop_id()];
        if (!fr.right_side) {
          nc.stack.back().right_side = true;
          next.push_back(std::move(nc));
        } else {
          nc.stack.pop_back();
          if (nc.stack.empty()) {
            if (nc.remaining.empty()) completed.push_back(std::move(nc));
          } else {
            next.push_back(std::move(nc));
          }
        }
      }
      // word children: barred once the tree is full or the side is full
      if (c.nodes.size() < cfg.max_tokens && side.size() < cfg.max_children) {
        for (std::uint32_t w = 0; w < n_words; ++w) {
          const std::string& name = vocab.word(w);
          if (is_attr[w] && !std::binary_search(c.remaining.begin(), c.remaining.end(), name))
            continue;
          TCand nc = c;
          const auto id = static_cast<std::uint32_t>(nc.nodes.size());
          nc.nodes.push_back(SNode{w, static_cast<std::int32_t>(fr.node), {}, {}});
          (fr.right_side ? nc.nodes[fr.node].right : nc.nodes[fr.node].left).push_back(id);
          nc.stack.push_back(Frame{id, false});
          if (is_attr[w])
            nc.remaining.erase(
                std::lower_bound(nc.remaining.begin(), nc.remaining.end(), name));
          nc.lp = c.lp + dist[w] + node_prior;
          next.push_back(std::move(nc));
        }
      }
    }
    for (TCand& c : next) {
      c.text.clear();
      lin_arena(c.nodes, vocab, 0, &c.text);
    }
    std::sort(next.begin(), next.end(), [](const TCand& a, const TCand& b) {
      if (a.lp != b.lp) return a.lp > b.lp;
      return a.text < b.text;
    });
    if (next.size() > cfg.beam) next.resize(cfg.beam);
    beam = std::move(next);
  }

  std::vector<ScoredTree> out;
  out.reserve(completed.size());
  for (const TCand& c : completed) {
    ScoredTree st;
    st.tree.root = to_tree(c.nodes, vocab, 0);
    // Recompute in canonical order so equal trees score identically however
    // the search reached them.
    st.log_probability = tree_log_probability(model, st.tree, attrs, cfg);
    st.probability = std::exp(st.log_probability);
    out.push_back(std::move(st));
  }
  std::sort(out.begin(), out.end(), [](const ScoredTree& a, const ScoredTree& b) {
    if (a.log_probability != b.log_probability) return a.log_probability > b.log_probability;
    const std::string ta = linearize(a.tree).text(), tb = linearize(b.tree).text();
    if (ta != tb) return ta < tb;
    return tree_to_record(a.tree) < tree_to_record(b.tree);
  });
  if (out.size() > cfg.beam) out.resize(cfg.beam);
  return out;
}

std::optional<ScoredTemplate> nlg3_generate(const MaxentModel& model, const AttributeSet& attrs,
                                            const Nlg3Config& cfg) {
  std::vector<ScoredTree> all = nlg3_search(model, attrs, cfg);
  if (all.empty()) return std::nullopt;
  ScoredTemplate st;
  st.tmpl = linearize(all.front().tree);
  st.probability = all.front().probability;
  st.log_probability = all.front().log_probability;
  return st;
}

IisResult nlg3_train(const std::vector<DependencyTree>& treebank, const Nlg3Config& cfg,
                     const IisOptions& iis) {
  if (cfg.cutoff < 1) raise(Errc::InvalidArgument, "cutoff must be >= 1");
  if (treebank.empty()) raise(Errc::InvalidArgument, "empty treebank");
  Vocabulary vocab = nlg3_vocabulary(treebank);
  std::vector<Event> events = nlg3_events(treebank);
  PatternSchema schema = nlg3_patterns();
  std::vector<Feature> features = instantiate_features(events, schema, cfg.cutoff);
  features = descendant_filter(std::move(features), treebank, schema);
  return train_iis(vocab, schema, events, std::move(features), cfg.cutoff, iis);
}

}  // namespace surfgen
