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

#ifndef SURFGEN_NLG3_HPP_
#define SURFGEN_NLG3_HPP_

#include <optional>

#include "surfgen/corpus.hpp"
#include "surfgen/maxent.hpp"
#include "surfgen/nlg2.hpp"  // ScoredTemplate

namespace surfgen {

// Dependency-tree generator: a conditional model of a head word's next child
// (per side), searched top-down. Trees are generated head-first: a dummy root
// emits the top word as its single child, then every node grows its left
// children closest-first (each child's subtree finished before the next
// sibling starts), then its right children the same way; each side ends by
// predicting the stop symbol.

// History predicates.
inline constexpr const char* kHead = "head";  // word whose child is being predicted
inline constexpr const char* kSib1 = "sib1";  // previous child on this side (boundary marker if none)
inline constexpr const char* kSib2 = "sib2";  // child before that
inline constexpr const char* kPar = "par";    // parent of the head (root marker for the top word)
inline constexpr const char* kDir = "dir";    // "left" or "right"
// attribute facts reuse kAttr from the sequence system

inline constexpr const char* kLeft = "left";
inline constexpr const char* kRight = "right";

struct Nlg3Config {
  std::uint32_t beam = 5;           // N
  std::uint32_t max_tokens = 30;    // M, tree size cap
  std::uint32_t cutoff = 10;        // K
  std::uint32_t max_children = 10;  // per side per node; more has probability 0
};

// Child-prediction events in generation order: one per child plus a stop event
// per side per node, and one event for the dummy root emitting the top word.
// The attr facts are the attributes of the whole tree not yet generated at
// that point of the traversal. A tree with n nodes yields exactly 3n events.
std::vector<Event> nlg3_events(const std::vector<DependencyTree>& treebank);

// The three feature shapes, all direction- and attribute-conditioned:
// "siblings" (two previous children), "parsib" (previous child + head),
// "pargrand" (head + its parent).
PatternSchema nlg3_patterns();

Vocabulary nlg3_vocabulary(const std::vector<DependencyTree>& treebank);

// Keeps a feature pairing child word c with attribute a only if a occurred
// inside the subtree rooted at some training occurrence of c (the subtree
// includes c itself). Features whose outcome is the stop symbol pass through.
std::vector<Feature> descendant_filter(std::vector<Feature> features,
                                       const std::vector<DependencyTree>& treebank,
                                       const PatternSchema& schema);

// Probability of a complete tree for attribute set `attrs`: the product over
// every child prediction (stops included) in generation order, times a uniform
// child-count term 1/(max_children+1) per side per node; any side with more
// than max_children children has probability 0. Error: AttributeMismatch if
// the tree's attributes differ from `attrs`.
double tree_probability(const MaxentModel& model, const DependencyTree& tree,
                        const AttributeSet& attrs, const Nlg3Config& cfg);
double tree_log_probability(const MaxentModel& model, const DependencyTree& tree,
                            const AttributeSet& attrs, const Nlg3Config& cfg);

struct ScoredTree {
  DependencyTree tree;
  double probability = 0.0;
  double log_probability = 0.0;
};

// Beam search over partial trees; each candidate has one active prediction
// site (the depth-first traversal above). Word growth stops at cfg.max_tokens;
// candidates then close with stop predictions only. Returns at most cfg.beam
// complete trees that mention each attribute exactly once and nothing else,
// ranked by tree probability (ties by surface text). Empty means no output.
std::vector<ScoredTree> nlg3_search(const MaxentModel& model, const AttributeSet& attrs,
                                    const Nlg3Config& cfg);

// Linearized top tree, if any.
std::optional<ScoredTemplate> nlg3_generate(const MaxentModel& model, const AttributeSet& attrs,
                                            const Nlg3Config& cfg);

// events -> features (count cutoff) -> descendant filter -> iterative scaling.
IisResult nlg3_train(const std::vector<DependencyTree>& treebank, const Nlg3Config& cfg,
                     const IisOptions& iis = {});

}  // namespace surfgen

#endif  // SURFGEN_NLG3_HPP_
