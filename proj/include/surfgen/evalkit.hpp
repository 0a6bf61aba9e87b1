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

#ifndef SURFGEN_EVALKIT_HPP_
#define SURFGEN_EVALKIT_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "surfgen/corpus.hpp"

namespace surfgen {

// ---------------------------------------------------------------------------
// Scoring: judged outputs over the unique attribute sets of a test corpus,
// tallied per system both unweighted (each set once) and weighted (by how
// often the set occurs in the test data).

enum class Rank { Correct, Ok, Bad, NoOutput };
inline constexpr std::size_t kRankCount = 4;

const char* rank_name(Rank r);
std::optional<Rank> parse_rank(const std::string& s);

struct Judgment {
  std::string system;
  AttributeSet attrs;
  Rank rank = Rank::Bad;
};

struct SystemScore {
  std::string system;
  // percentages indexed by Rank; each array sums to 100
  std::array<double, kRankCount> weighted{};
  std::array<double, kRankCount> unweighted{};
  // percent error reduction vs the baseline, per weighting; 0 for the baseline
  double weighted_error_reduction = 0.0;
  double unweighted_error_reduction = 0.0;
};

struct ScoreReport {
  std::string baseline;
  std::vector<SystemScore> systems;  // baseline first, the rest by name
};

// Groups templates by attribute set; counts are multiplicities, so the counts
// sum to the corpus size.
std::vector<std::pair<AttributeSet, std::uint32_t>> dedupe_attribute_sets(
    const std::vector<Template>& corpus);

// Percent of the baseline's error removed by a system, both accuracies given
// as percent Correct. 0 when the baseline is already perfect.
double error_reduction(double baseline_correct_pct, double system_correct_pct);

// Requires exactly one judgment per (attribute set, system) over the deduped
// sets. Errors: MissingJudgment, DuplicateJudgment; InvalidArgument for a
// judgment on a set absent from the corpus or for an unknown baseline.
ScoreReport score_report(const std::vector<Judgment>& judgments,
                         const std::vector<std::pair<AttributeSet, std::uint32_t>>& counts,
                         const std::string& baseline);

// Aligned plain-text tables: % Correct, % OK, % Bad, % No output, % error
// reduction; weighted table first.
std::string render_report(const ScoreReport& report);

// File format: one judgment per line, `system<TAB>attrs<TAB>rank` where attrs
// is the canonical space-joined sorted form. '#' lines and blanks skipped.
std::vector<Judgment> read_judgments(const std::string& path);
void write_judgments(const std::vector<Judgment>& judgments, const std::string& path);

// ---------------------------------------------------------------------------
// Synthetic flight-description grammar: the ground-truth oracle for automated
// runs. Each attribute realizes as a fixed fragment (a couple have two
// phrasings); fragments compose in one global order around the head noun, so
// the full reference set for an attribute combination is enumerable and a
// generated template can be checked for correctness by exact match.

struct SynthFragment {
  // surface tokens in order; exactly one is the attribute placeholder
  std::vector<std::string> tokens;
  // heads[i] = fragment-local index of token i's head, -1 for the fragment
  // root (which attaches to the grammar's head noun)
  std::vector<int> heads;
};

struct SynthAttribute {
  std::string name;
  bool prefix = false;  // realized before the head noun
  std::vector<SynthFragment> variants;
};

class SynthGrammar {
 public:
  // ten attributes around the head noun "flights"
  static SynthGrammar flights();

  const std::string& head() const { return head_; }
  const std::vector<SynthAttribute>& attributes() const { return attrs_; }
  const SynthAttribute& attribute(const std::string& name) const;

  // every surface string the grammar accepts for the set, sorted;
  // errors: EmptyAttributeSet, UnknownAttribute
  std::vector<std::string> reference_templates(const AttributeSet& attrs) const;
  bool matches_reference(const AttributeSet& attrs, const std::string& text) const;

  // one sampled realization (random phrasing per attribute) with its
  // dependency tree; the tree linearizes back to the template
  std::pair<Template, DependencyTree> realize(const AttributeSet& attrs,
                                              std::mt19937_64& rng) const;

 private:
  std::string head_;
  std::vector<SynthAttribute> attrs_;
};

struct SynthCorpus {
  std::vector<Template> train;
  std::vector<DependencyTree> treebank;  // parallel to train
  std::vector<Template> test;            // n/4 templates, mixing seen and novel sets
};

// Deterministic given (grammar, seed, n): n training templates with paired
// trees plus a test corpus whose attribute sets are drawn from the training
// pools 3/4 of the time and from a disjoint never-trained pool 1/4 of the
// time. Frequent sets follow a skewed distribution so a few combinations
// dominate, as in real request logs.
SynthCorpus synth_corpus(const SynthGrammar& grammar, std::uint64_t seed, std::uint32_t n);

}  // namespace surfgen

#endif  // SURFGEN_EVALKIT_HPP_
