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

#ifndef SURFGEN_NLG2_HPP_
#define SURFGEN_NLG2_HPP_

#include <optional>

#include "surfgen/corpus.hpp"
#include "surfgen/maxent.hpp"

namespace surfgen {

// Word-sequence generator: a conditional model of the next word given the two
// previous words and the attributes still to be mentioned, searched left to
// right under a beam with mention-each-attribute-exactly-once constraints.

// History predicates.
inline constexpr const char* kPrev = "prev";    // previous word (boundary marker at the start)
inline constexpr const char* kPrev2 = "prev2";  // word before that
inline constexpr const char* kAttr = "attr";    // one fact per attribute still unmentioned

struct Nlg2Config {
  std::uint32_t beam = 10;      // N
  std::uint32_t max_len = 30;   // M, surface tokens (stop excluded)
  std::uint32_t cutoff = 3;     // K
};

// One event per token position plus a final stop event; the attr facts list
// what remains to be mentioned before that position.
std::vector<Event> nlg2_events(const std::vector<Template>& corpus);

// The three feature shapes: "noattr" (no attributes remaining), "bigram"
// (previous word + a remaining attribute), "trigram" (previous two words + a
// remaining attribute).
PatternSchema nlg2_patterns();

// All distinct corpus tokens, sorted.
Vocabulary nlg2_vocabulary(const std::vector<Template>& corpus);

struct ScoredTemplate {
  Template tmpl;
  double probability = 0.0;      // (1/M) * prod of step conditionals
  double log_probability = 0.0;
};

// Beam search for word sequences that mention every attribute in `attrs`
// exactly once and nothing else, at most cfg.max_len words, ranked by
// probability (ties by text). Empty result means no output. Errors:
// EmptyAttributeSet, UnknownAttribute, InvalidArgument.
std::vector<ScoredTemplate> nlg2_search(const MaxentModel& model, const AttributeSet& attrs,
                                        const Nlg2Config& cfg);

// Top candidate, if any.
std::optional<ScoredTemplate> nlg2_generate(const MaxentModel& model, const AttributeSet& attrs,
                                            const Nlg2Config& cfg);

// events -> features (count cutoff cfg.cutoff) -> iterative scaling.
IisResult nlg2_train(const std::vector<Template>& corpus, const Nlg2Config& cfg,
                     const IisOptions& iis = {});

}  // namespace surfgen

#endif  // SURFGEN_NLG2_HPP_
