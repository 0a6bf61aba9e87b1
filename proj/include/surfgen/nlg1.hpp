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

#ifndef SURFGEN_NLG1_HPP_
#define SURFGEN_NLG1_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>

#include "surfgen/corpus.hpp"

namespace surfgen {

// Memorization baseline: counts how often each template realized each
// attribute set in training and answers with the most frequent one.
struct FrequencyTable {
  // canonical attribute key -> template text -> count. std::map keeps both
  // levels in lexicographic order, which fixes serialization and tie-breaks.
  std::map<std::string, std::map<std::string, std::uint32_t>> counts;
  std::uint64_t total = 0;
};

FrequencyTable train_nlg1(const std::vector<Template>& corpus);

// Highest-count template for exactly this attribute set; ties go to the
// lexicographically smaller text. Unseen set -> nullopt (no output).
std::optional<Template> nlg1_generate(const FrequencyTable& table, const AttributeSet& attrs);

// The winning template's share of its set's training count, if any.
std::optional<double> nlg1_score(const FrequencyTable& table, const AttributeSet& attrs);

void save_frequency_table(const FrequencyTable& table, std::ostream& os);
FrequencyTable load_frequency_table(std::istream& is);

}  // namespace surfgen

#endif  // SURFGEN_NLG1_HPP_
