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

#include "surfgen/nlg1.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace surfgen {

FrequencyTable train_nlg1(const std::vector<Template>& corpus) {
  if (corpus.empty()) raise(Errc::InvalidArgument, "empty corpus");
  FrequencyTable table;
  for (const Template& t : corpus) {
    ++table.counts[canonical_attrs(extract_attribute_set(t))][t.text()];
    ++table.total;
  }
  return table;
}

namespace {

const std::pair<const std::string, std::uint32_t>* best_entry(
    const FrequencyTable& table, const AttributeSet& attrs) {
  auto it = table.counts.find(canonical_attrs(attrs));
  if (it == table.counts.end()) return nullptr;
  const std::pair<const std::string, std::uint32_t>* best = nullptr;
  for (const auto& entry : it->second)
    if (!best || entry.second > best->second) best = &entry;  // first max is lex-smallest
  return best;
}

}  // namespace

std::optional<Template> nlg1_generate(const FrequencyTable& table, const AttributeSet& attrs) {
  const auto* best = best_entry(table, attrs);
  if (!best) return std::nullopt;
  return parse_template_line(best->first);
}

std::optional<double> nlg1_score(const FrequencyTable& table, const AttributeSet& attrs) {
  const auto* best = best_entry(table, attrs);
  if (!best) return std::nullopt;
  std::uint64_t set_total = 0;
  for (const auto& entry : table.counts.at(canonical_attrs(attrs))) set_total += entry.second;
  return static_cast<double>(best->second) / static_cast<double>(set_total);
}

void save_frequency_table(const FrequencyTable& table, std::ostream& os) {
  os << "surfgen-nlg1 v1\n";
  std::size_t entries = 0;
  for (const auto& [key, templates] : table.counts) entries += templates.size();
  os << "entries " << entries << "\n";
  for (const auto& [key, templates] : table.counts)
    for (const auto& [text, count] : templates)
      os << key << '\t' << text << '\t' << count << "\n";
  os << "end\n";
}

FrequencyTable load_frequency_table(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "surfgen-nlg1 v1")
    raise(Errc::BadFormat, "not a frequency table file");
  if (!std::getline(is, line) || line.rfind("entries ", 0) != 0)
    raise(Errc::BadFormat, "expected entry count");
  const std::size_t entries = std::stoull(line.substr(8));
  FrequencyTable table;
  for (std::size_t i = 0; i < entries; ++i) {
    if (!std::getline(is, line)) raise(Errc::BadFormat, "truncated table");
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) raise(Errc::BadFormat, "bad table line");
    const std::string key = line.substr(0, t1);
    const std::string text = line.substr(t1 + 1, t2 - t1 - 1);
    const auto count = static_cast<std::uint32_t>(std::stoul(line.substr(t2 + 1)));
    if (count == 0) raise(Errc::BadFormat, "zero count");
    table.counts[key][text] = count;
    table.total += count;
  }
  if (!std::getline(is, line) || line != "end") raise(Errc::BadFormat, "missing end marker");
  return table;
}

}  // namespace surfgen
