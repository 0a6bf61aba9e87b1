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

#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace surfgen;

namespace {

std::vector<Template> pool() {
  static const char* lines[] = {
      "flights from $city-fr",
      "flights leaving $city-fr",
      "flights from $city-fr to $city-to",
      "flights to $city-to from $city-fr",
      "$time-dep flights to $city-to",
      "flights to $city-to",
      "flights on $air",
  };
  std::vector<Template> out;
  for (const char* l : lines) out.push_back(parse_template_line(l));
  return out;
}

}  // namespace

TEST_CASE("training tallies match a direct recount") {
  const std::vector<Template> kinds = pool();
  std::mt19937_64 rng(314159);
  std::vector<Template> corpus;
  for (int i = 0; i < 800; ++i) corpus.push_back(kinds[rng() % kinds.size()]);

  const FrequencyTable table = train_nlg1(corpus);

  std::map<std::string, std::map<std::string, std::uint32_t>> recount;
  std::uint64_t total = 0;
  for (const Template& t : corpus) {
    ++recount[canonical_attrs(extract_attribute_set(t))][t.text()];
    ++total;
  }
  CHECK(table.total == total);
  REQUIRE(table.counts.size() == recount.size());
  for (const auto& [key, by_text] : recount) {
    REQUIRE(table.counts.count(key) == 1);
    CHECK(table.counts.at(key) == by_text);
  }
}

TEST_CASE("generation picks the most frequent phrasing, ties to the smaller text") {
  std::vector<Template> corpus;
  auto add = [&](const char* line, int n) {
    for (int i = 0; i < n; ++i) corpus.push_back(parse_template_line(line));
  };
  add("flights from $city-fr to $city-to", 5);
  add("flights to $city-to from $city-fr", 2);
  add("flights on $air", 3);
  add("flights with $air", 3);  // tie: "flights on $air" < "flights with $air"

  const FrequencyTable table = train_nlg1(corpus);

  const auto best = nlg1_generate(table, AttributeSet{"$city-fr", "$city-to"});
  REQUIRE(best.has_value());
  CHECK(best->text() == "flights from $city-fr to $city-to");
  const auto score = nlg1_score(table, AttributeSet{"$city-fr", "$city-to"});
  REQUIRE(score.has_value());
  CHECK(*score == doctest::Approx(5.0 / 7.0).epsilon(1e-12));

  const auto tied = nlg1_generate(table, AttributeSet{"$air"});
  REQUIRE(tied.has_value());
  CHECK(tied->text() == "flights on $air");
}

TEST_CASE("unseen attribute sets produce no output") {
  const FrequencyTable table = train_nlg1(pool());
  CHECK_FALSE(nlg1_generate(table, AttributeSet{"$price"}).has_value());
  CHECK_FALSE(nlg1_score(table, AttributeSet{"$price"}).has_value());
  // subsets and supersets of seen sets are still unseen
  CHECK_FALSE(nlg1_generate(table, AttributeSet{"$city-fr", "$air"}).has_value());
  CHECK_FALSE(nlg1_generate(table, AttributeSet{}).has_value());
}

TEST_CASE("attribute order inside the template does not split the tally") {
  std::vector<Template> corpus = {
      parse_template_line("flights from $city-fr to $city-to"),
      parse_template_line("flights to $city-to from $city-fr"),
  };
  const FrequencyTable table = train_nlg1(corpus);
  CHECK(table.counts.size() == 1);
  CHECK(table.counts.begin()->second.size() == 2);
}

TEST_CASE("frequency table save/load round-trips byte-exactly") {
  std::mt19937_64 rng(7);
  const std::vector<Template> kinds = pool();
  std::vector<Template> corpus;
  for (int i = 0; i < 120; ++i) corpus.push_back(kinds[rng() % kinds.size()]);
  const FrequencyTable table = train_nlg1(corpus);

  std::ostringstream first;
  save_frequency_table(table, first);
  std::istringstream in(first.str());
  const FrequencyTable back = load_frequency_table(in);
  std::ostringstream second;
  save_frequency_table(back, second);
  CHECK(first.str() == second.str());
  CHECK(back.total == table.total);
  CHECK(back.counts == table.counts);

  std::istringstream bad("something else\n");
  CHECK_THROWS_AS(load_frequency_table(bad), Error);
  std::istringstream truncated(first.str().substr(0, first.str().size() / 2));
  CHECK_THROWS_AS(load_frequency_table(truncated), Error);
}

TEST_CASE("training an empty corpus is an error") {
  CHECK_THROWS_AS(train_nlg1({}), Error);
}
