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

#include <functional>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace surfgen;

namespace {

void check_raises(Errc code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL("expected error " << errc_name(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("token kind derives from leading dollar sign") {
  CHECK(Token("$city-to").is_attribute());
  CHECK_FALSE(Token("flights").is_attribute());
  check_raises(Errc::InvalidArgument, [] { Token(""); });
  check_raises(Errc::InvalidArgument, [] { Token("two words"); });
}

TEST_CASE("parse_template_line splits on whitespace") {
  const Template t = parse_template_line("$trip flights from $city-fr to $city-to");
  REQUIRE(t.size() == 6);
  CHECK(t.tokens[0].text == "$trip");
  CHECK(t.tokens[1].text == "flights");
  CHECK(t.tokens[3].text == "$city-fr");
  CHECK(t.text() == "$trip flights from $city-fr to $city-to");

  CHECK(parse_template_line("  a   b\tc  ").text() == "a b c");
  check_raises(Errc::EmptyLine, [] { parse_template_line(""); });
  check_raises(Errc::EmptyLine, [] { parse_template_line("   \t "); });
  check_raises(Errc::DuplicateAttribute, [] { parse_template_line("$a b $a"); });
}

TEST_CASE("extract_attribute_set projects attribute tokens") {
  CHECK(extract_attribute_set(parse_template_line("flights to $city-to leaving at $time-dep")) ==
        AttributeSet{"$city-to", "$time-dep"});
  CHECK(extract_attribute_set(parse_template_line("flights")).empty());
  CHECK(extract_attribute_set(parse_template_line("$a x $b")) == AttributeSet{"$a", "$b"});
}

TEST_CASE("fill_slots substitutes bound values") {
  const Template t = parse_template_line(
      "a flight to $city-to that departs from $city-fr at $time-dep on $date-dep");
  const Bindings b = {{"$city-fr", "New York City"},
                      {"$city-to", "Seattle"},
                      {"$time-dep", "6 a.m."},
                      {"$date-dep", "Wednesday"}};
  CHECK(fill_slots(t, b) ==
        "a flight to Seattle that departs from New York City at 6 a.m. on Wednesday");

  const Template plain = parse_template_line("no slots here");
  CHECK(fill_slots(plain, {}) == "no slots here");

  check_raises(Errc::MissingBinding, [] {
    fill_slots(parse_template_line("$x"), {});
  });
  try {
    fill_slots(parse_template_line("go to $x now"), {});
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("$x") != std::string::npos);
  }
}

TEST_CASE("canonical attribute form round trips") {
  const AttributeSet a = {"$b", "$a", "$c"};
  CHECK(canonical_attrs(a) == "$a $b $c");
  CHECK(parse_canonical_attrs("$a $b $c") == a);
  CHECK(parse_canonical_attrs(canonical_attrs(a)) == a);
}

TEST_CASE("parse_tree_record builds the documented example tree") {
  // A hand-checked tree for this phrase; "the" attaches to "afternoon".
  const std::string rec =
      R"({"tokens":["evening","flights","from","Chicago","in","the","afternoon"],)"
      R"("heads":[1,-1,1,2,1,6,4]})";
  const DependencyTree t = parse_tree_record(rec);
  CHECK(t.root.token.text == "flights");
  REQUIRE(t.root.left.size() == 1);
  CHECK(t.root.left[0].token.text == "evening");
  REQUIRE(t.root.right.size() == 2);
  CHECK(t.root.right[0].token.text == "from");
  CHECK(t.root.right[0].right[0].token.text == "Chicago");
  CHECK(t.root.right[1].token.text == "in");
  REQUIRE(t.root.right[1].right.size() == 1);
  const TreeNode& afternoon = t.root.right[1].right[0];
  CHECK(afternoon.token.text == "afternoon");
  REQUIRE(afternoon.left.size() == 1);
  CHECK(afternoon.left[0].token.text == "the");

  CHECK(linearize(t).text() == "evening flights from Chicago in the afternoon");
}

TEST_CASE("parse_tree_record orders children by proximity to the head") {
  // two left children and two right children around index 2
  const std::string rec = R"({"tokens":["a","b","c","d","e"],"heads":[2,2,-1,2,2]})";
  const DependencyTree t = parse_tree_record(rec);
  REQUIRE(t.root.left.size() == 2);
  CHECK(t.root.left[0].token.text == "b");  // closest first
  CHECK(t.root.left[1].token.text == "a");
  REQUIRE(t.root.right.size() == 2);
  CHECK(t.root.right[0].token.text == "d");
  CHECK(t.root.right[1].token.text == "e");
}

TEST_CASE("parse_tree_record rejects malformed records") {
  check_raises(Errc::Cycle, [] { parse_tree_record(R"({"tokens":["flights"],"heads":[0]})"); });
  check_raises(Errc::Cycle, [] {
    // "the" pointing at itself
    parse_tree_record(
        R"({"tokens":["evening","flights","from","Chicago","in","the","afternoon"],)"
        R"("heads":[1,-1,1,2,1,5,4]})");
  });
  check_raises(Errc::Cycle, [] {
    parse_tree_record(R"({"tokens":["a","b"],"heads":[1,0]})");  // no root
  });
  check_raises(Errc::MultipleRoots, [] {
    parse_tree_record(R"({"tokens":["a","b"],"heads":[-1,-1]})");
  });
  check_raises(Errc::IndexOutOfRange, [] {
    parse_tree_record(R"({"tokens":["a","b"],"heads":[-1,5]})");
  });
  check_raises(Errc::IndexOutOfRange, [] {
    parse_tree_record(R"({"tokens":["a","b"],"heads":[-1]})");  // length mismatch
  });
  check_raises(Errc::DuplicateAttribute, [] {
    parse_tree_record(R"({"tokens":["$x","y","$x"],"heads":[1,-1,1]})");
  });
  check_raises(Errc::NonProjective, [] {
    // arcs a->c and b->d cross
    parse_tree_record(R"({"tokens":["a","b","c","d"],"heads":[-1,3,0,0]})");
  });
  check_raises(Errc::MalformedRecord, [] { parse_tree_record("not json"); });
  check_raises(Errc::MalformedRecord, [] { parse_tree_record(R"({"tokens":["a"]})"); });
}

TEST_CASE("linearize handles the single-node tree") {
  DependencyTree t;
  t.root.token = Token("x");
  CHECK(linearize(t).text() == "x");
  CHECK(tree_attribute_set(t).empty());
}

TEST_CASE("random projective trees round-trip through records") {
  std::mt19937_64 rng(20260816);
  for (int i = 0; i < 300; ++i) {
    const DependencyTree t = testutil::random_tree(rng);
    const Template flat = linearize(t);
    const std::string rec = tree_to_record(t);
    const DependencyTree back = parse_tree_record(rec);
    CHECK(linearize(back) == flat);
    CHECK(tree_to_record(back) == rec);
    CHECK(tree_attribute_set(back) == extract_attribute_set(flat));
  }
}

TEST_CASE("template corpus files round-trip") {
  testutil::TempFile f("corpus");
  const std::vector<Template> corpus = {
      parse_template_line("flights from $city-fr to $city-to"),
      parse_template_line("$trip flights"),
  };
  write_template_corpus(corpus, f.path());
  const std::vector<Template> back = read_template_corpus(f.path());
  REQUIRE(back.size() == 2);
  CHECK(back[0] == corpus[0]);
  CHECK(back[1] == corpus[1]);
}

TEST_CASE("template corpus reader skips blanks and comments, reports line numbers") {
  testutil::TempFile f("corpus_bad");
  f.write("# header\n\nflights to $city-to\nbad $dup $dup\n");
  try {
    read_template_corpus(f.path());
    FAIL("expected DuplicateAttribute");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateAttribute);
    CHECK(std::string(e.what()).find(":4") != std::string::npos);
  }
}

TEST_CASE("treebank files round-trip") {
  std::mt19937_64 rng(7);
  std::vector<DependencyTree> bank;
  for (int i = 0; i < 20; ++i) bank.push_back(testutil::random_tree(rng));
  testutil::TempFile f("treebank");
  write_treebank(bank, f.path());
  const std::vector<DependencyTree> back = read_treebank(f.path());
  REQUIRE(back.size() == bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i)
    CHECK(tree_to_record(back[i]) == tree_to_record(bank[i]));
}

TEST_CASE("read_bindings parses tab-separated pairs") {
  testutil::TempFile f("bindings");
  f.write("# comment\n$city-to\tNew York City\n$time-dep\t6 a.m.\n");
  const Bindings b = read_bindings(f.path());
  REQUIRE(b.size() == 2);
  CHECK(b.at("$city-to") == "New York City");
  CHECK(b.at("$time-dep") == "6 a.m.");

  testutil::TempFile bad("bindings_bad");
  bad.write("no-dollar\tvalue\n");
  check_raises(Errc::BadFormat, [&] { read_bindings(bad.path()); });
}
