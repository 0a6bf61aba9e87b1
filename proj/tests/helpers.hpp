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

#ifndef SURFGEN_TESTS_HELPERS_HPP_
#define SURFGEN_TESTS_HELPERS_HPP_

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "surfgen/corpus.hpp"

namespace testutil {

// Random projective dependency tree over the given surface tokens: every
// subtree spans a contiguous interval, so linearize(tree) == tokens holds by
// construction and makes an independent round-trip oracle.
inline surfgen::TreeNode random_projective(const std::vector<std::string>& tokens,
                                           std::size_t lo, std::size_t hi,
                                           std::mt19937_64& rng) {
  const std::size_t h = lo + rng() % (hi - lo + 1);
  surfgen::TreeNode node;
  node.token = surfgen::Token(tokens[h]);
  if (h > lo) {
    std::size_t pos = h - 1;
    while (true) {
      const std::size_t seglo = lo + rng() % (pos - lo + 1);
      node.left.push_back(random_projective(tokens, seglo, pos, rng));
      if (seglo == lo) break;
      pos = seglo - 1;
    }
  }
  if (h < hi) {
    std::size_t pos = h + 1;
    while (true) {
      const std::size_t seghi = pos + rng() % (hi - pos + 1);
      node.right.push_back(random_projective(tokens, pos, seghi, rng));
      if (seghi == hi) break;
      pos = seghi + 1;
    }
  }
  return node;
}

// Surface tokens for a random tree: plain words may repeat, attributes never.
inline std::vector<std::string> random_tree_tokens(std::mt19937_64& rng) {
  static const char* words[] = {"alpha", "bravo", "charlie", "delta", "echo"};
  static const char* attrs[] = {"$p", "$q", "$r", "$s"};
  const std::size_t n = 1 + rng() % 8;
  std::vector<std::string> tokens;
  std::vector<bool> used(4, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() % 3 == 0) {
      const std::size_t a = rng() % 4;
      if (!used[a]) {
        used[a] = true;
        tokens.push_back(attrs[a]);
        continue;
      }
    }
    tokens.push_back(words[rng() % 5]);
  }
  return tokens;
}

inline surfgen::DependencyTree random_tree(std::mt19937_64& rng) {
  const std::vector<std::string> tokens = random_tree_tokens(rng);
  surfgen::DependencyTree t;
  t.root = random_projective(tokens, 0, tokens.size() - 1, rng);
  return t;
}

// Unique temp path; the file is removed when the object dies.
class TempFile {
 public:
  explicit TempFile(const std::string& tag) {
    static int counter = 0;
    path_ = std::string("/tmp/surfgen_test_") + tag + "_" + std::to_string(counter++) + "_" +
            std::to_string(static_cast<unsigned>(getpid()));
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }
  void write(const std::string& content) const {
    std::ofstream out(path_);
    out << content;
  }

 private:
  std::string path_;
};

}  // namespace testutil

#endif  // SURFGEN_TESTS_HELPERS_HPP_
