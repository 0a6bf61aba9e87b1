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

#ifndef SURFGEN_MAXENT_HPP_
#define SURFGEN_MAXENT_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "surfgen/errors.hpp"

namespace surfgen {

// Reserved symbols. They can appear in histories but never as corpus words;
// Vocabulary construction rejects them.
inline constexpr const char* kStopSymbol = "*stop*";
inline constexpr const char* kBoundarySymbol = "*start*";
inline constexpr const char* kRootSymbol = "*root*";

// Outcome space of a conditional model: the training words plus one stop
// symbol, indexed densely. The stop symbol is always the last id.
class Vocabulary {
 public:
  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);

  std::size_t size() const { return words_.size(); }  // includes the stop symbol
  std::uint32_t stop_id() const { return static_cast<std::uint32_t>(words_.size() - 1); }
  const std::string& word(std::uint32_t id) const { return words_[id]; }
  std::optional<std::uint32_t> id(const std::string& w) const;
  bool contains(const std::string& w) const { return index_.count(w) != 0; }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Conditioning context: ordered (predicate, value) facts. A predicate may
// carry several values (one fact per value); order is the insertion order and
// callers must build it deterministically.
struct History {
  std::vector<std::pair<std::string, std::string>> predicates;

  void add(std::string name, std::string value) {
    predicates.emplace_back(std::move(name), std::move(value));
  }
  std::vector<std::string> values_of(const std::string& name) const;
  bool empty_predicate(const std::string& name) const;
};

// One training observation: an outcome (word or stop) in a history.
struct Event {
  History history;
  std::string outcome;
  std::uint32_t count = 1;
};

// A feature pattern: a named conjunction over predicate names. Instantiation
// binds each conjunct to one of its values in the history (cartesian product
// over multi-valued predicates); predicates in require_empty must carry no
// value. A pattern with no conjuncts and no requirements is active everywhere.
struct Pattern {
  std::string name;
  std::vector<std::string> conjuncts;
  std::vector<std::string> require_empty;
};

class PatternSchema {
 public:
  PatternSchema() = default;
  PatternSchema(std::string id, std::vector<Pattern> patterns);

  const std::string& id() const { return id_; }
  const std::vector<Pattern>& patterns() const { return patterns_; }

  // Every context string active in h, in pattern order then value order.
  // A context string is "<pattern-name> <v1> <v2> ...".
  std::vector<std::string> active_contexts(const History& h) const;

  // The value an instantiated context binds for `predicate`, if its pattern
  // has that conjunct.
  std::optional<std::string> bound_value(const std::string& context,
                                         const std::string& predicate) const;

 private:
  std::string id_;
  std::vector<Pattern> patterns_;
};

// A binary feature: fires (value 1) on (outcome w, history h) iff its context
// is active in h and w equals its outcome. weight = exp(log_weight) > 0.
struct Feature {
  std::string context;
  std::string outcome;
  double log_weight = 0.0;
};

// All distinct pattern instantiations whose (context, outcome) pair co-occurs
// in `events` with total count >= cutoff, sorted by (context, outcome), all
// weights 1. Errors: InvalidArgument for empty events or cutoff < 1.
std::vector<Feature> instantiate_features(const std::vector<Event>& events,
                                          const PatternSchema& schema,
                                          std::uint32_t cutoff);

// Conditional log-linear model over V + stop:
//   p(w|h) ~ prod_j weight_j^{f_j(w,h)},  normalized over every outcome.
// With no active feature the distribution is uniform.
class MaxentModel {
 public:
  MaxentModel() = default;
  MaxentModel(Vocabulary vocab, PatternSchema schema, std::vector<Feature> features,
              std::uint32_t cutoff);

  const Vocabulary& vocab() const { return vocab_; }
  const PatternSchema& schema() const { return schema_; }
  const std::vector<Feature>& features() const { return features_; }
  std::uint32_t cutoff() const { return cutoff_; }
  // outcome id -> ids of features mentioning that outcome
  const std::vector<std::vector<std::uint32_t>>& outcome_index() const { return outcome_index_; }

  // log p(.|h) / p(.|h) over all outcome ids; sums to 1 (up to rounding).
  std::vector<double> conditional_log_prob(const History& h) const;
  std::vector<double> conditional_prob(const History& h) const;

  // Same distribution given pre-resolved context ids (trainer fast path).
  void log_prob_from_contexts(const std::vector<std::uint32_t>& ctxs,
                              std::vector<double>* out) const;
  std::optional<std::uint32_t> context_id(const std::string& context) const;
  std::size_t context_count() const { return context_features_.size(); }
  const std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>& context_features()
      const {
    return context_features_;
  }

  void set_log_weight(std::uint32_t feature, double lw);

  // Text serialization; save(load(x)) is byte-identical to x.
  void save(std::ostream& os) const;
  static MaxentModel load(std::istream& is);

 private:
  void rebuild_index();

  Vocabulary vocab_;
  PatternSchema schema_;
  std::vector<Feature> features_;
  std::uint32_t cutoff_ = 1;
  std::unordered_map<std::string, std::uint32_t> context_ids_;
  // context id -> (outcome id, feature id) pairs
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> context_features_;
  std::vector<std::vector<std::uint32_t>> outcome_index_;
};

struct IisOptions {
  std::uint32_t max_iters = 100;
  double tol = 1e-4;       // max relative gap between model-expected and
                           // empirical feature counts
  std::uint32_t workers = 1;
  // Called once per completed measurement: (iteration, log-likelihood, gap).
  std::function<void(std::uint32_t, double, double)> progress;
};

struct IisDiagnostics {
  std::uint32_t iterations = 0;  // update steps actually applied
  double final_gap = 0.0;
  bool converged = false;
  std::vector<double> log_likelihood_trace;  // before each update, plus final
};

struct IisResult {
  MaxentModel model;
  IisDiagnostics diagnostics;
};

// Improved iterative scaling. Each iteration solves, per feature j,
//   sum_{events,w} count * p(w|h) * f_j(w,h) * exp(delta_j * f#(w,h)) = empirical_j
// with f#(w,h) the number of features firing on (w,h), then adds delta_j to the
// log-weight. Stops when every feature's expected count is within tol
// (relative) of its empirical count, or after max_iters updates; running out
// of iterations is reported in the diagnostics, not an error.
// Workers split the events into contiguous shards whose partial sums are
// combined in shard order, so results are deterministic for a fixed count.
IisResult train_iis(const Vocabulary& vocab, const PatternSchema& schema,
                    const std::vector<Event>& events, std::vector<Feature> features,
                    std::uint32_t cutoff, const IisOptions& opts = {});

// sum over events of count * log p(outcome|history); always <= 0.
double log_likelihood(const MaxentModel& model, const std::vector<Event>& events);

}  // namespace surfgen

#endif  // SURFGEN_MAXENT_HPP_
