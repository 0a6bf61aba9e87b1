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

#include "surfgen/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace surfgen {

namespace {

const char* const kReserved[] = {kStopSymbol, kBoundarySymbol, kRootSymbol};

bool is_reserved(const std::string& w) {
  for (const char* r : kReserved)
    if (w == r) return true;
  return false;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  if (s == "-") return out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string join_csv(const std::vector<std::string>& v) {
  if (v.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += v[i];
  }
  return out;
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  words_.reserve(words.size() + 1);
  for (const std::string& w : words) {
    if (w.empty()) raise(Errc::InvalidArgument, "empty vocabulary word");
    if (is_reserved(w)) raise(Errc::InvalidArgument, "reserved symbol used as word: " + w);
    if (index_.count(w)) continue;
    index_.emplace(w, static_cast<std::uint32_t>(words_.size()));
    words_.push_back(w);
  }
  index_.emplace(kStopSymbol, static_cast<std::uint32_t>(words_.size()));
  words_.push_back(kStopSymbol);
}

std::optional<std::uint32_t> Vocabulary::id(const std::string& w) const {
  auto it = index_.find(w);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> History::values_of(const std::string& name) const {
  std::vector<std::string> out;
  for (const auto& [n, v] : predicates)
    if (n == name) out.push_back(v);
  return out;
}

bool History::empty_predicate(const std::string& name) const {
  for (const auto& [n, v] : predicates)
    if (n == name) return false;
  return true;
}

PatternSchema::PatternSchema(std::string id, std::vector<Pattern> patterns)
    : id_(std::move(id)), patterns_(std::move(patterns)) {
  std::set<std::string> names;
  for (const Pattern& p : patterns_) {
    if (p.name.empty() || p.name.find(' ') != std::string::npos)
      raise(Errc::InvalidArgument, "bad pattern name");
    if (!names.insert(p.name).second)
      raise(Errc::InvalidArgument, "duplicate pattern name " + p.name);
  }
}

std::vector<std::string> PatternSchema::active_contexts(const History& h) const {
  std::vector<std::string> out;
  for (const Pattern& p : patterns_) {
    bool ok = true;
    for (const std::string& e : p.require_empty) {
      if (!h.empty_predicate(e)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::vector<std::vector<std::string>> vals;
    vals.reserve(p.conjuncts.size());
    for (const std::string& c : p.conjuncts) {
      vals.push_back(h.values_of(c));
      if (vals.back().empty()) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (vals.empty()) {
      out.push_back(p.name);
      continue;
    }
    std::vector<std::size_t> idx(vals.size(), 0);
    bool more = true;
    while (more) {
      std::string ctx = p.name;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        ctx += ' ';
        ctx += vals[i][idx[i]];
      }
      out.push_back(std::move(ctx));
      more = false;
      std::size_t i = vals.size();
      while (i-- > 0) {
        if (++idx[i] < vals[i].size()) {
          more = true;
          break;
        }
        idx[i] = 0;
      }
    }
  }
  return out;
}

std::optional<std::string> PatternSchema::bound_value(const std::string& context,
                                                      const std::string& predicate) const {
  std::vector<std::string> parts;
  std::istringstream in(context);
  std::string piece;
  while (in >> piece) parts.push_back(piece);
  if (parts.empty()) return std::nullopt;
  for (const Pattern& p : patterns_) {
    if (p.name != parts[0]) continue;
    if (parts.size() != p.conjuncts.size() + 1) return std::nullopt;
    for (std::size_t i = 0; i < p.conjuncts.size(); ++i)
      if (p.conjuncts[i] == predicate) return parts[i + 1];
    return std::nullopt;
  }
  return std::nullopt;
}

std::vector<Feature> instantiate_features(const std::vector<Event>& events,
                                          const PatternSchema& schema,
                                          std::uint32_t cutoff) {
  if (events.empty()) raise(Errc::InvalidArgument, "no events");
  if (cutoff < 1) raise(Errc::InvalidArgument, "cutoff must be >= 1");
  std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
  for (const Event& e : events) {
    if (e.count == 0) raise(Errc::InvalidArgument, "event with count 0");
    for (std::string& c : schema.active_contexts(e.history))
      counts[{std::move(c), e.outcome}] += e.count;
  }
  std::vector<Feature> features;
  for (const auto& [key, n] : counts)
    if (n >= cutoff) features.push_back(Feature{key.first, key.second, 0.0});
  return features;
}

MaxentModel::MaxentModel(Vocabulary vocab, PatternSchema schema, std::vector<Feature> features,
                         std::uint32_t cutoff)
    : vocab_(std::move(vocab)),
      schema_(std::move(schema)),
      features_(std::move(features)),
      cutoff_(cutoff) {
  if (cutoff_ < 1) raise(Errc::InvalidArgument, "cutoff must be >= 1");
  rebuild_index();
}

void MaxentModel::rebuild_index() {
  context_ids_.clear();
  context_features_.clear();
  outcome_index_.assign(vocab_.size(), {});
  std::set<std::pair<std::string, std::string>> seen;
  for (std::uint32_t f = 0; f < features_.size(); ++f) {
    const Feature& feat = features_[f];
    if (!seen.insert({feat.context, feat.outcome}).second)
      raise(Errc::InvalidArgument, "duplicate feature " + feat.context + " / " + feat.outcome);
    auto oid = vocab_.id(feat.outcome);
    if (!oid) raise(Errc::InvalidArgument, "feature outcome not in vocabulary: " + feat.outcome);
    auto [it, fresh] = context_ids_.emplace(feat.context,
                                            static_cast<std::uint32_t>(context_features_.size()));
    if (fresh) context_features_.emplace_back();
    context_features_[it->second].emplace_back(*oid, f);
    outcome_index_[*oid].push_back(f);
  }
}

std::optional<std::uint32_t> MaxentModel::context_id(const std::string& context) const {
  auto it = context_ids_.find(context);
  if (it == context_ids_.end()) return std::nullopt;
  return it->second;
}

void MaxentModel::set_log_weight(std::uint32_t feature, double lw) {
  features_[feature].log_weight = lw;
}

void MaxentModel::log_prob_from_contexts(const std::vector<std::uint32_t>& ctxs,
                                         std::vector<double>* out) const {
  const std::size_t n = vocab_.size();
  out->assign(n, 0.0);
  for (std::uint32_t c : ctxs)
    for (const auto& [w, f] : context_features_[c]) (*out)[w] += features_[f].log_weight;
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : *out) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : *out) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  for (double& v : *out) v -= lse;
}

std::vector<double> MaxentModel::conditional_log_prob(const History& h) const {
  std::vector<std::uint32_t> ctxs;
  for (const std::string& c : schema_.active_contexts(h))
    if (auto id = context_id(c)) ctxs.push_back(*id);
  std::vector<double> out;
  log_prob_from_contexts(ctxs, &out);
  return out;
}

std::vector<double> MaxentModel::conditional_prob(const History& h) const {
  std::vector<double> out = conditional_log_prob(h);
  for (double& v : out) v = std::exp(v);
  return out;
}

// ---- serialization ----------------------------------------------------------

namespace {

std::string hex_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", d);
  return buf;
}

std::string next_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) raise(Errc::BadFormat, "truncated model file");
  return line;
}

std::uint64_t parse_count_line(const std::string& line, const std::string& key) {
  std::istringstream in(line);
  std::string k;
  std::uint64_t n = 0;
  if (!(in >> k >> n) || k != key) raise(Errc::BadFormat, "expected '" + key + " <n>'");
  return n;
}

}  // namespace

void MaxentModel::save(std::ostream& os) const {
  os << "surfgen-maxent v1\n";
  os << "schema " << schema_.id() << "\n";
  os << "patterns " << schema_.patterns().size() << "\n";
  for (const Pattern& p : schema_.patterns())
    os << "pattern " << p.name << ' ' << join_csv(p.conjuncts) << ' '
       << join_csv(p.require_empty) << "\n";
  os << "cutoff " << cutoff_ << "\n";
  os << "vocab " << vocab_.size() << "\n";
  for (const std::string& w : vocab_.words()) os << w << "\n";
  os << "features " << features_.size() << "\n";
  for (const Feature& f : features_)
    os << f.context << '\t' << f.outcome << '\t' << hex_double(f.log_weight) << "\n";
  os << "end\n";
}

MaxentModel MaxentModel::load(std::istream& is) {
  if (next_line(is) != "surfgen-maxent v1") raise(Errc::BadFormat, "not a model file");
  std::string line = next_line(is);
  if (line.rfind("schema ", 0) != 0) raise(Errc::BadFormat, "expected schema line");
  const std::string schema_id = line.substr(7);

  const std::uint64_t n_patterns = parse_count_line(next_line(is), "patterns");
  std::vector<Pattern> patterns;
  for (std::uint64_t i = 0; i < n_patterns; ++i) {
    std::istringstream in(next_line(is));
    std::string key, name, conj, empt;
    if (!(in >> key >> name >> conj >> empt) || key != "pattern")
      raise(Errc::BadFormat, "bad pattern line");
    patterns.push_back(Pattern{name, split_csv(conj), split_csv(empt)});
  }

  const auto cutoff = static_cast<std::uint32_t>(parse_count_line(next_line(is), "cutoff"));
  const std::uint64_t n_vocab = parse_count_line(next_line(is), "vocab");
  if (n_vocab == 0) raise(Errc::BadFormat, "empty vocabulary");
  std::vector<std::string> words;
  for (std::uint64_t i = 0; i + 1 < n_vocab; ++i) words.push_back(next_line(is));
  if (next_line(is) != kStopSymbol) raise(Errc::BadFormat, "last vocabulary entry must be the stop symbol");

  const std::uint64_t n_features = parse_count_line(next_line(is), "features");
  std::vector<Feature> features;
  features.reserve(n_features);
  for (std::uint64_t i = 0; i < n_features; ++i) {
    line = next_line(is);
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) raise(Errc::BadFormat, "bad feature line");
    Feature f;
    f.context = line.substr(0, t1);
    f.outcome = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string w = line.substr(t2 + 1);
    char* endp = nullptr;
    f.log_weight = std::strtod(w.c_str(), &endp);
    if (endp == w.c_str()) raise(Errc::BadFormat, "bad weight: " + w);
    features.push_back(std::move(f));
  }
  if (next_line(is) != "end") raise(Errc::BadFormat, "missing end marker");
  return MaxentModel(Vocabulary(words), PatternSchema(schema_id, std::move(patterns)),
                     std::move(features), cutoff);
}

// ---- training ----------------------------------------------------------------

namespace {

struct CompiledEvent {
  std::vector<std::uint32_t> ctxs;
  std::uint32_t outcome = 0;
  double count = 0.0;
};

// Accumulates, at the model's current weights and over events [lo, hi):
//   ll       total log-likelihood
//   expected per-feature model-expected count
//   hist     per-feature mass broken down by f# (stride B+1)
// score/fires/touched are per-worker scratch sized to the outcome count.
void accumulate_range(const MaxentModel& model, const std::vector<CompiledEvent>& events,
                      std::size_t lo, std::size_t hi, std::size_t stride, double* ll,
                      std::vector<double>* expected, std::vector<double>* hist,
                      std::vector<double>* score, std::vector<std::uint32_t>* fires,
                      std::vector<std::uint32_t>* touched) {
  const auto& by_ctx = model.context_features();
  const auto& feats = model.features();
  const double n_outcomes = static_cast<double>(model.vocab().size());
  for (std::size_t i = lo; i < hi; ++i) {
    const CompiledEvent& e = events[i];
    touched->clear();
    for (std::uint32_t c : e.ctxs) {
      for (const auto& [w, f] : by_ctx[c]) {
        if ((*fires)[w] == 0) touched->push_back(w);
        ++(*fires)[w];
        (*score)[w] += feats[f].log_weight;
      }
    }
    // Outcomes with no firing feature all sit at score 0; fold them into the
    // normalizer in one term instead of visiting each.
    double mx = touched->size() < model.vocab().size()
                    ? 0.0
                    : -std::numeric_limits<double>::infinity();
    for (std::uint32_t w : *touched) mx = std::max(mx, (*score)[w]);
    double z = (n_outcomes - static_cast<double>(touched->size())) * std::exp(-mx);
    for (std::uint32_t w : *touched) z += std::exp((*score)[w] - mx);
    const double lse = mx + std::log(z);
    *ll += e.count * ((*score)[e.outcome] - lse);
    for (std::uint32_t w : *touched) (*score)[w] = std::exp((*score)[w] - lse);  // now p(w|h)
    for (std::uint32_t c : e.ctxs) {
      for (const auto& [w, f] : by_ctx[c]) {
        const double v = e.count * (*score)[w];
        (*expected)[f] += v;
        (*hist)[f * stride + (*fires)[w]] += v;
      }
    }
    for (std::uint32_t w : *touched) {
      (*score)[w] = 0.0;
      (*fires)[w] = 0;
    }
  }
}

// Solves sum_m a_m * exp(delta * m) = target for delta, with a_m >= 0 given as
// hist row entries m = 1..B. Single-support rows have the closed form
// delta = log(target / a_m) / m; otherwise Newton on the log of the left side,
// which is increasing and convex, so the iteration converges from 0.
double solve_update(const double* row, std::size_t B, double target) {
  std::vector<std::pair<double, double>> terms;  // (m, log a_m)
  for (std::size_t m = 1; m <= B; ++m)
    if (row[m] > 0.0) terms.emplace_back(static_cast<double>(m), std::log(row[m]));
  if (terms.empty()) raise(Errc::InvalidArgument, "feature with no expected mass");
  const double log_target = std::log(target);
  if (terms.size() == 1) return (log_target - terms[0].second) / terms[0].first;
  double delta = 0.0;
  for (int it = 0; it < 100; ++it) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& [m, la] : terms) mx = std::max(mx, la + delta * m);
    double z = 0.0, mz = 0.0;
    for (const auto& [m, la] : terms) {
      const double w = std::exp(la + delta * m - mx);
      z += w;
      mz += m * w;
    }
    const double g = mx + std::log(z) - log_target;
    if (std::fabs(g) < 1e-13 * (1.0 + std::fabs(log_target))) break;
    delta -= g / (mz / z);
  }
  return delta;
}

}  // namespace

IisResult train_iis(const Vocabulary& vocab, const PatternSchema& schema,
                    const std::vector<Event>& events, std::vector<Feature> features,
                    std::uint32_t cutoff, const IisOptions& opts) {
  if (events.empty()) raise(Errc::InvalidArgument, "no events");
  if (opts.workers < 1) raise(Errc::InvalidArgument, "workers must be >= 1");
  if (!(opts.tol > 0.0)) raise(Errc::InvalidArgument, "tol must be positive");

  MaxentModel model(vocab, schema, std::move(features), cutoff);
  const std::size_t n_features = model.features().size();

  // Resolve every event's active contexts once and merge events that share
  // (contexts, outcome); the distribution only depends on those.
  std::map<std::pair<std::vector<std::uint32_t>, std::uint32_t>, double> merged;
  for (const Event& e : events) {
    if (e.count == 0) raise(Errc::InvalidArgument, "event with count 0");
    auto oid = model.vocab().id(e.outcome);
    if (!oid) raise(Errc::InvalidArgument, "event outcome not in vocabulary: " + e.outcome);
    std::vector<std::uint32_t> ctxs;
    for (const std::string& c : model.schema().active_contexts(e.history))
      if (auto id = model.context_id(c)) ctxs.push_back(*id);
    merged[{std::move(ctxs), *oid}] += e.count;
  }
  std::vector<CompiledEvent> compiled;
  compiled.reserve(merged.size());
  std::size_t max_active = 1;
  for (auto& [key, cnt] : merged) {
    compiled.push_back(CompiledEvent{key.first, key.second, cnt});
    max_active = std::max(max_active, key.first.size());
  }

  std::vector<double> empirical(n_features, 0.0);
  for (const CompiledEvent& e : compiled)
    for (std::uint32_t c : e.ctxs)
      for (const auto& [w, f] : model.context_features()[c])
        if (w == e.outcome) empirical[f] += e.count;
  for (std::size_t f = 0; f < n_features; ++f)
    if (empirical[f] <= 0.0)
      raise(Errc::InvalidArgument, "feature never fires on the events: " +
                                       model.features()[f].context + " / " +
                                       model.features()[f].outcome);

  const std::size_t stride = max_active + 1;  // f# of a firing pair is in [1, max_active]
  const std::uint32_t workers =
      static_cast<std::uint32_t>(std::min<std::size_t>(opts.workers, std::max<std::size_t>(compiled.size(), 1)));

  std::vector<double> expected(n_features, 0.0);
  std::vector<double> hist(n_features * stride, 0.0);
  double ll = 0.0;

  auto accumulate = [&]() {
    std::fill(expected.begin(), expected.end(), 0.0);
    std::fill(hist.begin(), hist.end(), 0.0);
    ll = 0.0;
    if (workers <= 1) {
      std::vector<double> score(model.vocab().size(), 0.0);
      std::vector<std::uint32_t> fires(model.vocab().size(), 0);
      std::vector<std::uint32_t> touched;
      accumulate_range(model, compiled, 0, compiled.size(), stride, &ll, &expected, &hist,
                       &score, &fires, &touched);
      return;
    }
    std::vector<std::vector<double>> w_expected(workers, std::vector<double>(n_features, 0.0));
    std::vector<std::vector<double>> w_hist(workers, std::vector<double>(n_features * stride, 0.0));
    std::vector<double> w_ll(workers, 0.0);
    std::vector<std::thread> pool;
    for (std::uint32_t k = 0; k < workers; ++k) {
      pool.emplace_back([&, k]() {
        const std::size_t lo = compiled.size() * k / workers;
        const std::size_t hi = compiled.size() * (k + 1) / workers;
        std::vector<double> score(model.vocab().size(), 0.0);
        std::vector<std::uint32_t> fires(model.vocab().size(), 0);
        std::vector<std::uint32_t> touched;
        accumulate_range(model, compiled, lo, hi, stride, &w_ll[k], &w_expected[k], &w_hist[k],
                         &score, &fires, &touched);
      });
    }
    for (std::thread& t : pool) t.join();
    // Fixed shard order keeps the sums deterministic for a given worker count.
    for (std::uint32_t k = 0; k < workers; ++k) {
      ll += w_ll[k];
      for (std::size_t f = 0; f < n_features; ++f) expected[f] += w_expected[k][f];
      for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += w_hist[k][i];
    }
  };

  auto max_gap = [&]() {
    double g = 0.0;
    for (std::size_t f = 0; f < n_features; ++f)
      g = std::max(g, std::fabs(expected[f] - empirical[f]) / std::max(1.0, empirical[f]));
    return g;
  };

  IisDiagnostics diag;
  diag.final_gap = std::numeric_limits<double>::infinity();
  for (std::uint32_t iter = 0; iter < opts.max_iters; ++iter) {
    accumulate();
    const double gap = max_gap();
    diag.log_likelihood_trace.push_back(ll);
    diag.final_gap = gap;
    if (opts.progress) opts.progress(iter, ll, gap);
    if (gap < opts.tol) {
      diag.converged = true;
      break;
    }
    for (std::uint32_t f = 0; f < n_features; ++f) {
      const double delta = solve_update(&hist[f * stride], max_active, empirical[f]);
      model.set_log_weight(f, model.features()[f].log_weight + delta);
    }
    ++diag.iterations;
  }
  if (!diag.converged && opts.max_iters > 0) {
    // Measure the state the final update left behind.
    accumulate();
    const double gap = max_gap();
    diag.log_likelihood_trace.push_back(ll);
    diag.final_gap = gap;
    diag.converged = gap < opts.tol;
    if (opts.progress) opts.progress(opts.max_iters, ll, gap);
  }
  return IisResult{std::move(model), std::move(diag)};
}

double log_likelihood(const MaxentModel& model, const std::vector<Event>& events) {
  double ll = 0.0;
  for (const Event& e : events) {
    auto oid = model.vocab().id(e.outcome);
    if (!oid) raise(Errc::InvalidArgument, "event outcome not in vocabulary: " + e.outcome);
    ll += e.count * model.conditional_log_prob(e.history)[*oid];
  }
  return ll;
}

}  // namespace surfgen
