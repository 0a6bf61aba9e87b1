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

#include "surfgen/nlg2.hpp"

#include <algorithm>
#include <cmath>

namespace surfgen {

std::vector<Event> nlg2_events(const std::vector<Template>& corpus) {
  std::vector<Event> events;
  for (const Template& t : corpus) {
    AttributeSet remaining = extract_attribute_set(t);
    std::string prev = kBoundarySymbol, prev2 = kBoundarySymbol;
    for (const Token& tok : t.tokens) {
      Event e;
      e.history.add(kPrev, prev);
      e.history.add(kPrev2, prev2);
      for (const std::string& a : remaining) e.history.add(kAttr, a);
      e.outcome = tok.text;
      events.push_back(std::move(e));
      if (tok.is_attribute()) remaining.erase(tok.text);
      prev2 = prev;
      prev = tok.text;
    }
    Event stop;
    stop.history.add(kPrev, prev);
    stop.history.add(kPrev2, prev2);
    for (const std::string& a : remaining) stop.history.add(kAttr, a);
    stop.outcome = kStopSymbol;
    events.push_back(std::move(stop));
  }
  return events;
}

PatternSchema nlg2_patterns() {
  return PatternSchema("nlg2", {
                                   Pattern{"noattr", {}, {kAttr}},
                                   Pattern{"bigram", {kPrev, kAttr}, {}},
                                   Pattern{"trigram", {kPrev, kPrev2, kAttr}, {}},
                               });
}

Vocabulary nlg2_vocabulary(const std::vector<Template>& corpus) {
  std::set<std::string> words;
  for (const Template& t : corpus)
    for (const Token& tok : t.tokens) words.insert(tok.text);
  return Vocabulary(std::vector<std::string>(words.begin(), words.end()));
}

namespace {

struct Cand {
  std::vector<std::uint32_t> words;
  std::vector<std::string> remaining;  // lex sorted
  double lp = 0.0;
};

struct Ext {
  std::uint32_t cand = 0;
  std::uint32_t outcome = 0;
  double lp = 0.0;
};

History cand_history(const Vocabulary& vocab, const Cand& c) {
  History h;
  const std::size_t n = c.words.size();
  h.add(kPrev, n >= 1 ? vocab.word(c.words[n - 1]) : kBoundarySymbol);
  h.add(kPrev2, n >= 2 ? vocab.word(c.words[n - 2]) : kBoundarySymbol);
  for (const std::string& a : c.remaining) h.add(kAttr, a);
  return h;
}

}  // namespace

std::vector<ScoredTemplate> nlg2_search(const MaxentModel& model, const AttributeSet& attrs,
                                        const Nlg2Config& cfg) {
  if (cfg.beam < 1 || cfg.max_len < 1) raise(Errc::InvalidArgument, "beam and max_len must be >= 1");
  if (attrs.empty()) raise(Errc::EmptyAttributeSet, "nothing to express");
  const Vocabulary& vocab = model.vocab();
  for (const std::string& a : attrs) {
    if (a.empty() || a[0] != '$') raise(Errc::UnknownAttribute, a + " is not an attribute name");
    if (!vocab.contains(a)) raise(Errc::UnknownAttribute, a + " never seen in training");
  }

  const std::uint32_t n_words = vocab.stop_id();  // word ids are 0..n_words-1
  std::vector<bool> is_attr(n_words, false);
  for (std::uint32_t w = 0; w < n_words; ++w) is_attr[w] = vocab.word(w)[0] == '$';

  std::vector<Cand> beam(1);
  beam[0].remaining.assign(attrs.begin(), attrs.end());
  std::vector<Cand> completed;

  // Lexicographic order over the word sequence a beam entry would become.
  auto ext_seq_less = [&](const Ext& x, const Ext& y) {
    const auto& wx = beam[x.cand].words;
    const auto& wy = beam[y.cand].words;
    const std::size_t nx = wx.size() + 1, ny = wy.size() + 1;
    for (std::size_t i = 0; i < std::min(nx, ny); ++i) {
      const std::string& a = i < wx.size() ? vocab.word(wx[i]) : vocab.word(x.outcome);
      const std::string& b = i < wy.size() ? vocab.word(wy[i]) : vocab.word(y.outcome);
      if (a != b) return a < b;
    }
    return nx < ny;
  };
  auto ext_less = [&](const Ext& x, const Ext& y) {
    if (x.lp != y.lp) return x.lp > y.lp;
    return ext_seq_less(x, y);
  };

  std::vector<Ext> exts;
  std::vector<double> dist;
  std::uint32_t len = 0;  // current beam's surface length
  while (!beam.empty() && completed.size() < cfg.beam) {
    const bool allow_words = len < cfg.max_len;
    exts.clear();
    for (std::uint32_t i = 0; i < beam.size(); ++i) {
      const Cand& c = beam[i];
      dist = model.conditional_log_prob(cand_history(vocab, c));
      // A sequence ends by predicting the stop symbol; it only survives if
      // every requested attribute has been mentioned.
      if (!c.words.empty() && c.remaining.empty()) {
        Cand done = c;
        done.lp += dist[vocab.stop_id()];
        completed.push_back(std::move(done));
      }
      if (!allow_words) continue;
      for (std::uint32_t w = 0; w < n_words; ++w) {
        if (is_attr[w]) {
          // Mentioning an attribute that is not still pending (already used,
          // or never requested) kills the candidate; skip the extension.
          const std::string& name = vocab.word(w);
          if (!std::binary_search(c.remaining.begin(), c.remaining.end(), name)) continue;
        }
        exts.push_back(Ext{i, w, c.lp + dist[w]});
      }
    }
    if (!allow_words) break;
    const std::size_t keep = std::min<std::size_t>(cfg.beam, exts.size());
    std::partial_sort(exts.begin(), exts.begin() + static_cast<std::ptrdiff_t>(keep), exts.end(),
                      ext_less);
    std::vector<Cand> next;
    next.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      const Ext& x = exts[k];
      Cand c;
      c.words = beam[x.cand].words;
      c.words.push_back(x.outcome);
      c.remaining = beam[x.cand].remaining;
      if (is_attr[x.outcome]) {
        auto it = std::lower_bound(c.remaining.begin(), c.remaining.end(), vocab.word(x.outcome));
        c.remaining.erase(it);
      }
      c.lp = x.lp;
      next.push_back(std::move(c));
    }
    beam = std::move(next);
    ++len;
  }

  const double log_prior = -std::log(static_cast<double>(cfg.max_len));
  std::vector<ScoredTemplate> out;
  out.reserve(completed.size());
  for (const Cand& c : completed) {
    ScoredTemplate st;
    for (std::uint32_t w : c.words) st.tmpl.tokens.push_back(Token(vocab.word(w)));
    st.log_probability = c.lp + log_prior;
    st.probability = std::exp(st.log_probability);
    out.push_back(std::move(st));
  }
  std::sort(out.begin(), out.end(), [](const ScoredTemplate& a, const ScoredTemplate& b) {
    if (a.log_probability != b.log_probability) return a.log_probability > b.log_probability;
    return a.tmpl.text() < b.tmpl.text();
  });
  if (out.size() > cfg.beam) out.resize(cfg.beam);
  return out;
}

std::optional<ScoredTemplate> nlg2_generate(const MaxentModel& model, const AttributeSet& attrs,
                                            const Nlg2Config& cfg) {
  std::vector<ScoredTemplate> all = nlg2_search(model, attrs, cfg);
  if (all.empty()) return std::nullopt;
  return std::move(all.front());
}

IisResult nlg2_train(const std::vector<Template>& corpus, const Nlg2Config& cfg,
                     const IisOptions& iis) {
  if (cfg.cutoff < 1) raise(Errc::InvalidArgument, "cutoff must be >= 1");
  Vocabulary vocab = nlg2_vocabulary(corpus);
  std::vector<Event> events = nlg2_events(corpus);
  if (events.empty()) raise(Errc::InvalidArgument, "empty corpus");
  PatternSchema schema = nlg2_patterns();
  std::vector<Feature> features = instantiate_features(events, schema, cfg.cutoff);
  return train_iis(vocab, schema, events, std::move(features), cfg.cutoff, iis);
}

}  // namespace surfgen
