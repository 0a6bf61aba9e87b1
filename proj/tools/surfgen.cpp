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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "surfgen/errors.hpp"
#include "surfgen/evalkit.hpp"
#include "surfgen/nlg1.hpp"
#include "surfgen/nlg2.hpp"
#include "surfgen/nlg3.hpp"

namespace {

using namespace surfgen;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Opts {
  std::string system;
  std::string corpus, treebank, model, bindings, out;
  std::string baseline = "nlg1";
  std::vector<std::string> judgments;
  std::string attrs;
  std::string tmpl;  // fill positional
  std::uint32_t beam = 0;     // 0 = per-system default
  std::uint32_t max_len = 0;  // 0 = default (30)
  std::uint32_t cutoff = 0;   // 0 = per-system default
  std::uint32_t iters = 100;
  double tol = 1e-4;
  std::uint64_t seed = 1;
  std::uint32_t workers = 1;
  std::uint32_t count = 6000;
};

int usage_error(const std::string& msg) {
  std::cerr << "usage error: " << msg << "\n";
  return kExitUsage;
}

Nlg2Config nlg2_config(const Opts& o) {
  Nlg2Config cfg;
  if (o.beam) cfg.beam = o.beam;
  if (o.max_len) cfg.max_len = o.max_len;
  if (o.cutoff) cfg.cutoff = o.cutoff;
  return cfg;
}

Nlg3Config nlg3_config(const Opts& o) {
  Nlg3Config cfg;
  if (o.beam) cfg.beam = o.beam;
  if (o.max_len) cfg.max_tokens = o.max_len;
  if (o.cutoff) cfg.cutoff = o.cutoff;
  return cfg;
}

AttributeSet parse_attr_flag(const std::string& flag) {
  AttributeSet attrs;
  std::string part;
  for (std::size_t i = 0; i <= flag.size(); ++i) {
    if (i < flag.size() && flag[i] != ',' && flag[i] != ' ') {
      part += flag[i];
      continue;
    }
    if (!part.empty()) attrs.insert(part);
    part.clear();
  }
  if (attrs.empty()) raise(Errc::InvalidArgument, "no attribute names in --attrs");
  return attrs;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::IoError, "cannot open " + path);
  return out;
}

IisOptions iis_options(const Opts& o) {
  IisOptions iis;
  iis.max_iters = o.iters;
  iis.tol = o.tol;
  iis.workers = o.workers;
  iis.progress = [](std::uint32_t iter, double ll, double gap) {
    std::printf("iter %u log-likelihood %.6f gap %.6g\n", iter, ll, gap);
  };
  return iis;
}

void echo_config(const std::string& sub, std::initializer_list<std::pair<const char*, std::string>> kv) {
  std::cerr << "# " << sub;
  for (const auto& [k, v] : kv) {
    if (!v.empty()) std::cerr << ' ' << k << '=' << v;
  }
  std::cerr << "\n";
}

std::string u2s(std::uint64_t v) { return std::to_string(v); }

int cmd_train(const Opts& o) {
  if (o.system.empty()) return usage_error("train requires --system");
  if (o.model.empty()) return usage_error("train requires --model");
  if (o.system == "nlg3") {
    if (o.treebank.empty()) return usage_error("train --system nlg3 requires --treebank");
  } else if (o.corpus.empty()) {
    return usage_error("train --system " + o.system + " requires --corpus");
  }

  if (o.system == "nlg1") {
    echo_config("train", {{"system", o.system}, {"corpus", o.corpus}, {"model", o.model}});
    const FrequencyTable table = train_nlg1(read_template_corpus(o.corpus));
    auto out = open_out(o.model);
    save_frequency_table(table, out);
    std::printf("entries %zu\n", table.counts.size());
    return kExitOk;
  }
  if (o.system == "nlg2") {
    const Nlg2Config cfg = nlg2_config(o);
    echo_config("train", {{"system", o.system},
                          {"corpus", o.corpus},
                          {"model", o.model},
                          {"beam", u2s(cfg.beam)},
                          {"max-len", u2s(cfg.max_len)},
                          {"cutoff", u2s(cfg.cutoff)},
                          {"iters", u2s(o.iters)},
                          {"workers", u2s(o.workers)}});
    IisResult r = nlg2_train(read_template_corpus(o.corpus), cfg, iis_options(o));
    auto out = open_out(o.model);
    r.model.save(out);
    std::printf("%s after %u iterations, gap %.6g, features %zu\n",
                r.diagnostics.converged ? "converged" : "stopped", r.diagnostics.iterations,
                r.diagnostics.final_gap, r.model.features().size());
    return kExitOk;
  }
  const Nlg3Config cfg = nlg3_config(o);
  echo_config("train", {{"system", o.system},
                        {"treebank", o.treebank},
                        {"model", o.model},
                        {"beam", u2s(cfg.beam)},
                        {"max-len", u2s(cfg.max_tokens)},
                        {"cutoff", u2s(cfg.cutoff)},
                        {"iters", u2s(o.iters)},
                        {"workers", u2s(o.workers)}});
  IisResult r = nlg3_train(read_treebank(o.treebank), cfg, iis_options(o));
  auto out = open_out(o.model);
  r.model.save(out);
  std::printf("%s after %u iterations, gap %.6g, features %zu\n",
              r.diagnostics.converged ? "converged" : "stopped", r.diagnostics.iterations,
              r.diagnostics.final_gap, r.model.features().size());
  return kExitOk;
}

MaxentModel load_model_for(const std::string& system, const std::string& path) {
  auto in = open_in(path);
  MaxentModel model = MaxentModel::load(in);
  if (model.schema().id() != system)
    raise(Errc::BadFormat,
          path + " holds a " + model.schema().id() + " model, not " + system);
  return model;
}

int cmd_generate(const Opts& o) {
  if (o.system.empty()) return usage_error("generate requires --system");
  if (o.model.empty()) return usage_error("generate requires --model");
  if (o.attrs.empty()) return usage_error("generate requires --attrs");
  const AttributeSet attrs = parse_attr_flag(o.attrs);

  echo_config("generate", {{"system", o.system},
                           {"model", o.model},
                           {"attrs", canonical_attrs(attrs)},
                           {"beam", o.beam ? u2s(o.beam) : std::string()},
                           {"max-len", o.max_len ? u2s(o.max_len) : std::string()}});

  if (o.system == "nlg1") {
    auto in = open_in(o.model);
    const FrequencyTable table = load_frequency_table(in);
    const auto tmpl = nlg1_generate(table, attrs);
    if (!tmpl) {
      std::printf("# no output\n");
      return kExitOk;
    }
    std::printf("%.6g\t%s\n", *nlg1_score(table, attrs), tmpl->text().c_str());
    return kExitOk;
  }
  if (o.system == "nlg2") {
    const MaxentModel model = load_model_for("nlg2", o.model);
    const auto results = nlg2_search(model, attrs, nlg2_config(o));
    if (results.empty()) {
      std::printf("# no output\n");
      return kExitOk;
    }
    for (const ScoredTemplate& st : results)
      std::printf("%.6g\t%s\n", st.probability, st.tmpl.text().c_str());
    return kExitOk;
  }
  if (o.system == "nlg3") {
    const MaxentModel model = load_model_for("nlg3", o.model);
    const auto results = nlg3_search(model, attrs, nlg3_config(o));
    if (results.empty()) {
      std::printf("# no output\n");
      return kExitOk;
    }
    for (const ScoredTree& st : results)
      std::printf("%.6g\t%s\n", st.probability, linearize(st.tree).text().c_str());
    return kExitOk;
  }
  return usage_error("unknown system: " + o.system);
}

int cmd_fill(const Opts& o) {
  if (o.bindings.empty()) return usage_error("fill requires --bindings");
  echo_config("fill", {{"bindings", o.bindings}, {"template", o.tmpl}});
  const Bindings bindings = read_bindings(o.bindings);
  auto fill_one = [&bindings](const std::string& text) {
    // accept raw template lines or generate output (probability<TAB>text)
    const std::size_t tab = text.rfind('\t');
    const std::string body = tab == std::string::npos ? text : text.substr(tab + 1);
    const Template t = parse_template_line(body);
    std::printf("%s\n", fill_slots(t, bindings).c_str());
  };
  if (!o.tmpl.empty()) {
    fill_one(o.tmpl);
    return kExitOk;
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fill_one(line);
  }
  return kExitOk;
}

int cmd_evaluate(const Opts& o) {
  if (o.corpus.empty()) return usage_error("evaluate requires --corpus (the test corpus)");
  if (o.judgments.empty()) return usage_error("evaluate requires at least one --judgments file");
  std::string files;
  for (const std::string& j : o.judgments) {
    if (!files.empty()) files += ',';
    files += j;
  }
  echo_config("evaluate",
              {{"corpus", o.corpus}, {"judgments", files}, {"baseline", o.baseline}});
  const auto counts = dedupe_attribute_sets(read_template_corpus(o.corpus));
  std::vector<Judgment> judgments;
  for (const std::string& path : o.judgments) {
    std::vector<Judgment> part = read_judgments(path);
    judgments.insert(judgments.end(), std::make_move_iterator(part.begin()),
                     std::make_move_iterator(part.end()));
  }
  const ScoreReport report = score_report(judgments, counts, o.baseline);
  std::fputs(render_report(report).c_str(), stdout);
  return kExitOk;
}

int cmd_synth(const Opts& o) {
  if (o.corpus.empty() || o.treebank.empty() || o.out.empty())
    return usage_error("synth requires --corpus, --treebank and --out (output paths)");
  echo_config("synth", {{"corpus", o.corpus},
                        {"treebank", o.treebank},
                        {"out", o.out},
                        {"n", u2s(o.count)},
                        {"seed", u2s(o.seed)}});
  const SynthCorpus corpus = synth_corpus(SynthGrammar::flights(), o.seed, o.count);
  write_template_corpus(corpus.train, o.corpus);
  write_treebank(corpus.treebank, o.treebank);
  write_template_corpus(corpus.test, o.out);
  std::printf("train %zu treebank %zu test %zu\n", corpus.train.size(),
              corpus.treebank.size(), corpus.test.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trainable surface generation: frequency, word-sequence and "
               "dependency-tree systems"};
  app.require_subcommand(1);
  Opts o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--system", o.system, "nlg1, nlg2 or nlg3")
        ->check(CLI::IsMember({"nlg1", "nlg2", "nlg3"}));
    sub->add_option("--corpus", o.corpus, "template corpus path");
    sub->add_option("--treebank", o.treebank, "dependency treebank path");
    sub->add_option("--model", o.model, "model file path");
    sub->add_option("--attrs", o.attrs, "attribute names, comma or space separated");
    sub->add_option("--bindings", o.bindings, "attribute value bindings path");
    sub->add_option("--judgments", o.judgments, "judgment file path (repeatable)");
    sub->add_option("--baseline", o.baseline, "baseline system for error reduction");
    sub->add_option("--beam", o.beam, "candidates kept per search step (N)");
    sub->add_option("--max-len", o.max_len, "surface length cap (M)");
    sub->add_option("--cutoff", o.cutoff, "feature count cutoff (K)");
    sub->add_option("--iters", o.iters, "max training iterations");
    sub->add_option("--tol", o.tol, "training convergence tolerance");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--workers", o.workers, "training worker threads");
    sub->add_option("--n", o.count, "synthetic corpus size");
    sub->add_option("--out", o.out, "output path");
  };

  CLI::App* train = app.add_subcommand("train", "fit a generation model");
  CLI::App* generate = app.add_subcommand("generate", "rank templates for an attribute set");
  CLI::App* fill = app.add_subcommand("fill", "substitute attribute values into templates");
  CLI::App* evaluate = app.add_subcommand("evaluate", "score judged outputs");
  CLI::App* synth = app.add_subcommand("synth", "emit a synthetic corpus");
  for (CLI::App* sub : {train, generate, fill, evaluate, synth}) add_common(sub);
  fill->add_option("template", o.tmpl, "template text (default: read stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(o);
    if (generate->parsed()) return cmd_generate(o);
    if (fill->parsed()) return cmd_fill(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (synth->parsed()) return cmd_synth(o);
  } catch (const surfgen::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
