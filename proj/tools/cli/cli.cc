/*
 * Copyright 2026 The lexattr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "config.h"
#include "lexattr/attribution.h"
#include "lexattr/corpus.h"
#include "lexattr/errors.h"
#include "lexattr/faithfulness.h"
#include "lexattr/highlight.h"
#include "lexattr/oracle.h"
#include "lexattr/process_oracle.h"
#include "lexattr/render.h"
#include "lexattr/saliency.h"
#include "lexattr/stats.h"

namespace lexattr::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string corpus_path;
  std::string external;
  std::string params;
  bool ansi = false;
};

struct Context {
  RunConfig config;
  std::size_t threads = 1;
  std::ostream& out;
  std::ostream& err;
};

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  f << content;
  if (!f) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

fs::path PrepareOutput(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIo,
                fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }
  WriteFile(dir / "config.json", RunConfigToJson(config));
  return dir;
}

RunConfig ResolveConfig(const CommonOptions& opts) {
  RunConfig config =
      opts.config_path.empty() ? RunConfig{} : LoadRunConfig(opts.config_path);
  if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
  if (!opts.external.empty()) {
    config.oracle.kind = OracleKind::kExternal;
    config.oracle.command = opts.external;
  }
  if (!opts.params.empty()) {
    config.oracle.kind = OracleKind::kBuiltin;
    config.oracle.params_path = opts.params;
  }
  ValidateRunConfig(config);
  return config;
}

std::unique_ptr<GradientOracle> MakeOracle(const RunConfig& config,
                                           const Corpus* corpus) {
  if (config.oracle.kind == OracleKind::kExternal) {
    ProcessOracleOptions options;
    options.timeout_ms = config.oracle.timeout_ms;
    options.batch_size = config.batch_size;
    return std::make_unique<ProcessOracle>(config.oracle.command, options);
  }
  if (!config.oracle.params_path.empty()) {
    return std::make_unique<BuiltinOracle>(
        LoadParamsFile(config.oracle.params_path));
  }
  std::vector<std::string> texts;
  if (corpus) {
    for (const CorpusRecord& r : corpus->records) texts.push_back(r.text);
  }
  return std::make_unique<BuiltinOracle>(InitParams(
      config.oracle.arch, Vocabulary::FromTexts(texts, config.oracle.arch.tokenizer),
      config.oracle.seed));
}

Corpus ReadCorpus(const CommonOptions& opts, const Context& ctx) {
  Corpus corpus = LoadCorpus(opts.corpus_path, ctx.config.clean);
  for (const LineError& e : corpus.errors) {
    ctx.err << fmt::format("{}:{}: skipped: {}\n", opts.corpus_path, e.line,
                           e.message);
  }
  return corpus;
}

Target ResolveTarget(const CorpusRecord& r, const RunConfig& config,
                     const OracleDescriptor& d) {
  const std::optional<std::size_t> t = r.target ? r.target : config.target;
  if (d.head == HeadKind::kScalar) {
    if (r.target) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("record {}: scalar oracle takes no target", r.id));
    }
    return std::nullopt;
  }
  if (!t) {
    throw Error(ErrorKind::kValidation,
                fmt::format("record {}: class oracle needs a target", r.id));
  }
  if (*t >= d.n_classes) {
    throw Error(ErrorKind::kValidation,
                fmt::format("record {}: target {} outside {} classes", r.id, *t,
                            d.n_classes));
  }
  return t;
}

Error WithRecord(const Error& e, const std::string& id) {
  return Error(e.kind(), fmt::format("record {}: {}", id, e.message()));
}

struct Attributed {
  EmbeddedText embedded;
  AttributionVector a;
};

// Attributes every record, in parallel when the oracle allows it.
std::vector<Attributed> AttributeAll(GradientOracle& oracle, const Corpus& corpus,
                                     const Context& ctx) {
  const AttributionSettings settings = MakeAttributionSettings(ctx.config);
  std::vector<Attributed> out(corpus.records.size());
  const std::size_t threads = oracle.thread_safe() ? ctx.threads : 1;
  ParallelFor(out.size(), threads, [&](std::size_t i) {
    const CorpusRecord& r = corpus.records[i];
    try {
      const Target target = ResolveTarget(r, ctx.config, oracle.descriptor());
      out[i].embedded = oracle.Embed(r.text);
      out[i].a = Attribute(oracle, out[i].embedded.tokens, out[i].embedded.x,
                           settings, target);
    } catch (const Error& e) {
      throw WithRecord(e, r.id);
    }
  });
  return out;
}

double GlobalScale(const RunConfig& config, const std::vector<Attributed>& all) {
  if (config.global_scale) return *config.global_scale;
  double scale = 0.0;
  for (const Attributed& x : all) scale = std::max(scale, std::abs(x.a.f_x));
  return scale > 0.0 ? scale : 1.0;
}

int CmdAttribute(const CommonOptions& opts, Context& ctx) {
  const Corpus corpus = ReadCorpus(opts, ctx);
  auto oracle = MakeOracle(ctx.config, &corpus);
  const fs::path dir = PrepareOutput(ctx.config);
  const std::vector<Attributed> all = AttributeAll(*oracle, corpus, ctx);
  const double scale = GlobalScale(ctx.config, all);
  std::string jsonl;
  std::vector<ReportEntry> report;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const TokenizedText& tokens = all[i].embedded.tokens;
    const AttributionVector& a = all[i].a;
    const WordAttribution words = MergeTokensToWords(tokens, a.scores, a.f_x);
    json line;
    line["id"] = corpus.records[i].id;
    line["method"] = MethodName(a.config.method);
    line["baseline"] = BaselineName(a.config.baseline);
    line["quadrature"] = QuadratureName(a.config.rule.kind);
    line["steps"] = a.config.rule.steps;
    line["f_x"] = a.f_x;
    line["f_x0"] = a.f_x0;
    line["residual"] = CompletenessResidual(a);
    json toks = json::array();
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const Token& tok = tokens.tokens[t];
      toks.push_back({{"t", tok.surface},
                      {"s", tok.char_start},
                      {"e", tok.char_end},
                      {"score", a.scores[t]}});
    }
    line["tokens"] = toks;
    json ws = json::array();
    for (const WordScore& w : words.words) {
      ws.push_back({{"w", w.surface}, {"score", w.score}});
    }
    line["words"] = ws;
    jsonl += line.dump() + "\n";
    report.push_back(
        {corpus.records[i].id, a.f_x, NormalizeForDisplay(words, scale)});
  }
  WriteFile(dir / "attributions.jsonl", jsonl);
  WriteFile(dir / "report.html", RenderHtmlReport("Attributions", report));
  ctx.err << fmt::format("attributed {} record(s) into {}\n", all.size(),
                         dir.string());
  return kExitOk;
}

int CmdFaithfulness(const CommonOptions& opts, Context& ctx) {
  const Corpus corpus = ReadCorpus(opts, ctx);
  auto oracle = MakeOracle(ctx.config, &corpus);
  const fs::path dir = PrepareOutput(ctx.config);
  const RunConfig& c = ctx.config;
  std::vector<SweepDocument> docs;
  for (const CorpusRecord& r : corpus.records) {
    docs.push_back({r.id, r.text, ResolveTarget(r, c, oracle->descriptor())});
  }
  SweepSpec spec;
  spec.methods = c.sweep_methods.empty() ? std::vector<Method>{c.method}
                                         : c.sweep_methods;
  spec.baselines = c.sweep_baselines.empty()
                       ? std::vector<BaselineKind>{c.baseline}
                       : c.sweep_baselines;
  spec.steps = c.sweep_steps.empty() ? std::vector<std::size_t>{c.steps}
                                     : c.sweep_steps;
  spec.quadrature = c.quadrature;
  spec.grid = FractionGrid{c.f_grid};
  spec.level = c.level;
  spec.removal = c.removal;
  spec.shap.n_samples = c.shap_samples;
  spec.shap.noise_stdev = c.shap_noise;
  spec.shap.seed = c.seed;
  spec.threads = ctx.threads;
  spec.batch_size = c.batch_size;
  const SweepResult result = RunSweep(*oracle, docs, spec);
  WriteFile(dir / "faithfulness_rows.csv", SweepRowsCsv(result));
  WriteFile(dir / "faithfulness_summary.csv", SweepSummaryCsv(result));
  std::string failures = "document_id,combination,message\n";
  bool oracle_failed = false;
  for (const SweepFailure& f : result.failures) {
    failures += fmt::format("{},{},{}\n", CsvField(f.document_id),
                            CsvField(f.combination), CsvField(f.message));
    ctx.err << fmt::format("record {} [{}]: {}\n", f.document_id, f.combination,
                           f.message);
    oracle_failed |= f.kind && IsOracleFailure(*f.kind);
  }
  WriteFile(dir / "faithfulness_failures.csv", failures);
  ctx.err << fmt::format("{} row(s), {} failure(s) into {}\n",
                         result.rows.size(), result.failures.size(),
                         dir.string());
  if (oracle_failed) return kExitOracle;
  return result.rows.empty() ? kExitValidation : kExitOk;
}

int CmdRender(const CommonOptions& opts, Context& ctx) {
  const Corpus corpus = ReadCorpus(opts, ctx);
  auto oracle = MakeOracle(ctx.config, &corpus);
  const fs::path dir = PrepareOutput(ctx.config);
  const std::vector<Attributed> all = AttributeAll(*oracle, corpus, ctx);
  const double scale = GlobalScale(ctx.config, all);
  std::vector<ReportEntry> report;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const CorpusRecord& r = corpus.records[i];
    WordAttribution wa = MergeTokensToWords(all[i].embedded.tokens,
                                            all[i].a.scores, all[i].a.f_x);
    const std::optional<DepAnnotation> dep = r.dependencies();
    switch (ctx.config.negation) {
      case NegationMode::kOff:
        break;
      case NegationMode::kHeuristic:
        wa = LinkNegationsHeuristic(wa);
        break;
      case NegationMode::kAnnotations:
        if (!dep) {
          throw Error(ErrorKind::kValidation,
                      fmt::format("record {}: no dependency annotations", r.id));
        }
        wa = LinkNegations(wa, *dep);
        break;
      case NegationMode::kAuto:
        wa = dep ? LinkNegations(wa, *dep) : LinkNegationsHeuristic(wa);
        break;
    }
    wa = ZeroIncoherentSigns(wa);
    report.push_back({r.id, wa.f_x, NormalizeForDisplay(wa, scale)});
    if (opts.ansi) {
      ctx.out << fmt::format("{} (F = {:.4f}): ", r.id, wa.f_x)
              << Emit(report.back().spans, EmitFormat::kAnsi) << "\n";
    }
  }
  WriteFile(dir / "report.html", RenderHtmlReport("Attribution report", report));
  ctx.err << fmt::format("rendered {} record(s) into {}\n", report.size(),
                         dir.string());
  return kExitOk;
}

int CmdExtract(const CommonOptions& opts, Context& ctx) {
  const RunConfig& c = ctx.config;
  if (c.oracle.kind != OracleKind::kBuiltin) {
    throw Error(ErrorKind::kValidation, "extract trains the builtin model");
  }
  const Corpus corpus = ReadCorpus(opts, ctx);
  const fs::path dir = PrepareOutput(c);
  std::vector<LabeledDocument> docs;
  for (const CorpusRecord& r : corpus.records) {
    LabeledDocument d{r.id, r.text, r.label, {}};
    for (const WordAnnotation& w : r.words) d.lemmas.push_back(w.lemma);
    docs.push_back(std::move(d));
  }
  ExtractionConfig ec;
  ec.arch = c.oracle.arch;
  ec.trainer = c.trainer;
  ec.baseline = c.baseline;
  ec.rule = {c.quadrature, c.steps};
  ec.top_k = c.top_k;
  ec.aggregation = c.aggregation;
  ec.na_policy = c.na_policy;
  ec.bins = c.bins;
  ec.threads = ctx.threads;
  const ExtractionResult result = ExtractKeywords(docs, ec);
  WriteFile(dir / "keywords.csv", RenderKeywordTableCsv(result.table));
  WriteFile(dir / "keywords.html",
            RenderKeywordTableHtml(result.table, "Class keywords"));
  SaveParamsFile(result.params, (dir / "model.json").string());
  std::string trace = "step,loss\n";
  for (std::size_t i = 0; i < result.trace.loss.size(); ++i) {
    trace += fmt::format("{},{:.17g}\n", i, result.trace.loss[i]);
  }
  WriteFile(dir / "training.csv", trace);
  ctx.err << fmt::format(
      "trained to accuracy {} in {} epoch(s); {} class(es), {} NA document(s) "
      "excluded; tables in {}\n",
      result.trace.accuracy, result.trace.epochs, result.class_names.size(),
      result.excluded_na, dir.string());
  return kExitOk;
}

int CmdHighlights(const CommonOptions& opts, Context& ctx) {
  const Corpus corpus = ReadCorpus(opts, ctx);
  auto oracle = MakeOracle(ctx.config, &corpus);
  const fs::path dir = PrepareOutput(ctx.config);
  const RunConfig& c = ctx.config;
  std::vector<HighlightDocument> docs;
  std::optional<Target> target;
  for (const CorpusRecord& r : corpus.records) {
    if (r.highlights.empty()) continue;
    const Target t = ResolveTarget(r, c, oracle->descriptor());
    if (target && *target != t) {
      throw Error(ErrorKind::kValidation,
                  "highlight records must share one target");
    }
    target = t;
    docs.push_back({r.id, r.text, r.sentences, r.highlights});
  }
  if (docs.empty()) {
    throw Error(ErrorKind::kValidation, "no record carries highlights");
  }
  HighlightRunOptions options;
  options.attribution = MakeAttributionSettings(c);
  options.target = *target;
  options.noise = {c.noise, c.noise_draws, c.seed};
  options.threads = ctx.threads;
  const HighlightRun run = EvaluateHighlights(*oracle, docs, options);
  WriteFile(dir / "highlight_records.csv", HighlightRecordsCsv(run.records));
  WriteFile(dir / "highlight_slopes.csv", SlopesCsv(FitSlopes(run.records)));
  WriteFile(dir / "fh_histogram.csv", FhHistogramCsv(run.records));
  if (c.per_reader) {
    std::map<std::string, std::vector<HighlightRecord>> by_reader;
    for (const HighlightRecord& r : run.records) by_reader[r.reader].push_back(r);
    std::string out = "reader,";
    std::string header = SlopesCsv(BinnedSlopes{});
    out += header;
    for (const auto& [reader, records] : by_reader) {
      const std::string csv = SlopesCsv(FitSlopes(records));
      std::size_t pos = csv.find('\n') + 1;
      while (pos < csv.size()) {
        const std::size_t end = csv.find('\n', pos);
        out += CsvField(reader) + "," + csv.substr(pos, end - pos + 1);
        pos = end + 1;
      }
    }
    WriteFile(dir / "highlight_slopes_by_reader.csv", out);
  }
  ctx.err << fmt::format(
      "{} record(s) from {} sentence(s); skipped: {} zero-agency, {} "
      "all-zero after polish, {} unhighlighted\n",
      run.records.size(), run.sentences, run.zero_agency,
      run.all_zero_after_polish, run.unhighlighted);
  return kExitOk;
}

int CmdOracleCheck(const CommonOptions& opts, Context& ctx) {
  auto oracle = MakeOracle(ctx.config, nullptr);
  const OracleDescriptor& d = oracle->descriptor();
  ctx.out << fmt::format(
      "protocol version: {}\nembedding dim: {}\nhead: {}\nclasses: {}\n"
      "vocab policy: {}\nmask row: {}\npad row: {}\nmean row: {}\n",
      d.version, d.embedding_dim,
      d.head == HeadKind::kScalar ? "scalar" : "classes", d.n_classes,
      d.vocab_policy.empty() ? "-" : d.vocab_policy,
      d.mask_embedding ? "yes" : "no", d.pad_embedding ? "yes" : "no",
      d.mean_embedding ? "yes" : "no");
  const EmbeddedText e = oracle->Embed("oracle check");
  const Target target =
      d.head == HeadKind::kScalar ? Target{} : Target{std::size_t{0}};
  const ModelOutput o = oracle->Evaluate(e.x, target, true);
  if (!o.gradient || !o.gradient->SameShape(e.x) ||
      !AllFinite(o.gradient->values.values())) {
    throw Error(ErrorKind::kProtocolError, "probe returned an unusable gradient");
  }
  ctx.out << fmt::format("probe: {} tokens, F = {:.6g}\n", e.tokens.size(),
                         o.value);
  (void)opts;
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Token attribution, faithfulness and highlight evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "Worker thread bound")
      ->check(CLI::PositiveNumber);

  CommonOptions opts;
  auto add_common = [&](CLI::App* sub, bool corpus) {
    sub->add_option("--config", opts.config_path, "JSON run config")
        ->check(CLI::ExistingFile);
    sub->add_option("--external", opts.external,
                    "Use an external oracle command instead of the config's");
    sub->add_option("--params", opts.params, "Builtin model parameter file");
    if (corpus) {
      sub->add_option("--out", opts.out_dir, "Output directory");
      sub->add_option("corpus", opts.corpus_path, "Corpus JSONL file")
          ->required();
    }
  };
  auto* attribute = app.add_subcommand("attribute", "Per-token attributions");
  add_common(attribute, true);
  auto* faith = app.add_subcommand("faithfulness", "Comprehensiveness/sufficiency sweep");
  add_common(faith, true);
  auto* extract = app.add_subcommand("extract", "Overfit and rank class keywords");
  add_common(extract, true);
  auto* highlights = app.add_subcommand("highlights", "Highlight agreement study");
  add_common(highlights, true);
  auto* render = app.add_subcommand("render", "Colored word report");
  add_common(render, true);
  render->add_flag("--ansi", opts.ansi, "Also print ANSI-colored text");
  auto* check = app.add_subcommand("oracle-check", "Handshake and probe an oracle");
  add_common(check, false);

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    Context ctx{ResolveConfig(opts), threads, out, err};
    if (attribute->parsed()) return CmdAttribute(opts, ctx);
    if (faith->parsed()) return CmdFaithfulness(opts, ctx);
    if (extract->parsed()) return CmdExtract(opts, ctx);
    if (highlights->parsed()) return CmdHighlights(opts, ctx);
    if (render->parsed()) return CmdRender(opts, ctx);
    return CmdOracleCheck(opts, ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return IsOracleFailure(e.kind()) ? kExitOracle : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace lexattr::cli
