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


#include "config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lexattr/errors.h"

namespace lexattr::cli {
namespace {

using json = nlohmann::json;

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorKind::kValidation, "config: " + message);
}

void CheckKeys(const json& j, std::string_view where,
               const std::set<std::string>& allowed) {
  if (!j.is_object()) Invalid(fmt::format("{} must be an object", where));
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) Invalid(fmt::format("unknown key {}.{}", where, key));
  }
}

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      Invalid(fmt::format("bad value for {}", key));
    }
  }
}

std::string ReadString(const json& j, const char* key, std::string fallback) {
  Read(j, key, fallback);
  return fallback;
}

std::string_view NegationName(NegationMode m) {
  switch (m) {
    case NegationMode::kAuto: return "auto";
    case NegationMode::kHeuristic: return "heuristic";
    case NegationMode::kAnnotations: return "annotations";
    case NegationMode::kOff: return "off";
  }
  return "auto";
}

NegationMode ParseNegation(std::string_view s) {
  if (s == "auto") return NegationMode::kAuto;
  if (s == "heuristic") return NegationMode::kHeuristic;
  if (s == "annotations") return NegationMode::kAnnotations;
  if (s == "off") return NegationMode::kOff;
  Invalid(fmt::format("unknown negation mode '{}'", s));
}

}  // namespace

RunConfig ParseRunConfig(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    Invalid(std::string("not valid JSON: ") + e.what());
  }
  CheckKeys(j, "config",
            {"oracle", "method", "baseline", "steps", "quadrature", "fidelity",
             "f_grid", "seed", "output_dir", "level", "removal", "target",
             "batch_size", "clean", "gradshap", "sweep", "render", "extract",
             "highlights"});
  RunConfig c;
  bool fidelity = false;
  Read(j, "fidelity", fidelity);
  if (fidelity) c.quadrature = QuadratureKind::kPaperEq6;

  if (auto it = j.find("oracle"); it != j.end()) {
    const json& o = *it;
    CheckKeys(o, "oracle",
              {"kind", "arch", "seed", "params", "command", "timeout_ms"});
    const std::string kind = ReadString(o, "kind", "builtin");
    if (kind == "builtin") {
      c.oracle.kind = OracleKind::kBuiltin;
    } else if (kind == "external") {
      c.oracle.kind = OracleKind::kExternal;
    } else {
      Invalid(fmt::format("unknown oracle kind '{}'", kind));
    }
    if (auto a = o.find("arch"); a != o.end()) c.oracle.arch = ArchFromJson(a->dump());
    Read(o, "seed", c.oracle.seed);
    Read(o, "params", c.oracle.params_path);
    Read(o, "command", c.oracle.command);
    Read(o, "timeout_ms", c.oracle.timeout_ms);
  }
  c.method = ParseMethod(ReadString(j, "method", std::string(MethodName(c.method))));
  c.baseline =
      ParseBaseline(ReadString(j, "baseline", std::string(BaselineName(c.baseline))));
  Read(j, "steps", c.steps);
  c.quadrature = ParseQuadrature(
      ReadString(j, "quadrature", std::string(QuadratureName(c.quadrature))));
  Read(j, "f_grid", c.f_grid);
  Read(j, "seed", c.seed);
  Read(j, "output_dir", c.output_dir);
  c.level = ParseLevel(ReadString(j, "level", std::string(LevelName(c.level))));
  c.removal = ParseRemoval(ReadString(j, "removal", "delete"));
  if (auto it = j.find("target"); it != j.end() && !it->is_null()) {
    std::size_t t = 0;
    Read(j, "target", t);
    c.target = t;
  }
  Read(j, "batch_size", c.batch_size);
  Read(j, "clean", c.clean);

  if (auto it = j.find("gradshap"); it != j.end()) {
    CheckKeys(*it, "gradshap", {"samples", "noise_stdev"});
    Read(*it, "samples", c.shap_samples);
    if (auto n = it->find("noise_stdev"); n != it->end() && !n->is_null()) {
      double v = 0.0;
      Read(*it, "noise_stdev", v);
      c.shap_noise = v;
    }
  }
  if (auto it = j.find("sweep"); it != j.end()) {
    CheckKeys(*it, "sweep", {"methods", "baselines", "steps"});
    std::vector<std::string> names;
    Read(*it, "methods", names);
    for (const auto& n : names) c.sweep_methods.push_back(ParseMethod(n));
    names.clear();
    Read(*it, "baselines", names);
    for (const auto& n : names) c.sweep_baselines.push_back(ParseBaseline(n));
    Read(*it, "steps", c.sweep_steps);
  }
  if (auto it = j.find("render"); it != j.end()) {
    CheckKeys(*it, "render", {"global_scale", "negation"});
    if (auto g = it->find("global_scale"); g != it->end() && !g->is_null()) {
      double v = 0.0;
      Read(*it, "global_scale", v);
      c.global_scale = v;
    }
    c.negation = ParseNegation(ReadString(*it, "negation", "auto"));
  }
  if (auto it = j.find("extract"); it != j.end()) {
    CheckKeys(*it, "extract",
              {"top_k", "aggregation", "na", "bins", "learning_rate",
               "max_epochs", "seed"});
    Read(*it, "top_k", c.top_k);
    const std::string agg = ReadString(*it, "aggregation", "sum");
    if (agg == "sum") {
      c.aggregation = Aggregation::kSum;
    } else if (agg == "mean") {
      c.aggregation = Aggregation::kMean;
    } else {
      Invalid(fmt::format("unknown aggregation '{}'", agg));
    }
    const std::string na = ReadString(*it, "na", "exclude");
    if (na == "exclude") {
      c.na_policy = NaPolicy::kExclude;
    } else if (na == "class") {
      c.na_policy = NaPolicy::kExtraClass;
    } else {
      Invalid(fmt::format("unknown NA policy '{}'", na));
    }
    if (auto b = it->find("bins"); b != it->end()) {
      for (const json& bin : *b) {
        CheckKeys(bin, "extract.bins[]", {"name", "lo", "hi"});
        LabelBin lb;
        Read(bin, "name", lb.name);
        Read(bin, "lo", lb.lo);
        Read(bin, "hi", lb.hi);
        c.bins.push_back(lb);
      }
    }
    Read(*it, "learning_rate", c.trainer.learning_rate);
    Read(*it, "max_epochs", c.trainer.max_epochs);
    Read(*it, "seed", c.trainer.seed);
  }
  if (auto it = j.find("highlights"); it != j.end()) {
    CheckKeys(*it, "highlights", {"noise", "draws", "per_reader"});
    const std::string noise = ReadString(*it, "noise", "analytic");
    if (noise == "analytic") {
      c.noise = NoiseMode::kAnalytic;
    } else if (noise == "monte-carlo") {
      c.noise = NoiseMode::kMonteCarlo;
    } else {
      Invalid(fmt::format("unknown noise mode '{}'", noise));
    }
    Read(*it, "draws", c.noise_draws);
    Read(*it, "per_reader", c.per_reader);
  }
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseRunConfig(buf.str());
}

void ValidateRunConfig(const RunConfig& c) {
  const bool external = c.oracle.kind == OracleKind::kExternal;
  if (external && c.oracle.command.empty()) {
    Invalid("external oracle needs a command");
  }
  if (external && c.oracle.timeout_ms <= 0) Invalid("timeout_ms must be positive");
  auto uses_deeplift = c.method == Method::kDeepLift;
  for (Method m : c.sweep_methods) uses_deeplift |= m == Method::kDeepLift;
  if (external && uses_deeplift) {
    Invalid("deeplift needs the builtin oracle; external oracles expose no layers");
  }
  if (c.steps == 0) Invalid("steps must be >= 1");
  for (std::size_t s : c.sweep_steps) {
    if (s == 0) Invalid("sweep steps must be >= 1");
  }
  if (c.batch_size == 0) Invalid("batch_size must be >= 1");
  if (c.shap_samples == 0) Invalid("gradshap.samples must be >= 1");
  if (c.shap_noise && *c.shap_noise < 0.0) Invalid("gradshap.noise_stdev must be >= 0");
  FractionGrid{c.f_grid}.Validate();
  if (c.global_scale && !(*c.global_scale > 0.0)) {
    Invalid("render.global_scale must be positive");
  }
  if (c.top_k == 0) Invalid("extract.top_k must be >= 1");
  for (const LabelBin& b : c.bins) {
    if (b.name.empty() || b.lo > b.hi) {
      Invalid(fmt::format("bad label bin '{}'", b.name));
    }
  }
  if (c.trainer.max_epochs == 0) Invalid("extract.max_epochs must be >= 1");
  if (!(c.trainer.learning_rate > 0.0)) Invalid("extract.learning_rate must be positive");
  if (c.noise == NoiseMode::kMonteCarlo && c.noise_draws < 2) {
    Invalid("highlights.draws must be >= 2");
  }
}

std::string RunConfigToJson(const RunConfig& c) {
  json j;
  json o;
  o["kind"] = c.oracle.kind == OracleKind::kBuiltin ? "builtin" : "external";
  if (c.oracle.kind == OracleKind::kBuiltin) {
    o["arch"] = json::parse(ArchToJson(c.oracle.arch));
    o["seed"] = c.oracle.seed;
    if (!c.oracle.params_path.empty()) o["params"] = c.oracle.params_path;
  } else {
    o["command"] = c.oracle.command;
    o["timeout_ms"] = c.oracle.timeout_ms;
  }
  j["oracle"] = o;
  j["method"] = MethodName(c.method);
  j["baseline"] = BaselineName(c.baseline);
  j["steps"] = c.steps;
  j["quadrature"] = QuadratureName(c.quadrature);
  j["f_grid"] = c.f_grid;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["level"] = LevelName(c.level);
  j["removal"] = c.removal == RemovalMode::kDelete ? "delete" : "mask";
  j["target"] = c.target ? json(*c.target) : json(nullptr);
  j["batch_size"] = c.batch_size;
  j["clean"] = c.clean;
  j["gradshap"] = {{"samples", c.shap_samples},
                   {"noise_stdev", c.shap_noise ? json(*c.shap_noise) : json(nullptr)}};
  json sweep;
  sweep["methods"] = json::array();
  for (Method m : c.sweep_methods) sweep["methods"].push_back(MethodName(m));
  sweep["baselines"] = json::array();
  for (BaselineKind b : c.sweep_baselines) sweep["baselines"].push_back(BaselineName(b));
  sweep["steps"] = c.sweep_steps;
  j["sweep"] = sweep;
  j["render"] = {{"global_scale", c.global_scale ? json(*c.global_scale) : json(nullptr)},
                 {"negation", NegationName(c.negation)}};
  json bins = json::array();
  for (const LabelBin& b : c.bins) {
    bins.push_back({{"name", b.name}, {"lo", b.lo}, {"hi", b.hi}});
  }
  j["extract"] = {{"top_k", c.top_k},
                  {"aggregation", c.aggregation == Aggregation::kSum ? "sum" : "mean"},
                  {"na", c.na_policy == NaPolicy::kExclude ? "exclude" : "class"},
                  {"bins", bins},
                  {"learning_rate", c.trainer.learning_rate},
                  {"max_epochs", c.trainer.max_epochs},
                  {"seed", c.trainer.seed}};
  j["highlights"] = {
      {"noise", c.noise == NoiseMode::kAnalytic ? "analytic" : "monte-carlo"},
      {"draws", c.noise_draws},
      {"per_reader", c.per_reader}};
  return j.dump(2) + "\n";
}

AttributionSettings MakeAttributionSettings(const RunConfig& c) {
  AttributionSettings s;
  s.method = c.method;
  s.baseline = c.baseline;
  s.rule = {c.quadrature, c.steps};
  s.shap.n_samples = c.shap_samples;
  s.shap.noise_stdev = c.shap_noise;
  s.shap.seed = c.seed;
  s.batch_size = c.batch_size;
  return s;
}

}  // namespace lexattr::cli
