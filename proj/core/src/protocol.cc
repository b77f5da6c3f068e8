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

#include "lexattr/protocol.h"

#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lexattr/errors.h"

namespace lexattr {
namespace protocol {
namespace {

using nlohmann::json;

void AppendDoubles(std::string& out, std::span<const double> values) {
  out.push_back('[');
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    out += FormatDouble(values[i]);
  }
  out.push_back(']');
}

void AppendPadding(std::string& out, const EmbeddingMatrix& x) {
  if (x.padding.empty()) return;
  out += ",\"pad\":[";
  bool first = true;
  for (std::size_t i = 0; i < x.padding.size(); ++i) {
    if (!x.padding[i]) continue;
    if (!first) out.push_back(',');
    out += std::to_string(i);
    first = false;
  }
  out.push_back(']');
}

std::string Quote(std::string_view s) { return json(std::string(s)).dump(); }

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorKind::kProtocolError, what);
}

json ParseLine(const std::string& line) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) Malformed("response is not a JSON object");
    return j;
  } catch (const json::exception& e) {
    Malformed(std::string("unparseable line: ") + e.what());
  }
}

void CheckId(const json& j, std::int64_t expected_id) {
  if (!j.contains("id") || !j["id"].is_number_integer() ||
      j["id"].get<std::int64_t>() != expected_id) {
    Malformed(fmt::format("response id does not match pending request {}",
                          expected_id));
  }
  if (j.contains("error")) {
    throw Error(ErrorKind::kOracleReportedError,
                j["error"].is_string() ? j["error"].get<std::string>()
                                       : j["error"].dump());
  }
}

std::vector<double> ReadDoubles(const json& j, const char* field) {
  if (!j.is_array()) Malformed(std::string(field) + " is not an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& v : j) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_null()) {
      out.push_back(std::nan(""));
    } else {
      Malformed(std::string(field) + " holds a non-number");
    }
  }
  return out;
}

std::vector<std::uint8_t> ReadPadding(const json& j, std::size_t rows) {
  if (!j.contains("pad")) return {};
  std::vector<std::uint8_t> mask(rows, 0);
  for (const json& v : j["pad"]) {
    const auto r = v.get<std::size_t>();
    if (r >= rows) Malformed("pad row out of range");
    mask[r] = 1;
  }
  return mask;
}

EmbeddingMatrix ReadMatrix(const std::vector<double>& data, std::size_t rows,
                           std::size_t cols) {
  if (data.size() != rows * cols) {
    Malformed(fmt::format("data length {} != {}x{}", data.size(), rows, cols));
  }
  EmbeddingMatrix x(rows, cols);
  std::copy(data.begin(), data.end(), x.values.values().begin());
  return x;
}

}  // namespace

std::string FormatDouble(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.17g}", v);
}

std::string EncodeHandshakeRequest(std::int64_t id) {
  return fmt::format("{{\"kind\":\"handshake\",\"id\":{},\"version\":{}}}", id,
                     kProtocolVersion);
}

std::string EncodeHandshakeResponse(std::int64_t id,
                                    const OracleDescriptor& d) {
  std::string out = fmt::format(
      "{{\"id\":{},\"version\":{},\"d\":{},\"head\":\"{}\",\"n_classes\":{}",
      id, d.version, d.embedding_dim,
      d.head == HeadKind::kScalar ? "scalar" : "classes", d.n_classes);
  if (!d.vocab_policy.empty()) out += ",\"vocab\":" + Quote(d.vocab_policy);
  auto row = [&](const char* name, const std::optional<std::vector<double>>& v) {
    if (!v) return;
    out += fmt::format(",\"{}\":", name);
    AppendDoubles(out, *v);
  };
  row("mask", d.mask_embedding);
  row("pad", d.pad_embedding);
  row("mean", d.mean_embedding);
  out.push_back('}');
  return out;
}

std::string EncodeEmbedRequest(std::int64_t id, std::string_view text) {
  return fmt::format("{{\"kind\":\"embed\",\"id\":{},\"text\":{}}}", id,
                     Quote(text));
}

std::string EncodeEmbedResponse(std::int64_t id, const EmbeddedText& e) {
  std::string out = fmt::format("{{\"id\":{},\"shape\":[{},{}],\"x\":", id,
                                e.x.rows(), e.x.cols());
  AppendDoubles(out, e.x.values.values());
  out += ",\"tokens\":[";
  for (std::size_t i = 0; i < e.tokens.tokens.size(); ++i) {
    const Token& t = e.tokens.tokens[i];
    if (i) out.push_back(',');
    out += fmt::format("{{\"s\":{},\"e\":{},\"w\":{},\"special\":{},\"t\":{}}}",
                       t.char_start, t.char_end,
                       t.word_index ? std::to_string(*t.word_index) : "null",
                       t.is_special() ? "true" : "false", Quote(t.surface));
  }
  out.push_back(']');
  AppendPadding(out, e.x);
  out.push_back('}');
  return out;
}

std::string EncodeEvalRequest(std::int64_t id,
                              std::span<const EmbeddingMatrix> xs,
                              const Target& target, bool want_gradient) {
  const EmbeddingMatrix& first = xs.front();
  std::string out = fmt::format(
      "{{\"kind\":\"eval\",\"id\":{},\"shape\":[{},{}],\"target\":{},"
      "\"grad\":{}",
      id, first.rows(), first.cols(),
      target ? std::to_string(*target) : "null",
      want_gradient ? "true" : "false");
  if (xs.size() == 1) {
    out += ",\"x\":";
    AppendDoubles(out, first.values.values());
  } else {
    out += ",\"xs\":[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out.push_back(',');
      AppendDoubles(out, xs[i].values.values());
    }
    out.push_back(']');
  }
  AppendPadding(out, first);
  out.push_back('}');
  return out;
}

std::string EncodeEvalResponse(std::int64_t id,
                               std::span<const ModelOutput> outputs,
                               bool batched) {
  std::string out = fmt::format("{{\"id\":{}", id);
  if (!batched) {
    const ModelOutput& o = outputs.front();
    out += ",\"value\":" + FormatDouble(o.value);
    if (o.gradient) {
      out += ",\"grad\":";
      AppendDoubles(out, o.gradient->values.values());
    }
  } else {
    out += ",\"values\":[";
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (i) out.push_back(',');
      out += FormatDouble(outputs[i].value);
    }
    out.push_back(']');
    if (!outputs.empty() && outputs.front().gradient) {
      out += ",\"grads\":[";
      for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (i) out.push_back(',');
        AppendDoubles(out, outputs[i].gradient->values.values());
      }
      out.push_back(']');
    }
  }
  out.push_back('}');
  return out;
}

std::string EncodeError(std::int64_t id, std::string_view message) {
  return fmt::format("{{\"id\":{},\"error\":{}}}", id, Quote(message));
}

OracleDescriptor DecodeHandshakeResponse(const std::string& line,
                                         std::int64_t expected_id) {
  const json j = ParseLine(line);
  CheckId(j, expected_id);
  try {
    OracleDescriptor d;
    d.version = j.at("version").get<int>();
    if (d.version != kProtocolVersion) {
      throw Error(ErrorKind::kVersionMismatch,
                  fmt::format("oracle speaks version {}, expected {}",
                              d.version, kProtocolVersion));
    }
    d.embedding_dim = j.at("d").get<std::size_t>();
    const std::string head = j.at("head").get<std::string>();
    if (head == "scalar") {
      d.head = HeadKind::kScalar;
      d.n_classes = 1;
    } else if (head == "classes") {
      d.head = HeadKind::kClasses;
      d.n_classes = j.at("n_classes").get<std::size_t>();
    } else {
      Malformed("unknown head '" + head + "'");
    }
    if (d.embedding_dim == 0) Malformed("d must be positive");
    d.vocab_policy = j.value("vocab", std::string());
    auto row = [&](const char* name) -> std::optional<std::vector<double>> {
      if (!j.contains(name)) return std::nullopt;
      auto v = ReadDoubles(j[name], name);
      if (v.size() != d.embedding_dim) {
        Malformed(std::string(name) + " row length != d");
      }
      return v;
    };
    d.mask_embedding = row("mask");
    d.pad_embedding = row("pad");
    d.mean_embedding = row("mean");
    return d;
  } catch (const json::exception& e) {
    Malformed(std::string("handshake: ") + e.what());
  }
}

EmbeddedText DecodeEmbedResponse(const std::string& line,
                                 std::int64_t expected_id,
                                 std::string_view text) {
  const json j = ParseLine(line);
  CheckId(j, expected_id);
  try {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) Malformed("shape must have two entries");
    EmbeddedText out;
    out.x = ReadMatrix(ReadDoubles(j.at("x"), "x"), shape[0], shape[1]);
    out.x.padding = ReadPadding(j, shape[0]);
    out.tokens.source = std::string(text);
    const json& tokens = j.at("tokens");
    if (tokens.size() != shape[0]) Malformed("token count != rows");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const json& t = tokens[i];
      Token tok;
      tok.char_start = t.at("s").get<std::size_t>();
      tok.char_end = t.at("e").get<std::size_t>();
      if (t.contains("w") && !t["w"].is_null()) {
        tok.word_index = t["w"].get<std::size_t>();
      }
      const bool special = t.value("special", false);
      if (t.contains("t")) {
        tok.surface = t["t"].get<std::string>();
      } else if (!special) {
        tok.surface = Utf8Substr(text, tok.char_start, tok.char_end);
      }
      if (special) {
        if (tok.surface == kPadSurface || out.x.is_padding(i)) {
          tok.special = SpecialToken::kPad;
        } else if (tok.surface == kMaskSurface) {
          tok.special = SpecialToken::kMask;
        } else {
          tok.special = i == 0 ? SpecialToken::kBos : SpecialToken::kEos;
        }
      }
      out.tokens.tokens.push_back(std::move(tok));
    }
    return out;
  } catch (const json::exception& e) {
    Malformed(std::string("embed: ") + e.what());
  }
}

std::vector<ModelOutput> DecodeEvalResponse(const std::string& line,
                                            std::int64_t expected_id,
                                            std::size_t count,
                                            const EmbeddingMatrix& shape_of,
                                            bool want_gradient) {
  const json j = ParseLine(line);
  CheckId(j, expected_id);
  const std::size_t rows = shape_of.rows(), cols = shape_of.cols();
  auto grad_of = [&](const json& g) {
    EmbeddingMatrix m = ReadMatrix(ReadDoubles(g, "grad"), rows, cols);
    m.padding = shape_of.padding;
    return m;
  };
  try {
    std::vector<ModelOutput> out;
    if (count == 1 && j.contains("value")) {
      const json& v = j["value"];
      out.push_back({v.is_null() ? std::nan("") : v.get<double>(), {}});
      if (want_gradient) {
        if (!j.contains("grad")) Malformed("gradient requested but absent");
        out.back().gradient = grad_of(j["grad"]);
      }
      return out;
    }
    const auto values = ReadDoubles(j.at("values"), "values");
    if (values.size() != count) Malformed("batch size mismatch in values");
    for (double v : values) out.push_back({v, {}});
    if (want_gradient) {
      const json& grads = j.at("grads");
      if (grads.size() != count) Malformed("batch size mismatch in grads");
      for (std::size_t i = 0; i < count; ++i) {
        out[i].gradient = grad_of(grads[i]);
      }
    }
    return out;
  } catch (const json::exception& e) {
    Malformed(std::string("eval: ") + e.what());
  }
}

}  // namespace protocol

std::string HandleRequestLine(GradientOracle& oracle, const std::string& line) {
  using nlohmann::json;
  std::int64_t id = -1;
  try {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      return protocol::EncodeError(id, std::string("malformed request: ") +
                                           e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j.contains("id")) {
      return protocol::EncodeError(id, "request needs kind and id");
    }
    id = j["id"].get<std::int64_t>();
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "handshake") {
      if (j.value("version", 0) != kProtocolVersion) {
        return protocol::EncodeError(
            id, fmt::format("unsupported version, server speaks {}",
                            kProtocolVersion));
      }
      return protocol::EncodeHandshakeResponse(id, oracle.descriptor());
    }
    if (kind == "embed") {
      return protocol::EncodeEmbedResponse(
          id, oracle.Embed(j.at("text").get<std::string>()));
    }
    if (kind == "eval") {
      const auto shape = j.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) {
        return protocol::EncodeError(id, "shape must have two entries");
      }
      Target target;
      if (j.contains("target") && !j["target"].is_null()) {
        target = j["target"].get<std::size_t>();
      }
      const bool want_gradient = j.value("grad", false);
      std::vector<std::uint8_t> padding;
      if (j.contains("pad")) {
        padding.assign(shape[0], 0);
        for (const json& r : j["pad"]) {
          const auto row = r.get<std::size_t>();
          if (row >= shape[0]) return protocol::EncodeError(id, "pad out of range");
          padding[row] = 1;
        }
      }
      const bool batched = j.contains("xs");
      std::vector<EmbeddingMatrix> xs;
      auto add = [&](const json& data) {
        const auto v = data.get<std::vector<double>>();
        if (v.size() != shape[0] * shape[1]) {
          throw Error(ErrorKind::kShapeError, "data length != shape");
        }
        EmbeddingMatrix x(shape[0], shape[1]);
        std::copy(v.begin(), v.end(), x.values.values().begin());
        x.padding = padding;
        xs.push_back(std::move(x));
      };
      if (batched) {
        for (const json& data : j["xs"]) add(data);
      } else {
        add(j.at("x"));
      }
      const auto outputs = oracle.EvaluateBatch(xs, target, want_gradient);
      return protocol::EncodeEvalResponse(id, outputs, batched);
    }
    return protocol::EncodeError(id, "unknown kind '" + kind + "'");
  } catch (const std::exception& e) {
    return protocol::EncodeError(id, e.what());
  }
}

void ServeOracle(GradientOracle& oracle, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << HandleRequestLine(oracle, line) << '\n';
    out.flush();
  }
}

}  // namespace lexattr
