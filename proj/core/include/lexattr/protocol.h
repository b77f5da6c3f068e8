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

#ifndef LEXATTR_PROTOCOL_H_
#define LEXATTR_PROTOCOL_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lexattr/oracle.h"

namespace lexattr {

// Line-delimited JSON gradient-oracle protocol, version 1.
//
//   -> {"kind":"handshake","id":0,"version":1}
//   <- {"id":0,"version":1,"d":16,"head":"scalar"|"classes","n_classes":k,
//       "mask":[...],"pad":[...],"mean":[...]}          (rows optional)
//   -> {"kind":"embed","id":n,"text":"..."}
//   <- {"id":n,"shape":[L,d],"x":[...],"tokens":[{"s":..,"e":..,"w":..,
//       "special":..,"t":".."}...],"pad":[rows]}         ("t","pad" optional)
//   -> {"kind":"eval","id":n,"shape":[L,d],"x":[...],"target":k|null,
//       "grad":true,"pad":[rows]}
//   <- {"id":n,"value":v,"grad":[...]}
//   -> {"kind":"eval",...,"xs":[[...],[...]]}             (batched form)
//   <- {"id":n,"values":[...],"grads":[[...],...]}
//   <- {"id":n,"error":"..."}
//
// Every double is written with 17 significant digits.
namespace protocol {

std::string FormatDouble(double v);

std::string EncodeHandshakeRequest(std::int64_t id);
std::string EncodeHandshakeResponse(std::int64_t id,
                                    const OracleDescriptor& descriptor);
std::string EncodeEmbedRequest(std::int64_t id, std::string_view text);
std::string EncodeEmbedResponse(std::int64_t id, const EmbeddedText& embedded);
// All matrices must share one shape and padding mask. A single matrix uses
// the unbatched "x" form.
std::string EncodeEvalRequest(std::int64_t id,
                              std::span<const EmbeddingMatrix> xs,
                              const Target& target, bool want_gradient);
std::string EncodeEvalResponse(std::int64_t id,
                               std::span<const ModelOutput> outputs,
                               bool batched);
std::string EncodeError(std::int64_t id, std::string_view message);

// Decoders throw Error(kProtocolError) on malformed lines,
// Error(kVersionMismatch) on a foreign version and
// Error(kOracleReportedError) when the line is an error record.
OracleDescriptor DecodeHandshakeResponse(const std::string& line,
                                         std::int64_t expected_id);
EmbeddedText DecodeEmbedResponse(const std::string& line,
                                 std::int64_t expected_id,
                                 std::string_view text);
std::vector<ModelOutput> DecodeEvalResponse(const std::string& line,
                                            std::int64_t expected_id,
                                            std::size_t count,
                                            const EmbeddingMatrix& shape_of,
                                            bool want_gradient);

}  // namespace protocol

// Answers protocol requests read line by line from `in` until EOF. Oracle
// failures become error records; the loop itself never throws on bad input.
void ServeOracle(GradientOracle& oracle, std::istream& in, std::ostream& out);

// Answers one request line. Exposed for fault-injecting fixtures.
std::string HandleRequestLine(GradientOracle& oracle, const std::string& line);

}  // namespace lexattr

#endif  // LEXATTR_PROTOCOL_H_
