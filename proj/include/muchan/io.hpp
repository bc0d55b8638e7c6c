#pragma once

// JSON formats. Matrices are lists of rows; an entry is [re, im] or a real
// number.
//   channel:   {"dim": d, "repr": "kraus" | "choi" | "superop", "matrices": [M, ...]}
//   generator: {"dim": d, "kind": "gkls", "H": M, "jumps": [M, ...]}
//              {"kind": "superop", "matrix": M}
//   algebra:   {"blocks": [[m, n], ...], "basis_change": M}

#include <string>
#include <vector>

#include "json.hpp"
#include "muchan/channels.hpp"
#include "muchan/structure.hpp"

namespace muchan {

using json = nlohmann::json;

CMat matrix_from_json(const json& j);
json matrix_to_json(const CMat& m);

Channel channel_from_json(const json& j);
json channel_to_json(const Channel& ch, Repr repr = Repr::Kraus);

Channel generator_from_json(const json& j);

BlockAlgebra block_algebra_from_json(const json& j);
json block_algebra_to_json(const BlockAlgebra& alg);

// Throws Parse for unreadable files or malformed JSON.
json read_json_file(const std::string& path);
// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace muchan
