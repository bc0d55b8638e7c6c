#include "muchan/io.hpp"

#include <filesystem>
#include <fstream>

#include "muchan/dynamics.hpp"

namespace muchan {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorKind::Parse, what); }

cplx entry_from_json(const json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  parse_error("matrix entry must be a number or [re, im]");
}

Index dim_field(const json& j) {
  if (!j.contains("dim")) return -1;
  if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) parse_error("\"dim\" must be a positive integer");
  return static_cast<Index>(j["dim"].get<long long>());
}

void require_dim(const CMat& m, Index rows, const char* what) {
  if (m.rows() != rows || m.cols() != rows)
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + " has the wrong size");
}

}  // namespace

CMat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) parse_error("matrix must be a non-empty list of rows");
  const auto rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) parse_error("matrix rows must be non-empty lists");
  const auto cols = static_cast<Index>(j[0].size());
  CMat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) parse_error("matrix rows have unequal lengths");
    for (Index c = 0; c < cols; ++c) m(r, c) = entry_from_json(row[static_cast<std::size_t>(c)]);
  }
  if (!is_finite(m)) throw Error(ErrorKind::NotFinite, "matrix has a non-finite entry");
  return m;
}

json matrix_to_json(const CMat& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    out.push_back(std::move(row));
  }
  return out;
}

Channel channel_from_json(const json& j) {
  if (!j.is_object()) parse_error("channel file must hold a JSON object");
  if (!j.contains("repr") || !j["repr"].is_string()) parse_error("channel needs a \"repr\" string");
  if (!j.contains("matrices") || !j["matrices"].is_array() || j["matrices"].empty())
    parse_error("channel needs a non-empty \"matrices\" list");
  const std::string repr = j["repr"].get<std::string>();
  const Index d = dim_field(j);
  std::vector<CMat> mats;
  for (const json& m : j["matrices"]) mats.push_back(matrix_from_json(m));
  if (repr == "kraus") {
    if (d > 0)
      for (const CMat& k : mats) require_dim(k, d, "Kraus operator");
    return Channel::from_kraus(std::move(mats));
  }
  if (mats.size() != 1) parse_error("\"" + repr + "\" takes exactly one matrix");
  if (d > 0) require_dim(mats.front(), d * d, repr.c_str());
  if (repr == "choi") return Channel::from_choi(std::move(mats.front()));
  if (repr == "superop") return Channel::from_superop(std::move(mats.front()));
  parse_error("unknown repr \"" + repr + "\"");
}

json channel_to_json(const Channel& ch, Repr repr) {
  json out;
  out["dim"] = ch.dim();
  json mats = json::array();
  switch (repr) {
    case Repr::Kraus:
      out["repr"] = "kraus";
      for (const CMat& k : kraus_of(ch)) mats.push_back(matrix_to_json(k));
      break;
    case Repr::Choi:
      out["repr"] = "choi";
      mats.push_back(matrix_to_json(ch.choi()));
      break;
    case Repr::Superop:
      out["repr"] = "superop";
      mats.push_back(matrix_to_json(ch.superop()));
      break;
  }
  out["matrices"] = std::move(mats);
  return out;
}

Channel generator_from_json(const json& j) {
  if (!j.is_object()) parse_error("generator file must hold a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) parse_error("generator needs a \"kind\" string");
  const std::string kind = j["kind"].get<std::string>();
  const Index d = dim_field(j);
  if (kind == "superop") {
    if (!j.contains("matrix")) parse_error("superop generator needs \"matrix\"");
    CMat s = matrix_from_json(j["matrix"]);
    if (d > 0) require_dim(s, d * d, "generator superoperator");
    return Channel::from_superop(std::move(s));
  }
  if (kind == "gkls") {
    if (d < 1) parse_error("gkls generator needs \"dim\"");
    CMat h = j.contains("H") ? matrix_from_json(j["H"]) : CMat(CMat::Zero(d, d));
    require_dim(h, d, "Hamiltonian");
    std::vector<CMat> jumps;
    if (j.contains("jumps")) {
      if (!j["jumps"].is_array()) parse_error("\"jumps\" must be a list");
      for (const json& m : j["jumps"]) {
        jumps.push_back(matrix_from_json(m));
        require_dim(jumps.back(), d, "jump operator");
      }
    }
    return GKLSData::build(std::move(h), std::move(jumps)).generator();
  }
  parse_error("unknown generator kind \"" + kind + "\"");
}

BlockAlgebra block_algebra_from_json(const json& j) {
  if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array()) parse_error("algebra needs a \"blocks\" list");
  BlockAlgebra alg;
  for (const json& b : j["blocks"]) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number_integer() || !b[1].is_number_integer())
      parse_error("each block must be [m, n]");
    alg.blocks.emplace_back(b[0].get<Index>(), b[1].get<Index>());
  }
  if (j.contains("basis_change") && !j["basis_change"].is_null()) alg.basis_change = matrix_from_json(j["basis_change"]);
  alg.validate();
  return alg;
}

json block_algebra_to_json(const BlockAlgebra& alg) {
  json out;
  json blocks = json::array();
  for (const auto& [m, n] : alg.blocks) blocks.push_back({m, n});
  out["blocks"] = std::move(blocks);
  if (alg.basis_change) out["basis_change"] = matrix_to_json(*alg.basis_change);
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_error(path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::InvalidArgument, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace muchan
