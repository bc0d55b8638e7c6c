#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "muchan/io.hpp"

namespace muchan::cli {

struct RunConfig {
  double tol = 1e-8;  // witness nonnegativity tolerance
  int fw_iters = 5000;
  int starts = 16;
  std::uint64_t seed = 0;
  std::string grid = "0.001:10:64:log";
  unsigned nmax = 12;
  std::string format = "json";
  std::string out;
  std::string witness;  // optional witness map (channel JSON)
};

ClassifyConfig classify_config(const RunConfig& cfg);

json cmd_analyze(const Channel& ch, const RunConfig& cfg);
// CSV (t,witness_value,verdict,residual) or JSON, per cfg.format.
std::string cmd_evolve(const Channel& generator, const RunConfig& cfg);
json cmd_index(const Channel& ch, const RunConfig& cfg);
json cmd_weyl_channel(const Channel& ch, const RunConfig& cfg);
json cmd_weyl_generator(const Channel& generator, const RunConfig& cfg);
json cmd_decompose_channel(const Channel& ch, const RunConfig& cfg);
json cmd_decompose_algebra(const BlockAlgebra& alg, const RunConfig& cfg);

// Exit codes: 0 success (any verdict), 1 other failure, 2 parse error,
// 3 invalid channel.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace muchan::cli
