#pragma once

#include <optional>
#include <string>
#include <vector>

#include "muchan/mucone.hpp"

namespace muchan {

enum class MUVerdict { MixedUnitary, NotMixedUnitaryAnalytic, NotMixedUnitaryHeuristic, Undetermined };

const char* to_string(MUVerdict v);
bool is_not_mu(MUVerdict v);

struct ClassifyConfig {
  FWConfig fw;
  WitnessConfig witness;
  // Exact decomposition for Weyl-covariant inputs before Frank-Wolfe.
  bool use_weyl_route = true;
  bool run_witness_search = true;
  // Checked first; an Analytic witness with value <= -delta settles the verdict.
  std::vector<Witness> candidate_witnesses;
  double delta_wit = kDeltaWit;
};

struct Classification {
  MUVerdict verdict = MUVerdict::Undetermined;
  std::string route;
  std::optional<MUDecomposition> decomposition;
  std::optional<Witness> witness;
  // Decomposition residual when one was attempted.
  double residual = std::numeric_limits<double>::quiet_NaN();
};

// Order: candidate witnesses, Weyl route, Frank-Wolfe, witness search.
Classification classify_channel(const Channel& ch, const ClassifyConfig& cfg = {});

}  // namespace muchan
