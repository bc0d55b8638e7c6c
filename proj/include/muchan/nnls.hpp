#pragma once

#include <vector>

#include "muchan/matcore.hpp"

namespace muchan {

struct NnlsResult {
  RVec x;
  double residual = 0.0;  // ||A x - b||_2
  int iterations = 0;
  bool converged = false;
};

// Lawson-Hanson active-set solver for min ||A x - b|| subject to x >= 0.
// `warm_passive` lists columns to try as the initial passive set; columns
// that do not yield a feasible start are dropped.
NnlsResult nnls(const RMat& a, const RVec& b, const std::vector<Index>& warm_passive = {});

// min ||P w|| over the probability simplex, solved exactly through one NNLS
// on [P; 1^T] u ~ e_last followed by w = u / sum(u).
NnlsResult simplex_least_squares(const RMat& p, const std::vector<Index>& warm_passive = {});

struct LdpResult {
  RVec x;
  bool feasible = false;
};

// Least-distance programming: min ||x|| subject to G x >= h.
LdpResult least_distance(const RMat& g, const RVec& h);

}  // namespace muchan
