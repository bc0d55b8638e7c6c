#pragma once

// Coordinates on the real affine space of Hermitian-preserving, unital,
// trace-preserving maps. Their Choi matrices are I/d^2 + sum_k y_k (G_a (x) G_b)
// with G_a running over a traceless orthonormal Hermitian basis, so the
// space has real dimension (d^2 - 1)^2 and y carries the HS geometry exactly.

#include "muchan/matcore.hpp"

namespace muchan {

class ChoiCoordinates {
 public:
  explicit ChoiCoordinates(Index d);

  Index dim() const { return d_; }
  Index size() const { return basis_.cols(); }

  // Components of a Hermitian d^2 x d^2 matrix along the basis; parts
  // outside the span (e.g. the identity component) are dropped.
  RVec coords(const CMat& choi) const;
  RVec unitary_coords(const CMat& u) const;
  // sum_k y_k B_k (traceless part only; add I/d^2 for a unital TP map).
  CMat from_coords(const RVec& y) const;

 private:
  Index d_;
  CMat basis_;  // column k = vec(B_k)
};

// Shared, immutable instance per dimension.
const ChoiCoordinates& choi_coordinates(Index d);

}  // namespace muchan
