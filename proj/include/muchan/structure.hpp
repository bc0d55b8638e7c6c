#pragma once

// Block subalgebras, conditional expectations, automorphisms, peripheral
// spaces and powers of channels.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "muchan/channels.hpp"
#include "muchan/classify.hpp"

namespace muchan {

// A = Q (sum_k I_{m_k} (x) M_{n_k}) Q*. In the canonical frame block k spans
// indices offset_k + r*n_k + s for r < m_k, s < n_k.
struct BlockAlgebra {
  std::vector<std::pair<Index, Index>> blocks;  // (m_k, n_k)
  std::optional<CMat> basis_change;

  Index dim() const;
  Index algebra_dim() const;  // sum n_k^2
  Index offset(std::size_t k) const;
  CMat q() const;
  // Throws InvalidArgument on an empty or inconsistent partition.
  void validate() const;
  // Matrix units Q (I_m (x) E_ab) Q* of every block, ordered by block then (a, b).
  std::vector<CMat> matrix_units() const;
  std::vector<CMat> central_projections() const;
};

Channel conditional_expectation(const BlockAlgebra& alg);

// U with psi(X) = U* X U on the algebra. Throws NotAutomorphism or
// NotTracePreserving when psi does not qualify.
CMat automorphism_unitary(const BlockAlgebra& alg, const Channel& psi);

struct PeripheralSplit {
  std::vector<CMat> peripheral_basis;  // HS-orthonormal
  Index decaying_dim = 0;
  Channel projector;
  std::vector<cplx> peripheral_eigenvalues;  // with multiplicity
  // Largest distance of a product or adjoint of basis elements from P.
  double closure_residual = 0.0;
  bool closed = true;
  // Geometric equals algebraic multiplicity on every peripheral cluster.
  bool diagonalizable = true;
  double spectral_radius = 0.0;
  // Largest Re(lambda) for generators.
  double max_real_part = 0.0;
};

PeripheralSplit peripheral_split(const Channel& ch);
// Shared engine: keeps eigenvalues with |lambda| >= 1 - tol (channels) or
// |Re lambda| <= tol (generators).
PeripheralSplit spectral_split(const Channel& map, bool generator, double tol = kClusterTol);

// Block form of a unital *-subalgebra given by an orthonormal basis.
BlockAlgebra recover_block_algebra(const std::vector<CMat>& basis, std::uint64_t seed = 0);

struct AsymptoticParts {
  Channel alpha;
  Channel beta;
  CMat unitary;
  BlockAlgebra algebra;
  PeripheralSplit split;
  std::vector<double> beta_power_norms;  // ||beta^n|| for n = 1..20
  bool beta_decays = false;
};

AsymptoticParts asymptotic_parts(const Channel& ch);

struct PowerVerdict {
  unsigned n = 0;
  MUVerdict verdict = MUVerdict::Undetermined;
  double residual = 0.0;
  std::string route;
};

struct MUIndexReport {
  std::optional<unsigned> index;  // empty: not found within n_max
  unsigned n_max = 0;
  std::vector<PowerVerdict> per_power;
};

MUIndexReport mu_index(const Channel& ch, unsigned n_max, const ClassifyConfig& cfg = {});

}  // namespace muchan
