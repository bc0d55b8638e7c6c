#pragma once

// Dense complex linear algebra used throughout the library. Everything here
// is a pure function of its arguments; randomness is driven by explicit seeds.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "muchan/error.hpp"

namespace muchan {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kClusterTol = 1e-8;
inline constexpr double kHermTol = 1e-10;

// Builds a rows x cols matrix from row-major entries, rejecting NaN/Inf.
CMat make_cmat(Index rows, Index cols, std::span<const cplx> row_major);

bool is_finite(const CMat& a);
void require_finite(const CMat& a, const char* what);
void require_square(const CMat& a, const char* what);
void require_same_shape(const CMat& a, const CMat& b, const char* what);

// tr(A* B), conjugate-linear in A.
cplx hs_inner(const CMat& a, const CMat& b);

// ||A - A*||_F <= rel_tol * max(1, ||A||_F).
bool is_hermitian(const CMat& a, double rel_tol = kHermTol);
CMat hermitian_part(const CMat& a);
double unitarity_residual(const CMat& u);
bool is_unitary(const CMat& u, double tol = 1e-10);

struct EigenCluster {
  cplx value;
  int algebraic = 0;
  int geometric = 0;
  // Orthonormal basis of ker(A - value I), `geometric` columns.
  CMat eigenspace;
};

struct SpectralData {
  std::vector<cplx> eigenvalues;
  CMat eigenvectors;
  std::vector<EigenCluster> clusters;

  std::vector<double> real_values() const;
};

// Hermitian input only; eigenvalues ascending, eigenvectors orthonormal.
SpectralData eig_herm(const CMat& a);

// Eigenvalues are grouped by single linkage at cluster_tol * max(1, max|l|).
// The geometric multiplicity of a cluster is the numerical kernel dimension
// of A - l I at its mean eigenvalue.
SpectralData eig_general(const CMat& a, double cluster_tol = kClusterTol);

CMat expm(const CMat& a);

// Singular values, descending.
std::vector<double> svd_values(const CMat& a);

// Unitary polar factor of a full-rank square matrix.
CMat polar_retract(const CMat& m);

CMat random_gaussian(Index rows, Index cols, std::mt19937_64& rng);
CMat random_unitary(Index d, std::mt19937_64& rng);
CMat random_unitary(Index d, std::uint64_t seed);
CMat random_hermitian(Index d, std::mt19937_64& rng);

// Mixes a base seed with a stream index; used to derive independent
// per-start or per-iteration seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

CMat kron(const CMat& a, const CMat& b);
CMat matrix_unit(Index d, Index i, Index j);

// Column-stacking vectorization and its inverse.
CVec vec(const CMat& x);
CMat unvec(const CVec& v, Index d);

// Orthonormal basis of the column span, using a relative rank threshold.
CMat orthonormal_columns(const CMat& a, double rel_tol = 1e-9);

}  // namespace muchan
