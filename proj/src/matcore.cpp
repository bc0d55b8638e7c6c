#include "muchan/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace muchan {

namespace {

std::string shape_of(const CMat& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::NotFinite: return "non-finite entry";
    case ErrorKind::NotHermitian: return "not Hermitian";
    case ErrorKind::NotUnitary: return "not unitary";
    case ErrorKind::RankDeficient: return "rank deficient";
    case ErrorKind::NotCompletelyPositive: return "not completely positive";
    case ErrorKind::InvalidChannel: return "invalid channel";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::NotAutomorphism: return "not a *-automorphism";
    case ErrorKind::NotTracePreserving: return "not trace-preserving";
    case ErrorKind::NotCovariant: return "not covariant";
    case ErrorKind::NoBracket: return "no bracket";
    case ErrorKind::Parse: return "parse error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

CMat make_cmat(Index rows, Index cols, std::span<const cplx> row_major) {
  if (rows < 0 || cols < 0 || static_cast<Index>(row_major.size()) != rows * cols)
    throw Error(ErrorKind::ShapeMismatch, "entry count does not match rows*cols");
  CMat out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = row_major[i * cols + j];
  require_finite(out, "make_cmat");
  return out;
}

bool is_finite(const CMat& a) { return a.allFinite(); }

void require_finite(const CMat& a, const char* what) {
  if (!a.allFinite()) throw Error(ErrorKind::NotFinite, what);
}

void require_square(const CMat& a, const char* what) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": expected square, got " + shape_of(a));
}

void require_same_shape(const CMat& a, const CMat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::ShapeMismatch,
                std::string(what) + ": " + shape_of(a) + " vs " + shape_of(b));
}

cplx hs_inner(const CMat& a, const CMat& b) {
  require_same_shape(a, b, "hs_inner");
  return (a.conjugate().array() * b.array()).sum();
}

bool is_hermitian(const CMat& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).norm() <= rel_tol * std::max(1.0, a.norm());
}

CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

double unitarity_residual(const CMat& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return (u.adjoint() * u - CMat::Identity(u.rows(), u.cols())).norm();
}

bool is_unitary(const CMat& u, double tol) { return unitarity_residual(u) <= tol; }

std::vector<double> SpectralData::real_values() const {
  std::vector<double> out;
  out.reserve(eigenvalues.size());
  for (const auto& l : eigenvalues) out.push_back(l.real());
  return out;
}

SpectralData eig_herm(const CMat& a) {
  require_square(a, "eig_herm");
  require_finite(a, "eig_herm");
  if (!is_hermitian(a)) throw Error(ErrorKind::NotHermitian, "eig_herm input");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(a));
  SpectralData out;
  const RVec& vals = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  for (Index i = 0; i < vals.size(); ++i) out.eigenvalues.emplace_back(vals(i), 0.0);

  const double scale = std::max(1.0, vals.size() ? vals.cwiseAbs().maxCoeff() : 0.0);
  Index start = 0;
  while (start < vals.size()) {
    Index end = start + 1;
    while (end < vals.size() && vals(end) - vals(end - 1) <= kClusterTol * scale) ++end;
    EigenCluster c;
    c.value = vals.segment(start, end - start).mean();
    c.algebraic = c.geometric = static_cast<int>(end - start);
    c.eigenspace = out.eigenvectors.middleCols(start, end - start);
    out.clusters.push_back(std::move(c));
    start = end;
  }
  return out;
}

SpectralData eig_general(const CMat& a, double cluster_tol) {
  require_square(a, "eig_general");
  require_finite(a, "eig_general");
  const Index n = a.rows();
  SpectralData out;
  if (n == 0) return out;
  Eigen::ComplexEigenSolver<CMat> es(a, true);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "eigensolver failed");
  const CVec& vals = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  out.eigenvalues.assign(vals.data(), vals.data() + n);

  double scale = 1.0;
  for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(vals(i)));
  const double link = cluster_tol * scale;

  // Single-linkage clustering through a small union-find.
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(vals(i) - vals(j)) <= link) parent[find(i)] = find(j);

  std::vector<std::vector<Index>> groups;
  std::vector<Index> group_of(n, -1);
  for (Index i = 0; i < n; ++i) {
    const Index r = find(i);
    if (group_of[r] < 0) {
      group_of[r] = static_cast<Index>(groups.size());
      groups.emplace_back();
    }
    groups[group_of[r]].push_back(i);
  }

  const double kernel_tol = 1e-6 * std::max(1.0, a.norm());
  for (const auto& g : groups) {
    EigenCluster c;
    cplx mean = 0.0;
    for (Index i : g) mean += vals(i);
    c.value = mean / static_cast<double>(g.size());
    c.algebraic = static_cast<int>(g.size());

    Eigen::BDCSVD<CMat> svd(a - c.value * CMat::Identity(n, n), Eigen::ComputeFullV);
    const RVec& sv = svd.singularValues();
    int nullity = 0;
    for (Index k = sv.size() - 1; k >= 0 && sv(k) <= kernel_tol; --k) ++nullity;
    c.geometric = std::clamp(nullity, 1, c.algebraic);
    c.eigenspace = svd.matrixV().rightCols(c.geometric);
    out.clusters.push_back(std::move(c));
  }
  return out;
}

CMat expm(const CMat& a) {
  require_square(a, "expm");
  require_finite(a, "expm");
  if (a.rows() == 0) return a;
  return a.exp();
}

std::vector<double> svd_values(const CMat& a) {
  require_finite(a, "svd_values");
  Eigen::BDCSVD<CMat> svd(a);
  const RVec& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

CMat polar_retract(const CMat& m) {
  require_square(m, "polar_retract");
  require_finite(m, "polar_retract");
  if (m.size() == 0) return m;
  const Index d = m.rows();
  const CMat id = CMat::Identity(d, d);
  CMat gram = m.adjoint() * m;
  // Near-unitary inputs (every oracle step) converge in a few Newton-Schulz
  // steps X <- X - X (X* X - I) / 2.
  if ((gram - id).norm() < 0.5) {
    CMat x = m;
    for (int k = 0; k < 12; ++k) {
      const CMat e = gram - id;
      if (e.norm() <= 1e-15 * static_cast<double>(d)) break;
      x -= 0.5 * x * e;
      gram = x.adjoint() * x;
    }
    return x;
  }
  // Well-conditioned inputs take M (M* M)^{-1/2}; the SVD handles the rest.
  Eigen::SelfAdjointEigenSolver<CMat> es(gram);
  const RVec& lam = es.eigenvalues();
  if (lam(0) > 1e-8 * lam(lam.size() - 1)) {
    const RVec inv_sqrt = lam.cwiseSqrt().cwiseInverse();
    return m * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint());
  }
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-14 * std::max(1.0, s(0)))
    throw Error(ErrorKind::RankDeficient, "polar_retract requires a full-rank matrix");
  return svd.matrixU() * svd.matrixV().adjoint();
}

CMat random_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMat g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      g(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return g;
}

CMat random_unitary(Index d, std::mt19937_64& rng) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "random_unitary needs d >= 1");
  const CMat g = random_gaussian(d, d, rng);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ();
  const CMat& r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

CMat random_unitary(Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_unitary(d, rng);
}

CMat random_hermitian(Index d, std::mt19937_64& rng) {
  return hermitian_part(random_gaussian(d, d, rng));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined state.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CMat kron(const CMat& a, const CMat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

CMat matrix_unit(Index d, Index i, Index j) {
  CMat e = CMat::Zero(d, d);
  e(i, j) = 1.0;
  return e;
}

CVec vec(const CMat& x) { return Eigen::Map<const CVec>(x.data(), x.size()); }

CMat unvec(const CVec& v, Index d) {
  if (v.size() != d * d) throw Error(ErrorKind::ShapeMismatch, "unvec length");
  return Eigen::Map<const CMat>(v.data(), d, d);
}

CMat orthonormal_columns(const CMat& a, double rel_tol) {
  if (a.cols() == 0) return CMat(a.rows(), 0);
  Eigen::BDCSVD<CMat> svd(a, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  Index rank = 0;
  const double cut = rel_tol * std::max(s.size() ? s(0) : 0.0, 1e-300);
  while (rank < s.size() && s(rank) > cut) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace muchan
