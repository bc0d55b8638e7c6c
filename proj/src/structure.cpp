#include "muchan/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace muchan {

namespace {

// (1/m) tr_m of a block I_m (x) N; reads N back.
CMat reduce_block(const CMat& blk, Index m, Index n) {
  CMat out = CMat::Zero(n, n);
  for (Index r = 0; r < m; ++r) out += blk.block(r * n, r * n, n, n);
  return out / static_cast<double>(m);
}

CMat embed_block(const CMat& nmat, Index m) { return kron(CMat::Identity(m, m), nmat); }

// Conditional expectation in the canonical frame.
CMat canonical_expectation(const std::vector<std::pair<Index, Index>>& blocks, const CMat& y) {
  CMat z = CMat::Zero(y.rows(), y.cols());
  Index off = 0;
  for (const auto& [m, n] : blocks) {
    const Index sz = m * n;
    z.block(off, off, sz, sz) = embed_block(reduce_block(y.block(off, off, sz, sz), m, n), m);
    off += sz;
  }
  return z;
}

double distance_to_span(const CMat& basis_cols, const CVec& v) {
  return (v - basis_cols * (basis_cols.adjoint() * v)).norm();
}

}  // namespace

Index BlockAlgebra::dim() const {
  Index d = 0;
  for (const auto& [m, n] : blocks) d += m * n;
  return d;
}

Index BlockAlgebra::algebra_dim() const {
  Index s = 0;
  for (const auto& b : blocks) s += b.second * b.second;
  return s;
}

Index BlockAlgebra::offset(std::size_t k) const {
  Index off = 0;
  for (std::size_t i = 0; i < k; ++i) off += blocks[i].first * blocks[i].second;
  return off;
}

CMat BlockAlgebra::q() const {
  if (basis_change) return *basis_change;
  return CMat::Identity(dim(), dim());
}

void BlockAlgebra::validate() const {
  if (blocks.empty()) throw Error(ErrorKind::InvalidArgument, "block algebra needs at least one block");
  for (const auto& [m, n] : blocks)
    if (m < 1 || n < 1) throw Error(ErrorKind::InvalidArgument, "block sizes must be positive");
  if (basis_change) {
    const Index d = dim();
    if (basis_change->rows() != d || basis_change->cols() != d)
      throw Error(ErrorKind::ShapeMismatch, "basis change does not match the block sizes");
    if (!is_unitary(*basis_change, 1e-10)) throw Error(ErrorKind::NotUnitary, "basis change is not unitary");
  }
}

std::vector<CMat> BlockAlgebra::matrix_units() const {
  const Index d = dim();
  const CMat qm = q();
  std::vector<CMat> out;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto [m, n] = blocks[k];
    const Index off = offset(k);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) {
        CMat f = CMat::Zero(d, d);
        f.block(off, off, m * n, m * n) = embed_block(matrix_unit(n, a, b), m);
        out.push_back(qm * f * qm.adjoint());
      }
  }
  return out;
}

std::vector<CMat> BlockAlgebra::central_projections() const {
  const Index d = dim();
  const CMat qm = q();
  std::vector<CMat> out;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Index sz = blocks[k].first * blocks[k].second;
    CMat p = CMat::Zero(d, d);
    p.block(offset(k), offset(k), sz, sz).setIdentity();
    out.push_back(qm * p * qm.adjoint());
  }
  return out;
}

Channel conditional_expectation(const BlockAlgebra& alg) {
  alg.validate();
  const CMat qm = alg.q();
  const auto blocks = alg.blocks;
  return Channel::from_function(alg.dim(), [qm, blocks](const CMat& x) -> CMat {
    return qm * canonical_expectation(blocks, qm.adjoint() * x * qm) * qm.adjoint();
  });
}

CMat automorphism_unitary(const BlockAlgebra& alg, const Channel& psi) {
  alg.validate();
  const Index d = alg.dim();
  if (psi.dim() != d) throw Error(ErrorKind::ShapeMismatch, "automorphism_unitary: dimension mismatch");
  const CMat qm = alg.q();
  auto psi0 = [&](const CMat& y) -> CMat { return qm.adjoint() * psi.apply(qm * y * qm.adjoint()) * qm; };

  const BlockAlgebra canon{alg.blocks, std::nullopt};
  const std::vector<CMat> units = canon.matrix_units();
  std::vector<CMat> img;
  img.reserve(units.size());
  for (const CMat& f : units) img.push_back(psi0(f));

  const double tol = 1e-8 * static_cast<double>(d);
  for (const CMat& y : img)
    if ((canonical_expectation(canon.blocks, y) - y).norm() > tol)
      throw Error(ErrorKind::NotAutomorphism, "map does not send the algebra into itself");

  // Unit index of (block k, a, b).
  std::vector<Index> first(canon.blocks.size(), 0);
  for (std::size_t k = 1; k < canon.blocks.size(); ++k)
    first[k] = first[k - 1] + canon.blocks[k - 1].second * canon.blocks[k - 1].second;
  struct Tag {
    std::size_t k;
    Index a, b;
  };
  std::vector<Tag> tags;
  for (std::size_t k = 0; k < canon.blocks.size(); ++k)
    for (Index a = 0; a < canon.blocks[k].second; ++a)
      for (Index b = 0; b < canon.blocks[k].second; ++b) tags.push_back({k, a, b});

  for (std::size_t i = 0; i < tags.size(); ++i)
    for (std::size_t j = 0; j < tags.size(); ++j) {
      CMat expect = CMat::Zero(d, d);
      if (tags[i].k == tags[j].k && tags[i].b == tags[j].a) {
        const Index n = canon.blocks[tags[i].k].second;
        expect = img[static_cast<std::size_t>(first[tags[i].k] + tags[i].a * n + tags[j].b)];
      }
      if ((img[i] * img[j] - expect).norm() > tol)
        throw Error(ErrorKind::NotAutomorphism, "map is not multiplicative on the algebra");
    }
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Index n = canon.blocks[tags[i].k].second;
    const CMat& swapped = img[static_cast<std::size_t>(first[tags[i].k] + tags[i].b * n + tags[i].a)];
    if ((swapped - img[i].adjoint()).norm() > tol)
      throw Error(ErrorKind::NotAutomorphism, "map does not preserve adjoints");
  }
  for (std::size_t i = 0; i < units.size(); ++i)
    if (std::abs(img[i].trace() - units[i].trace()) > tol)
      throw Error(ErrorKind::NotTracePreserving, "*-automorphism does not preserve the trace");
  {
    CMat cols(d * d, static_cast<Index>(img.size()));
    for (std::size_t i = 0; i < img.size(); ++i) cols.col(static_cast<Index>(i)) = vec(img[i]);
    const std::vector<double> s = svd_values(cols);
    if (s.back() < 1e-8) throw Error(ErrorKind::NotAutomorphism, "map is not injective on the algebra");
  }

  // Minimal central projections are permuted.
  const std::vector<CMat> proj = canon.central_projections();
  std::vector<std::size_t> sigma(proj.size());
  std::vector<bool> hit(proj.size(), false);
  for (std::size_t k = 0; k < proj.size(); ++k) {
    const CMat pk = psi0(proj[k]);
    bool found = false;
    for (std::size_t j = 0; j < proj.size() && !found; ++j)
      if (!hit[j] && (pk - proj[j]).norm() <= 1e-6 && canon.blocks[j] == canon.blocks[k]) {
        sigma[k] = j;
        hit[j] = true;
        found = true;
      }
    if (!found) throw Error(ErrorKind::NotAutomorphism, "central projections are not permuted");
  }

  CMat u0 = CMat::Zero(d, d);
  for (std::size_t k = 0; k < proj.size(); ++k) {
    const auto [m, n] = canon.blocks[k];
    const std::size_t j = sigma[k];
    const Index offj = canon.offset(j);
    CMat s(n * n, n * n);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) {
        const CMat& y = img[static_cast<std::size_t>(first[k] + a * n + b)];
        s.col(a + n * b) = vec(reduce_block(y.block(offj, offj, m * n, m * n), m, n));
      }
    // beta_k(X) = V_k* X V_k, a rank-one Choi matrix.
    const std::vector<CMat> kr = kraus_of(Channel::from_superop(s));
    if (kr.empty()) throw Error(ErrorKind::NotAutomorphism, "block map vanishes");
    u0.block(canon.offset(k), offj, m * n, m * n) = embed_block(kr.front(), m);
  }
  const CMat u = qm * u0 * qm.adjoint();

  double worst = 0.0;
  for (const CMat& x : alg.matrix_units()) worst = std::max(worst, (psi.apply(x) - u.adjoint() * x * u).norm());
  if (worst > 1e-9) throw Error(ErrorKind::NotAutomorphism, "recovered unitary does not implement the map");
  return u;
}

PeripheralSplit spectral_split(const Channel& map, bool generator, double tol) {
  const Index d = map.dim();
  const SpectralData sd = eig_general(map.superop());
  PeripheralSplit out;
  out.max_real_part = -std::numeric_limits<double>::infinity();
  std::vector<CVec> cols;
  for (const EigenCluster& c : sd.clusters) {
    out.spectral_radius = std::max(out.spectral_radius, std::abs(c.value));
    out.max_real_part = std::max(out.max_real_part, c.value.real());
    const bool keep = generator ? std::abs(c.value.real()) <= tol : std::abs(c.value) >= 1.0 - tol;
    if (!keep) continue;
    for (int i = 0; i < c.algebraic; ++i) out.peripheral_eigenvalues.push_back(c.value);
    if (c.geometric != c.algebraic) out.diagonalizable = false;
    for (Index i = 0; i < c.eigenspace.cols(); ++i) cols.push_back(c.eigenspace.col(i));
  }
  CMat stack(d * d, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) stack.col(static_cast<Index>(i)) = cols[i];
  const CMat b = cols.empty() ? CMat(d * d, 0) : orthonormal_columns(stack);
  for (Index i = 0; i < b.cols(); ++i) out.peripheral_basis.push_back(unvec(b.col(i), d));
  out.decaying_dim = d * d - b.cols();
  out.projector = Channel::from_superop(b * b.adjoint());

  if (b.cols() < d * d) {
    for (const CMat& x : out.peripheral_basis) {
      out.closure_residual = std::max(out.closure_residual, distance_to_span(b, vec(CMat(x.adjoint()))));
      for (const CMat& y : out.peripheral_basis)
        out.closure_residual = std::max(out.closure_residual, distance_to_span(b, vec(CMat(x * y))));
    }
  }
  out.closed = out.closure_residual <= 1e-8;
  return out;
}

PeripheralSplit peripheral_split(const Channel& ch) {
  if (!verify(ch).is_unital_channel())
    throw Error(ErrorKind::InvalidChannel, "peripheral_split needs a unital quantum channel");
  return spectral_split(ch, false);
}

BlockAlgebra recover_block_algebra(const std::vector<CMat>& basis, std::uint64_t seed) {
  if (basis.empty()) throw Error(ErrorKind::InvalidArgument, "empty algebra basis");
  const Index d = basis.front().rows();
  const auto p = static_cast<Index>(basis.size());
  if (p == d * d) return BlockAlgebra{{{1, d}}, std::nullopt};
  if (p == 1) return BlockAlgebra{{{d, 1}}, std::nullopt};

  // Center: combinations commuting with every basis element.
  CMat comm(p * d * d, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) {
      const CMat& x = basis[static_cast<std::size_t>(i)];
      const CMat& y = basis[static_cast<std::size_t>(j)];
      comm.block(j * d * d, i, d * d, 1) = vec(CMat(x * y - y * x));
    }
  Eigen::BDCSVD<CMat> svd(comm, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cut = 1e-8 * std::max(1.0, sv(0));
  std::vector<CMat> center;
  for (Index c = 0; c < p; ++c) {
    if (c < sv.size() && sv(c) > cut) continue;
    CMat z = CMat::Zero(d, d);
    for (Index i = 0; i < p; ++i) z += svd.matrixV()(i, c) * basis[static_cast<std::size_t>(i)];
    center.push_back(z);
  }

  std::mt19937_64 rng(derive_seed(seed, 0xB10CULL));
  std::normal_distribution<double> nd;

  // A generic central Hermitian element separates the minimal central projections.
  CMat zh = CMat::Zero(d, d);
  for (const CMat& z : center) zh += nd(rng) * hermitian_part(z) + nd(rng) * hermitian_part(cplx(0, -1) * z);
  const SpectralData zs = eig_herm(zh);
  std::vector<double> zv = zs.real_values();
  const double scale = std::max(std::abs(zv.front()), std::abs(zv.back()));
  std::vector<std::vector<Index>> groups{{0}};
  for (Index i = 1; i < d; ++i) {
    if (zv[static_cast<std::size_t>(i)] - zv[static_cast<std::size_t>(i - 1)] > 1e-6 * scale) groups.emplace_back();
    groups.back().push_back(i);
  }
  if (groups.size() != center.size())
    throw Error(ErrorKind::InvalidArgument, "central projections could not be separated");

  BlockAlgebra out;
  CMat qfull(d, d);
  Index col = 0;
  for (const auto& g : groups) {
    const auto r = static_cast<Index>(g.size());
    CMat qk(d, r);
    for (Index i = 0; i < r; ++i) qk.col(i) = zs.eigenvectors.col(g[static_cast<std::size_t>(i)]);
    std::vector<CMat> comp;
    CMat stack(r * r, p);
    for (Index i = 0; i < p; ++i) {
      comp.push_back(qk.adjoint() * basis[static_cast<std::size_t>(i)] * qk);
      stack.col(i) = vec(comp.back());
    }
    const Index dim_k = orthonormal_columns(stack, 1e-8).cols();
    const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(dim_k))));
    if (n * n != dim_k || r % n != 0)
      throw Error(ErrorKind::InvalidArgument, "block dimensions are inconsistent with a matrix algebra");
    const Index m = r / n;

    CMat cols_k;
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      CMat h = CMat::Zero(r, r);
      CMat y = CMat::Zero(r, r);
      for (const CMat& c : comp) {
        h += nd(rng) * hermitian_part(c) + nd(rng) * hermitian_part(cplx(0, -1) * c);
        y += cplx(nd(rng), nd(rng)) * c;
      }
      const SpectralData hs = eig_herm(h);
      const std::vector<double> hv = hs.real_values();
      const double hscale = std::max({std::abs(hv.front()), std::abs(hv.back()), 1e-300});
      // Eigenvalues come in n runs of multiplicity m.
      bool runs = true;
      for (Index s = 0; s < n && runs; ++s) {
        const Index lo = s * m;
        if (hv[static_cast<std::size_t>(lo + m - 1)] - hv[static_cast<std::size_t>(lo)] > 1e-7 * hscale) runs = false;
        if (s > 0 && hv[static_cast<std::size_t>(lo)] - hv[static_cast<std::size_t>(lo - 1)] <= 1e-5 * hscale) runs = false;
      }
      if (!runs) continue;
      cols_k = CMat(r, r);
      const CMat e1 = hs.eigenvectors.leftCols(m);
      ok = true;
      for (Index s = 0; s < n && ok; ++s) {
        const CMat es = hs.eigenvectors.middleCols(s * m, m);
        CMat ns = CMat::Identity(m, m);
        if (s > 0) {
          const CMat t = es.adjoint() * y * e1;
          const double c = std::sqrt((t.adjoint() * t).trace().real() / static_cast<double>(m));
          if (c < 1e-6 * y.norm()) {
            ok = false;
            break;
          }
          ns = t / c;
          if (unitarity_residual(ns) > 1e-6) {
            ok = false;
            break;
          }
        }
        const CMat es_ns = es * ns;
        for (Index rr = 0; rr < m; ++rr) cols_k.col(rr * n + s) = es_ns.col(rr);
      }
    }
    if (!ok) throw Error(ErrorKind::InvalidArgument, "matrix units of a block could not be recovered");
    qfull.middleCols(col, r) = qk * cols_k;
    col += r;
    out.blocks.emplace_back(m, n);
  }
  out.basis_change = polar_retract(qfull);

  const Channel e = conditional_expectation(out);
  double worst = 0.0;
  for (const CMat& x : basis) worst = std::max(worst, (e.apply(x) - x).norm());
  if (worst > 1e-7 || out.algebra_dim() != p)
    throw Error(ErrorKind::InvalidArgument, "recovered block form does not reproduce the algebra");
  return out;
}

AsymptoticParts asymptotic_parts(const Channel& ch) {
  AsymptoticParts out;
  out.split = peripheral_split(ch);
  out.algebra = recover_block_algebra(out.split.peripheral_basis);
  out.alpha = compose(ch, out.split.projector);
  out.beta = ch - out.alpha;
  out.unitary = automorphism_unitary(out.algebra, ch);

  CMat bn = out.beta.superop();
  for (int n = 1; n <= 20; ++n) {
    if (n > 1) bn = out.beta.superop() * bn;
    out.beta_power_norms.push_back(svd_values(bn).front());
  }
  const auto& nr = out.beta_power_norms;
  bool decreasing = true;
  for (std::size_t i = nr.size() / 2; i + 1 < nr.size(); ++i)
    if (!(nr[i + 1] < nr[i]) && nr[i + 1] > 1e-12) decreasing = false;
  out.beta_decays = decreasing || nr.back() <= 1e-12;
  return out;
}

MUIndexReport mu_index(const Channel& ch, unsigned n_max, const ClassifyConfig& cfg) {
  if (!verify(ch).is_unital_channel()) throw Error(ErrorKind::InvalidChannel, "mu_index needs a unital quantum channel");
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "mu_index needs n_max >= 1");
  MUIndexReport out;
  out.n_max = n_max;
  for (unsigned n = 1; n <= n_max; ++n) {
    const Classification c = classify_channel(power(ch, n), cfg);
    out.per_power.push_back({n, c.verdict, c.residual, c.route});
  }
  unsigned first = n_max + 1;
  while (first > 1 && out.per_power[first - 2].verdict == MUVerdict::MixedUnitary) --first;
  if (first <= n_max) out.index = first;
  return out;
}

}  // namespace muchan
