#include "muchan/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "muchan/coords.hpp"
#include "muchan/nnls.hpp"

namespace muchan {

namespace {

CMat int_power(const CMat& base, Index k) {
  CMat out = CMat::Identity(base.rows(), base.cols());
  for (Index i = 0; i < k; ++i) out = out * base;
  return out;
}

void require_unitaries(const std::vector<CMat>& g, Index d) {
  for (const CMat& u : g) {
    if (u.rows() != d || u.cols() != d) throw Error(ErrorKind::ShapeMismatch, "group element has the wrong size");
    if (!is_unitary(u)) throw Error(ErrorKind::NotUnitary, "group element is not unitary");
  }
}

// Residual of the fit, measured on the full Choi matrices.
double full_residual(const Channel& target, const std::vector<CMat>& g, const RVec& c, bool subtract_id) {
  const Index d = target.dim();
  CMat fit = CMat::Zero(d * d, d * d);
  const CMat jid = identity_channel(d).choi();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (c(static_cast<Index>(i)) == 0.0) continue;
    const CVec w = bell_vector(g[i]);
    CMat atom = w * w.adjoint() / static_cast<double>(d);
    if (subtract_id) atom -= jid;
    fit += c(static_cast<Index>(i)) * atom;
  }
  return (fit - target.choi()).norm();
}

}  // namespace

WeylSystem::WeylSystem(Index d) : d_(d) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "weyl_system needs d >= 2");
  xi_ = std::polar(1.0, 2.0 * std::numbers::pi / static_cast<double>(d));
  shift_ = CMat::Zero(d, d);
  clock_ = CMat::Zero(d, d);
  for (Index j = 0; j < d; ++j) {
    shift_((j + 1) % d, j) = 1.0;
    clock_(j, j) = std::pow(xi_, static_cast<double>(j));
  }
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) {
      table_.push_back(int_power(shift_, a) * int_power(clock_, b));
      bells_.push_back(bell_vector(table_.back()));
    }
  if (identity_residual() > 1e-12) throw Error(ErrorKind::InvalidArgument, "Weyl identities failed numerically");
}

const CMat& WeylSystem::w(Index a, Index b) const {
  return table_[static_cast<std::size_t>(((a % d_ + d_) % d_) * d_ + (b % d_ + d_) % d_)];
}

const CVec& WeylSystem::bell(Index a, Index b) const {
  return bells_[static_cast<std::size_t>(((a % d_ + d_) % d_) * d_ + (b % d_ + d_) % d_)];
}

double WeylSystem::identity_residual() const {
  double worst = 0.0;
  auto xi_pow = [this](Index k) { return std::pow(xi_, static_cast<double>(((k % d_) + d_) % d_)); };
  for (Index a = 0; a < d_; ++a)
    for (Index b = 0; b < d_; ++b) {
      const CMat& wab = w(a, b);
      worst = std::max(worst, (wab.adjoint() - xi_pow(a * b) * w(-a, -b)).norm());
      for (Index a2 = 0; a2 < d_; ++a2)
        for (Index b2 = 0; b2 < d_; ++b2) {
          const CMat& w2 = w(a2, b2);
          worst = std::max(worst, (wab * w2 - xi_pow(b * a2 - a * b2) * w2 * wab).norm());
          const cplx ip = (wab.adjoint() * w2).trace();
          const double expect = (a == a2 && b == b2) ? static_cast<double>(d_) : 0.0;
          worst = std::max(worst, std::abs(ip - expect));
        }
    }
  return worst;
}

WeylSystem weyl_system(Index d) { return WeylSystem(d); }

std::vector<CMat> weyl_unitaries(Index d) { return WeylSystem(d).table(); }

double weyl_covariance_residual(const Channel& m, const WeylSystem& ws) {
  const Index d = ws.dim();
  if (m.dim() != d) throw Error(ErrorKind::ShapeMismatch, "covariance check: dimension mismatch");
  double worst = 0.0;
  for (const CMat& w : ws.table())
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        const CMat e = matrix_unit(d, i, j);
        const CMat lhs = m.apply(w * e * w.adjoint());
        const CMat rhs = w * m.apply(e) * w.adjoint();
        worst = std::max(worst, (lhs - rhs).norm());
      }
  return worst;
}

bool is_weyl_covariant(const Channel& m, const WeylSystem& ws, double tol) {
  return weyl_covariance_residual(m, ws) <= tol;
}

std::vector<double> weyl_coeffs(const Channel& ch, const WeylSystem& ws) {
  if (!is_weyl_covariant(ch, ws)) throw Error(ErrorKind::NotCovariant, "weyl_coeffs needs a Weyl-covariant map");
  const Index d = ws.dim();
  const CMat& j = ch.choi();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(d * d));
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b) {
      const CVec& w = ws.bell(a, b);
      out.push_back(w.dot(j * w).real() / static_cast<double>(d));
    }
  return out;
}

Channel weyl_reconstruct(const std::vector<double>& coeffs, const WeylSystem& ws) {
  const Index d = ws.dim();
  if (static_cast<Index>(coeffs.size()) != d * d) throw Error(ErrorKind::ShapeMismatch, "weyl_reconstruct: d^2 coefficients");
  CMat j = CMat::Zero(d * d, d * d);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const CVec& w = ws.bell(static_cast<Index>(k) / d, static_cast<Index>(k) % d);
    j += (coeffs[k] / static_cast<double>(d)) * (w * w.adjoint());
  }
  return Channel::from_choi(std::move(j));
}

WeylDecomposition mixed_weyl_decompose(const Channel& ch, const WeylSystem& ws) {
  if (!verify(ch).is_unital_channel())
    throw Error(ErrorKind::InvalidChannel, "mixed_weyl_decompose needs a unital quantum channel");
  WeylDecomposition out;
  out.covariance_residual = weyl_covariance_residual(ch, ws);
  out.covariant = out.covariance_residual <= 1e-9;
  out.decomposition.verdict = DecompositionVerdict::NotInHull;
  if (!out.covariant) {
    out.decomposition.stop_reason = "not Weyl-covariant";
    return out;
  }
  out.coefficients = weyl_coeffs(ch, ws);
  out.min_coefficient = *std::min_element(out.coefficients.begin(), out.coefficients.end());
  if (out.min_coefficient < -1e-10) {
    out.decomposition.stop_reason = "negative Weyl coefficient";
    return out;
  }
  auto& dec = out.decomposition;
  for (std::size_t k = 0; k < out.coefficients.size(); ++k)
    if (out.coefficients[k] > 1e-12) {
      dec.weights.push_back(out.coefficients[k]);
      dec.unitaries.push_back(ws.table()[k]);
    }
  double total = 0.0;
  for (double w : dec.weights) total += w;
  for (double& w : dec.weights) w /= total;
  dec.residual = decomposition_residual(ch, dec.weights, dec.unitaries);
  dec.residual_history = {dec.residual};
  dec.verdict = dec.residual <= kEpsMU ? DecompositionVerdict::MixedUnitary : DecompositionVerdict::NotInHull;
  dec.stop_reason = "exact";
  return out;
}

ConeMembershipResult g_cone_membership(const Channel& generator, const std::vector<CMat>& g, double eps) {
  const Index d = generator.dim();
  require_unitaries(g, d);
  ConeMembershipResult out;
  if (g.empty()) {
    out.residual = generator.choi().norm();
    out.verdict = out.residual <= eps ? ConeVerdict::Member : ConeVerdict::NotMember;
    return out;
  }
  const ChoiCoordinates& cc = choi_coordinates(d);
  const RVec id = cc.unitary_coords(CMat::Identity(d, d));
  RMat a(cc.size(), static_cast<Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) a.col(static_cast<Index>(i)) = cc.unitary_coords(g[i]) - id;
  const NnlsResult r = nnls(a, cc.coords(hermitian_part(generator.choi())));
  out.coefficients.assign(r.x.data(), r.x.data() + r.x.size());
  out.residual = full_residual(generator, g, r.x, true);
  out.verdict = out.residual <= eps ? ConeVerdict::Member : ConeVerdict::NotMember;
  return out;
}

ConeMembershipResult weyl_cone_membership(const Channel& generator, const WeylSystem& ws, double eps) {
  return g_cone_membership(generator, ws.table(), eps);
}

MUDecomposition g_mixed_decompose(const Channel& ch, const std::vector<CMat>& g, double eps) {
  if (!verify(ch).is_unital_channel())
    throw Error(ErrorKind::InvalidChannel, "g_mixed_decompose needs a unital quantum channel");
  const Index d = ch.dim();
  require_unitaries(g, d);
  if (g.empty()) throw Error(ErrorKind::InvalidArgument, "g_mixed_decompose: empty group list");
  const ChoiCoordinates& cc = choi_coordinates(d);
  const RVec phi = cc.coords(ch.choi());
  RMat p(cc.size(), static_cast<Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) p.col(static_cast<Index>(i)) = cc.unitary_coords(g[i]) - phi;
  const NnlsResult r = simplex_least_squares(p);

  MUDecomposition out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (r.x(static_cast<Index>(i)) > 1e-12) {
      out.weights.push_back(r.x(static_cast<Index>(i)));
      out.unitaries.push_back(g[i]);
    }
  double total = 0.0;
  for (double w : out.weights) total += w;
  for (double& w : out.weights) w /= total;
  out.residual = decomposition_residual(ch, out.weights, out.unitaries);
  out.residual_history = {out.residual};
  out.verdict = out.residual <= eps ? DecompositionVerdict::MixedUnitary : DecompositionVerdict::NotInHull;
  out.stop_reason = "exact";
  return out;
}

}  // namespace muchan
