#include "muchan/mucone.hpp"

#include <algorithm>
#include <cmath>

#include "muchan/coords.hpp"
#include "muchan/nnls.hpp"
#include "muchan/weyl.hpp"

namespace muchan {

namespace {

CMat canonical_phase(CMat u) {
  for (Index i = 0; i < u.rows(); ++i)
    for (Index j = 0; j < u.cols(); ++j)
      if (std::abs(u(i, j)) > 1e-10) {
        u *= std::conj(u(i, j)) / std::abs(u(i, j));
        return u;
      }
  return u;
}

}  // namespace

double decomposition_residual(const Channel& ch, const std::vector<double>& weights,
                              const std::vector<CMat>& unitaries) {
  const Index d = ch.dim();
  CMat rho = CMat::Zero(d * d, d * d);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const CVec w = bell_vector(unitaries[i]);
    rho.noalias() += (weights[i] / static_cast<double>(d)) * (w * w.adjoint());
  }
  return (rho - ch.choi()).norm();
}

MUDecomposition fw_decompose(const Channel& ch, const FWConfig& cfg) {
  const VerifyReport vr = verify(ch);
  if (!vr.is_unital_channel())
    throw Error(ErrorKind::InvalidChannel, "fw_decompose needs a unital quantum channel");
  const Index d = ch.dim();
  MUDecomposition out;
  if (d == 1) {
    out.weights = {1.0};
    out.unitaries = {CMat::Identity(1, 1)};
    out.residual = decomposition_residual(ch, out.weights, out.unitaries);
    out.residual_history = {out.residual};
    out.verdict = DecompositionVerdict::MixedUnitary;
    out.stop_reason = "converged";
    return out;
  }

  const ChoiCoordinates& cc = choi_coordinates(d);
  const RVec phi = cc.coords(ch.choi());
  const Index n = cc.size();

  std::vector<CMat> atoms;
  RMat p(n, 0);
  auto add_atom = [&](const CMat& u) {
    atoms.push_back(u);
    p.conservativeResize(n, p.cols() + 1);
    p.col(p.cols() - 1) = cc.unitary_coords(u) - phi;
  };

  LmoConfig lc = cfg.lmo;
  lc.seed = derive_seed(cfg.lmo.seed, 0);
  add_atom(lmo_unitary(hermitian_part(ch.choi()), Direction::Max, lc).unitary);
  if (cfg.weyl_atoms)
    for (const CMat& w : weyl_unitaries(d)) add_atom(w);

  std::vector<Index> warm;
  RVec weights;
  for (int it = 0;; ++it) {
    weights = simplex_least_squares(p, warm).x;

    // Drop atoms that carry no weight; the active set stays small.
    std::vector<CMat> kept;
    RMat kept_p(n, 0);
    std::vector<double> kept_w;
    for (Index k = 0; k < weights.size(); ++k)
      if (weights(k) > 1e-12) {
        kept.push_back(atoms[static_cast<std::size_t>(k)]);
        kept_p.conservativeResize(n, kept_p.cols() + 1);
        kept_p.col(kept_p.cols() - 1) = p.col(k);
        kept_w.push_back(weights(k));
      }
    atoms = std::move(kept);
    p = std::move(kept_p);
    weights = Eigen::Map<const RVec>(kept_w.data(), static_cast<Index>(kept_w.size()));
    weights /= weights.sum();

    const RVec g = p * weights;
    const double res = g.norm();
    out.residual_history.push_back(res);
    if (res <= cfg.eps_mu) {
      out.stop_reason = "converged";
      break;
    }
    if (it >= cfg.max_iters) {
      out.stop_reason = "budget";
      break;
    }

    lc.seed = derive_seed(cfg.lmo.seed, static_cast<std::uint64_t>(it) + 1);
    const LmoResult lr = lmo_unitary(cc.from_coords(g), Direction::Min, lc);
    const RVec s = cc.unitary_coords(lr.unitary) - phi;
    const double gap = g.dot(g - s);
    out.final_gap = gap;
    out.iterations = it + 1;
    if (gap <= cfg.stall_gap) {
      out.stop_reason = "stalled";
      break;
    }
    if (cfg.dual_bound_stop && 0.5 * res * res - gap > 0.5 * cfg.eps_mu * cfg.eps_mu) {
      out.stop_reason = "dual bound";
      break;
    }
    warm.resize(atoms.size());
    for (std::size_t k = 0; k < atoms.size(); ++k) warm[k] = static_cast<Index>(k);
    add_atom(lr.unitary);
  }

  // The least-squares solve leaves ~1e-9 weights on redundant atoms; refit
  // without them and keep the shorter list unless the fit gets worse.
  if (atoms.size() > 1) {
    std::vector<Index> big;
    for (Index k = 0; k < weights.size(); ++k)
      if (weights(k) > 1e-6) big.push_back(k);
    if (!big.empty() && big.size() < atoms.size()) {
      RMat q(n, static_cast<Index>(big.size()));
      for (std::size_t k = 0; k < big.size(); ++k) q.col(static_cast<Index>(k)) = p.col(big[k]);
      RVec w = simplex_least_squares(q).x;
      w /= w.sum();
      if ((q * w).norm() <= (p * weights).norm()) {
        std::vector<CMat> kept;
        for (Index k : big) kept.push_back(atoms[static_cast<std::size_t>(k)]);
        atoms = std::move(kept);
        weights = w;
      }
    }
  }

  out.weights.assign(weights.data(), weights.data() + weights.size());
  out.unitaries.clear();
  for (const CMat& u : atoms) out.unitaries.push_back(canonical_phase(u));
  out.residual = decomposition_residual(ch, out.weights, out.unitaries);
  out.verdict = out.residual <= cfg.eps_mu ? DecompositionVerdict::MixedUnitary
                                           : DecompositionVerdict::Undetermined;
  return out;
}

double witness_value(const Channel& gamma, const Channel& phi) {
  if (gamma.dim() != phi.dim()) throw Error(ErrorKind::ShapeMismatch, "witness_value: dimension mismatch");
  if (!is_hermitian(gamma.choi(), 1e-9) || !is_hermitian(phi.choi(), 1e-9))
    throw Error(ErrorKind::NotHermitian, "witness_value needs Hermitian-preserving maps");
  return hs_inner(gamma.choi(), phi.choi()).real();
}

bool separates(const Witness& w, double delta, double tau) {
  if (!(w.value_on_target <= -delta)) return false;
  if (w.grade == CertificateGrade::Analytic && w.analytic_floor) return *w.analytic_floor >= -1e-12;
  return w.min_unitary_value >= -tau;
}

double estimate_min_unitary_value(const Channel& gamma, const LmoConfig& cfg, const std::vector<CMat>& hints) {
  return lmo_unitary(hermitian_part(gamma.choi()), Direction::Min, cfg, hints).objective;
}

double min_trace_a_abar(std::span<const double> mu) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0)) throw Error(ErrorKind::InvalidArgument, "singular values must be nonnegative");
    if (i > 0 && mu[i] > mu[i - 1]) throw Error(ErrorKind::InvalidArgument, "singular values must be descending");
  }
  double total = 0.0;
  std::size_t j = 0;
  for (; j + 1 < mu.size(); j += 2) total -= 2.0 * mu[j] * mu[j + 1];
  if (j < mu.size()) total += mu[j] * mu[j];
  return total;
}

CMat paired_block_minimizer(std::span<const double> mu) {
  (void)min_trace_a_abar(mu);  // validates the input
  const auto d = static_cast<Index>(mu.size());
  CMat a = CMat::Zero(d, d);
  Index j = 0;
  for (; j + 1 < d; j += 2) {
    a(j, j + 1) = mu[static_cast<std::size_t>(j)];
    a(j + 1, j) = -mu[static_cast<std::size_t>(j + 1)];
  }
  if (j < d) a(j, j) = mu[static_cast<std::size_t>(j)];
  return a;
}

double conj_floor(const CMat& b) {
  require_square(b, "conj_floor");
  const std::vector<double> mu = svd_values(b);
  return min_trace_a_abar(mu);
}

Channel transpose_witness_map(const CMat& b) {
  require_square(b, "transpose_witness_map");
  const Index d = b.rows();
  const CMat bb = b;
  return Channel::from_function(d, [bb, d](const CMat& x) -> CMat {
    return 0.5 * (bb * x.transpose() * bb.adjoint() + x.trace() * CMat::Identity(d, d) / static_cast<double>(d));
  });
}

double transpose_witness_floor(const CMat& b) {
  const auto d = static_cast<double>(b.rows());
  return (conj_floor(b) + 1.0) / (2.0 * d * d);
}

Witness transpose_witness(const CMat& b) {
  if (b.rows() != 3 || b.cols() != 3) throw Error(ErrorKind::ShapeMismatch, "transpose_witness needs a 3x3 B");
  if (!is_unitary(b, 1e-9)) throw Error(ErrorKind::NotUnitary, "transpose_witness needs a unitary B");
  const cplx t = (b.adjoint() * b.transpose()).trace();
  if (std::abs(t + 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "transpose_witness needs tr(B* B^T) = -1");
  Witness w;
  w.gamma = transpose_witness_map(b);
  w.id_value = witness_value(w.gamma, identity_channel(3));
  w.analytic_floor = transpose_witness_floor(b);
  w.min_unitary_value = estimate_min_unitary_value(w.gamma, LmoConfig{});
  w.grade = *w.analytic_floor >= -1e-12 ? CertificateGrade::Analytic : CertificateGrade::Heuristic;
  return w;
}

std::optional<CMat> recognize_transpose_witness(const Channel& gamma) {
  const Index d = gamma.dim();
  if (d < 2) return std::nullopt;
  // K(X) = 2 Gamma(X^T) - tr(X) I/d equals Ad_{B*} exactly for Gamma_B.
  const Channel k = Channel::from_function(d, [&gamma, d](const CMat& x) -> CMat {
    return 2.0 * gamma.apply(x.transpose()) - x.trace() * CMat::Identity(d, d) / static_cast<double>(d);
  });
  if (!is_hermitian(k.choi(), 1e-9)) return std::nullopt;
  std::vector<CMat> kraus;
  try {
    kraus = kraus_of(k);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (kraus.size() != 1 || !is_unitary(kraus.front(), 1e-8)) return std::nullopt;
  CMat b = kraus.front().adjoint();
  b = polar_retract(b);
  if (choi_distance(gamma, transpose_witness_map(b)) > 1e-10) return std::nullopt;
  return b;
}

Witness with_target(Witness w, const Channel& target) {
  w.value_on_target = witness_value(w.gamma, target);
  return w;
}

Witness evaluate_witness(const Channel& gamma, const Channel& target, const LmoConfig& cfg) {
  Witness w;
  w.gamma = gamma;
  w.value_on_target = witness_value(gamma, target);
  w.id_value = witness_value(gamma, identity_channel(gamma.dim()));
  w.min_unitary_value = estimate_min_unitary_value(gamma, cfg);
  w.grade = CertificateGrade::Heuristic;
  const VerifyReport vr = verify(gamma);
  if (vr.is_tp && vr.is_unital && vr.is_hermitian_preserving) {
    if (const auto b = recognize_transpose_witness(gamma)) {
      w.analytic_floor = transpose_witness_floor(*b);
      if (*w.analytic_floor >= -1e-12) w.grade = CertificateGrade::Analytic;
    }
  }
  return w;
}

RMat jump_quadratic_form(const CMat& m) {
  const Index d2 = m.rows();
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(d2))));
  if (d * d != d2 || m.cols() != d2) throw Error(ErrorKind::ShapeMismatch, "jump_quadratic_form: size");

  // <M, J(X -> A X B)> = (1/d) a^T R b with a, b the row-major vectorizations
  // of A, B and R[(k,i),(j,l)] = conj(M[(i,k),(j,l)]).
  CMat r(d2, d2);
  for (Index i = 0; i < d; ++i)
    for (Index k = 0; k < d; ++k) r.row(k * d + i) = m.row(i * d + k).conjugate();
  auto rowvec = [d](const CMat& a) {
    CVec v(d * d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) v(i * d + j) = a(i, j);
    return v;
  };
  const std::vector<CMat> g = traceless_hermitian_basis(d);
  const auto nb = static_cast<Index>(g.size());
  CMat gv(d2, nb);
  for (Index a = 0; a < nb; ++a) gv.col(a) = rowvec(g[static_cast<std::size_t>(a)]);
  const double inv_d = 1.0 / static_cast<double>(d);
  const CMat t = inv_d * (gv.transpose() * r * gv);
  const CVec iv = rowvec(CMat::Identity(d, d));
  const CVec left = r * iv;                  // T(C, I) = (1/d) c^T R i
  const CVec right = r.transpose() * iv;     // T(I, C) = (1/d) i^T R c

  RMat q(nb, nb);
  for (Index a = 0; a < nb; ++a)
    for (Index b = a; b < nb; ++b) {
      const CMat c = g[static_cast<std::size_t>(a)] * g[static_cast<std::size_t>(b)] +
                     g[static_cast<std::size_t>(b)] * g[static_cast<std::size_t>(a)];
      const CVec cv = rowvec(c);
      const cplx anti = inv_d * ((cv.array() * left.array()).sum() + (cv.array() * right.array()).sum());
      const cplx val = 0.5 * (t(a, b) + t(b, a)) - 0.25 * anti;
      q(a, b) = q(b, a) = val.real();
    }
  return q;
}

Channel hermitian_jump_map(const CMat& a) {
  require_square(a, "hermitian_jump_map");
  const CMat aa = a;
  const CMat a2 = a * a;
  return Channel::from_function(a.rows(), [aa, a2](const CMat& x) -> CMat {
    return aa * x * aa - 0.5 * (a2 * x + x * a2);
  });
}

}  // namespace muchan
