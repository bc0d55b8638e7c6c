#include "muchan/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "muchan/coords.hpp"
#include "muchan/nnls.hpp"
#include "muchan/parallel.hpp"
#include "muchan/weyl.hpp"

namespace muchan {

namespace {

CMat compile(const CMat& h, const std::vector<CMat>& jumps, Index d) {
  const CMat id = CMat::Identity(d, d);
  const cplx i(0, 1);
  CMat s = i * kron(id, h) - i * kron(h.transpose(), id);
  for (const CMat& l : jumps) {
    const CMat ll = l.adjoint() * l;
    s += kron(l.transpose(), l.adjoint()) - 0.5 * kron(id, ll) - 0.5 * kron(ll.transpose(), id);
  }
  return s;
}

void check_shapes(const CMat& h, const std::vector<CMat>& jumps) {
  require_square(h, "Hamiltonian");
  require_finite(h, "Hamiltonian");
  for (const CMat& l : jumps) {
    require_same_shape(h, l, "jump operator");
    require_finite(l, "jump operator");
  }
}

double balance(const std::vector<CMat>& jumps, Index d) {
  CMat b = CMat::Zero(d, d);
  for (const CMat& l : jumps) b += l * l.adjoint() - l.adjoint() * l;
  return b.norm();
}

double scale_of(const CMat& s) { return std::max(1.0, s.norm()); }

}  // namespace

GKLSData GKLSData::build(CMat h, std::vector<CMat> jumps) {
  check_shapes(h, jumps);
  if (!is_hermitian(h, 1e-10)) throw Error(ErrorKind::NotHermitian, "Hamiltonian must be Hermitian");
  const Index d = h.rows();
  if (balance(jumps, d) > 1e-9)
    throw Error(ErrorKind::NotTracePreserving, "jumps violate sum L L* = sum L* L");
  GKLSData g;
  g.dim = d;
  g.h = std::move(h);
  g.jumps = std::move(jumps);
  g.compiled = gkls_superop(g);
  return g;
}

GKLSData GKLSData::build_unchecked(CMat h, std::vector<CMat> jumps) {
  check_shapes(h, jumps);
  GKLSData g;
  g.dim = h.rows();
  g.h = std::move(h);
  g.jumps = std::move(jumps);
  g.compiled = compile(g.h, g.jumps, g.dim);
  return g;
}

double GKLSData::balance_residual() const { return balance(jumps, dim); }

CMat gkls_superop(const GKLSData& g) {
  check_shapes(g.h, g.jumps);
  const Index d = g.h.rows();
  if (!is_hermitian(g.h, 1e-10)) throw Error(ErrorKind::NotHermitian, "Hamiltonian must be Hermitian");
  if (balance(g.jumps, d) > 1e-9)
    throw Error(ErrorKind::NotTracePreserving, "jumps violate sum L L* = sum L* L");
  const CMat s = compile(g.h, g.jumps, d);
  const CVec vi = vec(CMat::Identity(d, d));
  const double tol = 1e-10 * scale_of(s);
  if ((s * vi).norm() > tol) throw Error(ErrorKind::InvalidArgument, "generator does not annihilate I");
  if ((vi.transpose() * s).norm() > tol) throw Error(ErrorKind::NotTracePreserving, "generator is not trace-annihilating");
  return s;
}

GeneratorReport validate_generator(const Channel& l) {
  const Index d = l.dim();
  const CMat& s = l.superop();
  const CMat& j = l.choi();
  GeneratorReport r;
  r.hermitian_preserving = is_hermitian(j, 1e-9);
  const CVec vi = vec(CMat::Identity(d, d));
  const double tol = 1e-10 * scale_of(s);
  r.unital_residual = (s * vi).norm();
  r.trace_residual = (vi.transpose() * s).norm();
  r.unital = r.unital_residual <= tol;
  r.trace_annihilating = r.trace_residual <= tol;

  CVec omega = CVec::Zero(d * d);
  for (Index i = 0; i < d; ++i) omega(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  const CMat proj = CMat::Identity(d * d, d * d) - omega * omega.adjoint();
  const CMat comp = proj * hermitian_part(j) * proj;
  r.min_compressed_eigenvalue = eig_herm(hermitian_part(comp)).real_values().front();
  r.conditionally_cp = r.min_compressed_eigenvalue >= -kPsdTol;
  return r;
}

Channel evolve(const Channel& l, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "evolve needs a finite t >= 0");
  if (t == 0.0) return identity_channel(l.dim());
  return Channel::from_superop(expm(t * l.superop()));
}

PeripheralSplit generator_peripheral_split(const Channel& l) {
  PeripheralSplit out = spectral_split(l, true);
  if (out.max_real_part > kClusterTol)
    throw Error(ErrorKind::InvalidArgument, "generator has an eigenvalue with positive real part");
  if (!out.diagonalizable)
    throw Error(ErrorKind::InvalidArgument, "peripheral spectrum of the generator is not diagonalizable");
  return out;
}

const char* to_string(AllTimesVerdict v) {
  switch (v) {
    case AllTimesVerdict::AllTimesMU: return "AllTimesMU";
    case AllTimesVerdict::NotAllTimesMUAnalytic: return "NotAllTimesMU-Analytic";
    case AllTimesVerdict::NotAllTimesMUHeuristic: return "NotAllTimesMU-Heuristic";
    case AllTimesVerdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

namespace {

// Primal atoms for the generator cone. The first `fixed` columns (Hamiltonian
// directions with both signs, Weyl atoms) are never pruned.
struct PrimalFit {
  enum class Kind { Fixed, Unitary, Jump };
  const ChoiCoordinates* ccp;
  RVec aid;
  std::vector<RMat> qk;  // ((h^T Q_k h))_k are the coordinates of J(D_A), A = sum h_a G_a
  std::vector<RVec> cols;
  std::vector<Kind> kinds;
  std::vector<CMat> units;
  std::vector<RVec> hs;
  RVec x;
  std::size_t ham_cols = 0;

  PrimalFit(const ChoiCoordinates& c, Index d) : ccp(&c), aid(c.unitary_coords(CMat::Identity(d, d))) {
    const Index n = ccp->size();
    qk.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) qk.push_back(jump_quadratic_form(ccp->from_coords(RVec::Unit(n, k))));
  }

  RVec jump_coords(const RVec& h) const {
    RVec a(static_cast<Index>(qk.size()));
    for (std::size_t k = 0; k < qk.size(); ++k) a(static_cast<Index>(k)) = h.dot(qk[k] * h);
    return a;
  }
  void add(RVec a, Kind kind, CMat u = {}, RVec h = {}) {
    cols.push_back(std::move(a));
    kinds.push_back(kind);
    units.push_back(std::move(u));
    hs.push_back(std::move(h));
  }
  RMat matrix() const {
    RMat a(ccp->size(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) a.col(static_cast<Index>(k)) = cols[k];
    return a;
  }
  // Re-solves the weights, warm-started from the current support.
  double solve(const RVec& ell) {
    std::vector<Index> warm;
    for (Index k = 0; k < x.size(); ++k)
      if (x(k) > 0) warm.push_back(k);
    const RMat a = matrix();
    x = nnls(a, ell, warm).x;
    return (a * x - ell).norm();
  }
  // Drops non-fixed atoms with zero weight.
  void prune() {
    std::size_t w = 0;
    RVec nx(x.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (kinds[k] != Kind::Fixed && !(x(static_cast<Index>(k)) > 0)) continue;
      cols[w] = std::move(cols[k]);
      kinds[w] = kinds[k];
      units[w] = std::move(units[k]);
      hs[w] = std::move(hs[k]);
      nx(static_cast<Index>(w)) = x(static_cast<Index>(k));
      ++w;
    }
    cols.resize(w);
    kinds.resize(w);
    units.resize(w);
    hs.resize(w);
    x = nx.head(static_cast<Index>(w));
  }

  // Damped Gauss-Newton on the current face. Free parameters: the weights of
  // the supported unitary and Weyl atoms, the Hamiltonian coefficients, a
  // symmetric T on the range V of the jump part (jumps = V T V^T) and a
  // tangent step U -> U exp(i K) for every supported unitary atom. A step is
  // kept only while the parameters stay in the cone (weights >= 0, T psd);
  // the result replaces the face when the re-solved fit improves.
  bool polish(const RVec& ell, double current) {
    const Index n = ccp->size();
    const auto nb = static_cast<Index>(qk.front().rows());
    const Index d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(nb + 1))));
    RMat s = RMat::Zero(nb, nb);
    std::vector<std::size_t> lin;
    for (std::size_t k = ham_cols; k < cols.size(); ++k) {
      const double w = x(static_cast<Index>(k));
      if (!(w > 0)) continue;
      if (kinds[k] == Kind::Jump)
        s += w * hs[k] * hs[k].transpose();
      else
        lin.push_back(k);
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(s);
    const double smax = std::max(0.0, es.eigenvalues().maxCoeff());
    std::vector<Index> range;
    for (Index i = 0; i < nb; ++i)
      if (smax > 0 && es.eigenvalues()(i) > 1e-10 * smax) range.push_back(i);
    const auto r = static_cast<Index>(range.size());
    RMat v(nb, r);
    for (Index i = 0; i < r; ++i) v.col(i) = es.eigenvectors().col(range[static_cast<std::size_t>(i)]);
    std::vector<RMat> vq;
    for (const RMat& q : qk) vq.push_back(v.transpose() * q * v);
    const std::vector<CMat> basis = traceless_hermitian_basis(d);

    const auto nl = static_cast<Index>(lin.size());
    const auto nh = static_cast<Index>(ham_cols / 2);
    const Index nt = r * (r + 1) / 2;
    std::vector<std::size_t> mov;  // positions in `lin` of movable unitary atoms
    for (std::size_t k = 0; k < lin.size(); ++k)
      if (kinds[lin[k]] == Kind::Unitary) mov.push_back(k);
    const auto nm = static_cast<Index>(mov.size());
    const Index np = nl + nh + nt + nm * nb;

    // Parameters: [lin weights | ham | T (upper triangle) | K per moving atom].
    RVec theta = RVec::Zero(np);
    for (Index k = 0; k < nl; ++k) theta(k) = x(static_cast<Index>(lin[static_cast<std::size_t>(k)]));
    for (Index k = 0; k < nh; ++k) theta(nl + k) = x(2 * k) - x(2 * k + 1);
    {
      const RMat t0 = v.transpose() * s * v;
      Index c = nl + nh;
      for (Index i = 0; i < r; ++i)
        for (Index j = i; j < r; ++j, ++c) theta(c) = t0(i, j);
    }
    std::vector<CMat> us(static_cast<std::size_t>(nm));
    for (Index m = 0; m < nm; ++m) us[static_cast<std::size_t>(m)] = units[lin[mov[static_cast<std::size_t>(m)]]];

    auto tmat = [&](const RVec& th) {
      RMat t(r, r);
      Index c = nl + nh;
      for (Index i = 0; i < r; ++i)
        for (Index j = i; j < r; ++j, ++c) t(i, j) = t(j, i) = th(c);
      return t;
    };
    auto moved = [&](const RVec& th, Index m) {
      CMat k = CMat::Zero(d, d);
      for (Index b = 0; b < nb; ++b) k += th(nl + nh + nt + m * nb + b) * basis[static_cast<std::size_t>(b)];
      return CMat(us[static_cast<std::size_t>(m)] * expm(cplx(0, 1) * k));
    };
    auto lin_col = [&](const RVec& th, Index k) -> RVec {
      for (Index m = 0; m < nm; ++m)
        if (mov[static_cast<std::size_t>(m)] == static_cast<std::size_t>(k)) return ccp->unitary_coords(moved(th, m)) - aid;
      return cols[lin[static_cast<std::size_t>(k)]];
    };
    auto feasible = [&](const RVec& th) {
      for (Index k = 0; k < nl; ++k)
        if (th(k) < 0) return false;
      if (r == 0) return true;
      Eigen::SelfAdjointEigenSolver<RMat> et(tmat(th));
      return et.eigenvalues().minCoeff() >= 0;
    };
    auto residual = [&](const RVec& th) {
      RVec res = -ell;
      for (Index k = 0; k < nl; ++k) res += th(k) * lin_col(th, k);
      for (Index k = 0; k < nh; ++k) res += th(nl + k) * cols[static_cast<std::size_t>(2 * k)];
      Index c = nl + nh;
      for (Index i = 0; i < r; ++i)
        for (Index j = i; j < r; ++j, ++c)
          for (Index q = 0; q < n; ++q) res(q) += (i == j ? 1.0 : 2.0) * th(c) * vq[static_cast<std::size_t>(q)](i, j);
      return res;
    };

    RVec res = residual(theta);
    double f = res.norm();
    double lambda = 1e-6 * std::max(1.0, f);
    for (int step = 0; step < 40 && f > 1e-15; ++step) {
      RMat jac = RMat::Zero(n, np);
      for (Index k = 0; k < nl; ++k) jac.col(k) = lin_col(theta, k);
      for (Index k = 0; k < nh; ++k) jac.col(nl + k) = cols[static_cast<std::size_t>(2 * k)];
      Index c = nl + nh;
      for (Index i = 0; i < r; ++i)
        for (Index j = i; j < r; ++j, ++c)
          for (Index q = 0; q < n; ++q) jac(q, c) = (i == j ? 1.0 : 2.0) * vq[static_cast<std::size_t>(q)](i, j);
      for (Index m = 0; m < nm; ++m) {
        const CMat u = moved(theta, m);
        const CVec w = bell_vector(u);
        const double wt = theta(static_cast<Index>(mov[static_cast<std::size_t>(m)]));
        for (Index b = 0; b < nb; ++b) {
          const CVec dw = bell_vector(cplx(0, 1) * u * basis[static_cast<std::size_t>(b)]);
          const CMat dj = (dw * w.adjoint() + w * dw.adjoint()) / static_cast<double>(d);
          jac.col(nl + nh + nt + m * nb + b) = wt * ccp->coords(dj);
        }
      }
      const RMat jtj = jac.transpose() * jac;
      const RVec g = jac.transpose() * res;
      bool accepted = false;
      for (int tries = 0; tries < 12; ++tries, lambda *= 10) {
        RMat sys = jtj;
        sys.diagonal().array() += lambda;
        const RVec delta = sys.ldlt().solve(-g);
        RVec trial = theta + delta;
        if (!feasible(trial)) continue;
        const RVec tr = residual(trial);
        if (tr.norm() < f) {
          // Re-base the moving atoms so that K restarts at zero.
          for (Index m = 0; m < nm; ++m) {
            us[static_cast<std::size_t>(m)] = polar_retract(moved(trial, m));
            trial.segment(nl + nh + nt + m * nb, nb).setZero();
          }
          theta = trial;
          res = residual(theta);
          f = res.norm();
          lambda = std::max(1e-15, lambda / 100);
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }

    PrimalFit next = *this;
    next.cols.resize(ham_cols);
    next.kinds.resize(ham_cols);
    next.units.resize(ham_cols);
    next.hs.resize(ham_cols);
    RVec nx = RVec::Zero(static_cast<Index>(ham_cols) + nl + r);
    for (Index k = 0; k < nh; ++k) nx(theta(nl + k) >= 0 ? 2 * k : 2 * k + 1) = std::abs(theta(nl + k));
    for (Index k = 0; k < nl; ++k) {
      const std::size_t src = lin[static_cast<std::size_t>(k)];
      if (kinds[src] == Kind::Unitary) {
        Index m = 0;
        while (mov[static_cast<std::size_t>(m)] != static_cast<std::size_t>(k)) ++m;
        const CMat& u = us[static_cast<std::size_t>(m)];
        next.add(ccp->unitary_coords(u) - aid, Kind::Unitary, u);
      } else {
        next.add(cols[src], kinds[src], units[src], hs[src]);
      }
      nx(static_cast<Index>(ham_cols) + k) = theta(k);
    }
    if (r > 0) {
      Eigen::SelfAdjointEigenSolver<RMat> et(tmat(theta));
      for (Index i = 0; i < r; ++i) {
        const RVec h = v * et.eigenvectors().col(i);
        next.add(jump_coords(h), Kind::Jump, {}, h);
        nx(static_cast<Index>(ham_cols) + nl + i) = std::max(0.0, et.eigenvalues()(i));
      }
    }
    // Fixed Weyl atoms outside the support come back with zero weight.
    for (std::size_t k = ham_cols; k < cols.size(); ++k)
      if (kinds[k] == Kind::Fixed && !(x(static_cast<Index>(k)) > 0)) {
        next.add(cols[k], Kind::Fixed);
        nx.conservativeResize(nx.size() + 1);
        nx(nx.size() - 1) = 0.0;
      }
    next.x = nx;
    const double fitted = next.solve(ell);
    if (!(fitted < current)) return false;
    *this = std::move(next);
    return true;
  }
};

}  // namespace

AllTimesResult mu_all_times(const Channel& l, const AllTimesConfig& cfg) {
  const Index d = l.dim();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "mu_all_times needs d >= 2");
  if (!is_hermitian(l.choi(), 1e-9)) throw Error(ErrorKind::NotHermitian, "generator must be Hermitian-preserving");
  AllTimesResult out;

  std::vector<Witness> candidates = cfg.candidate_witnesses;
  if (const auto b = recognize_example59(l)) candidates.push_back(transpose_witness(*b));
  for (const Witness& w : candidates) {
    Witness ww = with_target(w, l);
    if (separates(ww, cfg.delta_wit, cfg.witness.tau_wit) && ww.grade == CertificateGrade::Analytic &&
        std::abs(ww.id_value) <= 1e-12) {
      out.verdict = AllTimesVerdict::NotAllTimesMUAnalytic;
      out.route = "analytic-witness";
      out.witness = std::move(ww);
      return out;
    }
  }

  const ChoiCoordinates& cc = choi_coordinates(d);
  const Index n = cc.size();
  const CMat& jl = l.choi();
  const RVec ell = cc.coords(hermitian_part(jl));

  // Every Ad_U - id is unital and trace-annihilating, so its Choi matrix lies
  // in span{G_a (x) G_b}. A component of J(L) off that span (and off I) is a
  // witness that vanishes on the whole cone.
  {
    const double inv = 1.0 / static_cast<double>(d * d);
    const CMat jh = hermitian_part(jl);
    CMat z = jh - cc.from_coords(ell) - jh.trace().real() * inv * CMat::Identity(d * d, d * d);
    z = hermitian_part(z);
    const double zn = z.norm();
    if (zn > 1e-9 * std::max(1.0, jh.norm())) {
      Witness w;
      w.gamma = Channel::from_choi(-z / zn);
      w.value_on_target = witness_value(w.gamma, l);
      w.min_unitary_value = estimate_min_unitary_value(w.gamma, cfg.lmo);
      w.id_value = witness_value(w.gamma, identity_channel(d));
      out.primal_residual = zn;
      if (separates(w, cfg.delta_wit, cfg.witness.tau_wit)) {
        out.verdict = AllTimesVerdict::NotAllTimesMUHeuristic;
        out.route = "off-subspace";
        out.witness = std::move(w);
        return out;
      }
    }
  }

  const std::vector<CMat> basis = traceless_hermitian_basis(d);
  PrimalFit fit(cc, d);
  for (const CMat& h : basis) {
    const CMat hh = h;
    const Channel der = Channel::from_function(d, [hh](const CMat& x) -> CMat {
      const cplx i(0, 1);
      return i * (hh * x - x * hh);
    });
    const RVec a = cc.coords(hermitian_part(der.choi()));
    fit.add(a, PrimalFit::Kind::Fixed);
    fit.add(-a, PrimalFit::Kind::Fixed);
  }
  fit.ham_cols = fit.cols.size();
  for (const CMat& w : weyl_unitaries(d)) {
    const RVec a = cc.unitary_coords(w) - fit.aid;
    if (a.norm() > 1e-12) fit.add(a, PrimalFit::Kind::Fixed);
  }

  LmoConfig lc = cfg.lmo;
  RVec last_resv;
  std::vector<CMat> atoms_u;
  for (int it = 0;; ++it) {
    double res = fit.solve(ell);
    if (res > cfg.eps && (it % 5 == 4) && fit.polish(ell, res)) res = (fit.matrix() * fit.x - ell).norm();
    fit.prune();
    const RVec resv = fit.matrix() * fit.x - ell;
    out.primal_residual = resv.norm();
    out.iterations = it;
    out.atoms = static_cast<int>(std::count_if(fit.kinds.begin(), fit.kinds.end(),
                                               [](PrimalFit::Kind k) { return k != PrimalFit::Kind::Fixed; }));
    last_resv = resv;
    if (out.primal_residual <= cfg.eps) {
      out.verdict = AllTimesVerdict::AllTimesMU;
      out.route = "primal";
      return out;
    }
    if (it >= cfg.max_iters) break;

    const CMat r = cc.from_coords(resv);
    lc.seed = derive_seed(cfg.lmo.seed, static_cast<std::uint64_t>(it));
    const LmoResult lr = lmo_unitary(r, Direction::Min, lc);
    const double price_u = lr.objective - fit.aid.dot(resv);

    Eigen::SelfAdjointEigenSolver<RMat> es(jump_quadratic_form(r));
    const double price_j = es.eigenvalues()(0);

    const double floor = -1e-13 * std::max(1.0, resv.norm());
    if (price_u >= floor && price_j >= floor) {
      // Stalled: one last polish of the face before giving up.
      if (fit.polish(ell, out.primal_residual)) continue;
      break;
    }
    if (price_u < floor) {
      fit.add(cc.unitary_coords(lr.unitary) - fit.aid, PrimalFit::Kind::Unitary, lr.unitary);
      atoms_u.push_back(lr.unitary);
    }
    if (price_j < floor) {
      const RVec h = es.eigenvectors().col(0);
      fit.add(fit.jump_coords(h), PrimalFit::Kind::Jump, {}, h);
    }
    const Index old = fit.x.size();
    fit.x.conservativeResize(static_cast<Index>(fit.cols.size()));
    fit.x.tail(fit.x.size() - old).setZero();
  }

  if (cfg.run_dual) {
    WitnessConfig wc = cfg.witness;
    wc.dual_cone = true;
    // The residual of the cone fit is an approximate dual-cone direction;
    // it is normalized by <Gamma, id> = 0, which needs <w, a(I)> < 0.
    const double wid = last_resv.size() == n ? last_resv.dot(fit.aid) : 0.0;
    if (wid < 0.0) {
      const double inv = 1.0 / static_cast<double>(d * d);
      const RVec y = last_resv * (inv / -wid);
      const Channel g = Channel::from_choi(CMat::Identity(d * d, d * d) * inv + cc.from_coords(y));
      LmoConfig vc = wc.lmo;
      vc.starts = wc.verify_starts;
      vc.seed = derive_seed(wc.lmo.seed, 0xFACADEULL);
      std::vector<CMat> hints = atoms_u;
      hints.push_back(CMat::Identity(d, d));
      Witness w;
      w.gamma = g;
      w.min_unitary_value = estimate_min_unitary_value(g, vc, hints);
      w.id_value = witness_value(g, identity_channel(d));
      w = with_target(std::move(w), l);
      if (separates(w, cfg.delta_wit, wc.tau_wit) && std::abs(w.id_value) <= 1e-12) {
        out.verdict = AllTimesVerdict::NotAllTimesMUHeuristic;
        out.route = "dual-witness";
        out.witness = std::move(w);
        return out;
      }
    }
    Witness w = witness_search(l, wc);
    const bool sep = separates(w, cfg.delta_wit, wc.tau_wit);
    out.witness = std::move(w);
    if (sep) {
      out.verdict = AllTimesVerdict::NotAllTimesMUHeuristic;
      out.route = "dual-witness";
      return out;
    }
  }
  out.verdict = AllTimesVerdict::Undetermined;
  out.route = "none";
  return out;
}

GKLSData kummerer_maassen_generator(const CMat& a) {
  require_square(a, "kummerer_maassen_generator");
  return GKLSData::build_unchecked(CMat::Zero(a.rows(), a.cols()), {a});
}

Channel example59_generator(const CMat& b) {
  if (b.rows() != 3 || b.cols() != 3) throw Error(ErrorKind::ShapeMismatch, "example59_generator needs a 3x3 matrix");
  if (!is_unitary(b)) throw Error(ErrorKind::NotUnitary, "example59_generator needs a unitary B");
  if (std::abs((b.adjoint() * b.transpose()).trace() + 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "example59_generator needs tr(B* B^T) = -1");
  const CMat bb = b;
  return Channel::from_function(3, [bb](const CMat& x) -> CMat {
    return 0.5 * bb * (x.trace() * CMat::Identity(3, 3) - x.transpose()) * bb.adjoint() - x;
  });
}

std::optional<CMat> recognize_example59(const Channel& l) {
  if (l.dim() != 3) return std::nullopt;
  // K = -2 (L + id - (3/2) delta) o T equals Ad_{B*} for the family.
  const CMat s = -2.0 * (l.superop() + CMat::Identity(9, 9) - 1.5 * depolarizing(3).superop()) *
                 transpose_map(3).superop();
  std::vector<CMat> kr;
  try {
    kr = kraus_of(Channel::from_superop(s));
  } catch (const Error&) {
    return std::nullopt;
  }
  if (kr.size() != 1 || !is_unitary(kr.front(), 1e-9)) return std::nullopt;
  const CMat b = kr.front().adjoint();
  if (std::abs((b.adjoint() * b.transpose()).trace() + 1.0) > 1e-9) return std::nullopt;
  if (choi_distance(example59_generator(b), l) > 1e-10) return std::nullopt;
  return b;
}

SeriesCoefficients example59_series(double t) {
  SeriesCoefficients c;
  double* slot[4] = {&c.a, &c.b, &c.c, &c.d};
  // term_k = (-t/2)^k / k!, with the sign of odd k kept.
  double term = 1.0;
  for (int k = 0; k < 400; ++k) {
    if (k > 0) term *= (-t / 2.0) / static_cast<double>(k);
    *slot[k % 4] += term;
    if (k > t && std::abs(term) < 1e-18) break;
  }
  return c;
}

SeriesCoefficients example59_closed_coefficients(double t) {
  const double s = t / 2.0;
  return {(std::cosh(s) + std::cos(s)) / 2.0, -(std::sinh(s) + std::sin(s)) / 2.0,
          (std::cosh(s) - std::cos(s)) / 2.0, -(std::sinh(s) - std::sin(s)) / 2.0};
}

double example59_root_function(double t) {
  return std::exp(t) - std::exp(-t / 2.0) - 3.0 * std::sinh(t / 2.0) - 2.0 * std::sin(t / 2.0);
}

double closed_form_g(double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "closed_form_g needs t >= 0");
  return std::exp(-t) / 9.0 * example59_root_function(t);
}

double find_root_t0() {
  double lo = 0.1;
  double hi = 3.0;
  double flo = example59_root_function(lo);
  double fhi = example59_root_function(hi);
  if (!(flo < 0 && fhi > 0)) throw Error(ErrorKind::NoBracket, "no sign change on (0.1, 3)");
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(example59_root_function, lo, hi, flo, fhi,
                                                  boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

namespace {

void require_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty time grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw Error(ErrorKind::InvalidArgument, "grid times must be finite and >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorKind::InvalidArgument, "grid must be strictly increasing");
  }
}

void fill_sign_changes(ScanReport& r) {
  for (std::size_t i = 0; i + 1 < r.grid.size(); ++i) {
    const double a = r.witness_values[i];
    const double b = r.witness_values[i + 1];
    if (std::isnan(a) || std::isnan(b)) continue;
    if ((a < 0 && b > 0) || (a > 0 && b < 0))
      r.sign_changes.push_back(r.grid[i] + (r.grid[i + 1] - r.grid[i]) * a / (a - b));
  }
}

}  // namespace

ScanReport witness_curve(const Channel& l, const Witness& gamma, const std::vector<double>& grid) {
  require_grid(grid);
  const VerifyReport vr = verify(gamma.gamma);
  if (!vr.is_hermitian_preserving || !vr.is_tp || !vr.is_unital)
    throw Error(ErrorKind::InvalidArgument, "witness must be unital, trace-preserving and Hermitian-preserving");
  ScanReport r;
  r.grid = grid;
  for (double t : grid) r.witness_values.push_back(witness_value(gamma.gamma, evolve(l, t)));
  fill_sign_changes(r);
  return r;
}

ScanReport eventual_mu_scan(const Channel& l, const std::vector<double>& grid, const ClassifyConfig& cfg) {
  require_grid(grid);
  ClassifyConfig c = cfg;
  if (const auto b = recognize_example59(l)) c.candidate_witnesses.push_back(transpose_witness(*b));

  const auto n = static_cast<int>(grid.size());
  std::vector<Classification> res(grid.size());
  std::vector<double> values(grid.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(n, default_threads(), [&](int i) {
    const Channel phi = evolve(l, grid[static_cast<std::size_t>(i)]);
    res[static_cast<std::size_t>(i)] = classify_channel(phi, c);
    if (!c.candidate_witnesses.empty())
      values[static_cast<std::size_t>(i)] = witness_value(c.candidate_witnesses.front().gamma, phi);
    else if (res[static_cast<std::size_t>(i)].witness)
      values[static_cast<std::size_t>(i)] = res[static_cast<std::size_t>(i)].witness->value_on_target;
  });

  ScanReport r;
  r.grid = grid;
  r.witness_values = values;
  for (const Classification& cl : res) {
    r.mu_verdicts.push_back(cl.verdict);
    r.residuals.push_back(cl.residual);
    r.routes.push_back(cl.route);
  }
  fill_sign_changes(r);

  std::size_t lead = 0;
  while (lead < r.mu_verdicts.size() && is_not_mu(r.mu_verdicts[lead])) ++lead;
  if (lead > 0) r.t0_estimate = grid[lead - 1];
  std::size_t tail = r.mu_verdicts.size();
  while (tail > 0 && r.mu_verdicts[tail - 1] == MUVerdict::MixedUnitary) --tail;
  if (tail < r.mu_verdicts.size()) r.t1_estimate = grid[tail];
  return r;
}

std::vector<double> linear_grid(double start, double end, int points) {
  if (points < 2 || !(end > start)) throw Error(ErrorKind::InvalidArgument, "grid needs end > start and points >= 2");
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(start + (end - start) * i / (points - 1));
  return g;
}

std::vector<double> log_grid(double start, double end, int points) {
  if (points < 2 || !(end > start) || !(start > 0))
    throw Error(ErrorKind::InvalidArgument, "log grid needs 0 < start < end and points >= 2");
  std::vector<double> g;
  const double a = std::log(start);
  const double b = std::log(end);
  for (int i = 0; i < points; ++i) g.push_back(std::exp(a + (b - a) * i / (points - 1)));
  g.front() = start;
  g.back() = end;
  return g;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3 && parts.size() != 4) throw Error(ErrorKind::Parse, "grid spec must be start:end:points[:log]");
  if (parts.size() == 4 && parts[3] != "log" && parts[3] != "lin")
    throw Error(ErrorKind::Parse, "grid spacing must be log or lin");
  double start = 0, end = 0;
  int points = 0;
  try {
    std::size_t pos = 0;
    start = std::stod(parts[0], &pos);
    if (pos != parts[0].size()) throw std::invalid_argument("start");
    end = std::stod(parts[1], &pos);
    if (pos != parts[1].size()) throw std::invalid_argument("end");
    points = std::stoi(parts[2], &pos);
    if (pos != parts[2].size()) throw std::invalid_argument("points");
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Parse, "grid spec has a malformed number");
  }
  if (parts.size() == 4 && parts[3] == "log") return log_grid(start, end, points);
  return linear_grid(start, end, points);
}

}  // namespace muchan
