#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "muchan/coords.hpp"
#include "muchan/mucone.hpp"
#include "muchan/nnls.hpp"
#include "muchan/weyl.hpp"

namespace muchan {

namespace {

// Linear constraints rows * y >= rhs on the witness coordinates.
struct Cuts {
  std::vector<RVec> rows;
  std::vector<double> rhs;

  void add(RVec row, double b) {
    rows.push_back(std::move(row));
    rhs.push_back(b);
  }
  void add_equality(const RVec& row, double b) {
    add(row, b);
    add(-row, -b);
  }
  RMat matrix(Index n) const {
    RMat g(static_cast<Index>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i) g.row(static_cast<Index>(i)) = rows[i].transpose();
    return g;
  }
  RVec vector() const { return Eigen::Map<const RVec>(rhs.data(), static_cast<Index>(rhs.size())); }
};

RVec project(const RMat& g, const RVec& h, const RVec& z) {
  const LdpResult r = least_distance(g, h - g * z);
  if (!r.feasible) throw Error(ErrorKind::InvalidArgument, "witness cuts became infeasible");
  return z + r.x;
}

// min phi.y subject to g y >= h and ||y|| <= radius. The minimizer of
// phi.y + (mu/2)||y||^2 over the polyhedron is the projection of -phi/mu,
// and its norm decreases in mu; the ball constraint picks mu.
RVec solve_ball_lp(const RMat& g, const RVec& h, const RVec& phi, double radius, double& mu_hint) {
  const double pn = phi.norm();
  if (pn == 0.0) return project(g, h, RVec::Zero(phi.size()));
  auto y_of = [&](double t) { return project(g, h, -phi / std::exp(t)); };
  auto excess = [&](double t) { return std::log(std::max(y_of(t).norm(), 1e-300)) - std::log(radius); };

  const double step = std::log(4.0);
  double lo = mu_hint > 0 ? std::log(mu_hint) : std::log(pn / radius);
  double hi = lo;
  double f_lo = excess(lo);
  double f_hi = f_lo;
  if (f_lo > 0) {
    for (int i = 0; i < 80 && f_hi > 0; ++i) {
      lo = hi;
      f_lo = f_hi;
      hi += step;
      f_hi = excess(hi);
    }
  } else {
    for (int i = 0; i < 80 && f_lo <= 0; ++i) {
      hi = lo;
      f_hi = f_lo;
      lo -= step;
      f_lo = excess(lo);
    }
    // The linear program is bounded inside the ball.
    if (f_lo <= 0) return y_of(lo);
  }
  if (f_hi == 0) {
    mu_hint = std::exp(hi);
    return y_of(hi);
  }
  boost::uintmax_t iters = 60;
  const auto bracket = boost::math::tools::toms748_solve(
      excess, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(40), iters);
  mu_hint = std::exp(bracket.second);
  return y_of(bracket.second);
}

bool same_channel(const CMat& u, const CMat& v) {
  const double d = static_cast<double>(u.rows());
  return std::abs((u.adjoint() * v).trace()) / d > 1.0 - 1e-9;
}

}  // namespace

Witness witness_from_projection(const Channel& target, const MUDecomposition& projection,
                                const WitnessConfig& cfg) {
  const Index d = target.dim();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "witness_from_projection needs d >= 2");
  if (projection.weights.size() != projection.unitaries.size() || projection.weights.empty())
    throw Error(ErrorKind::InvalidArgument, "projection needs matching, non-empty weights and unitaries");
  const ChoiCoordinates& cc = choi_coordinates(d);
  const double inv = 1.0 / static_cast<double>(d * d);
  const double radius = std::sqrt(1.0 - inv);
  const RVec phi = cc.coords(hermitian_part(target.choi()));
  const double c0 = target.choi().trace().real() * inv;

  RVec p = RVec::Zero(cc.size());
  for (std::size_t i = 0; i < projection.weights.size(); ++i)
    p += projection.weights[i] * cc.unitary_coords(projection.unitaries[i]);
  RVec y = p - phi;

  LmoConfig vc = cfg.lmo;
  vc.starts = cfg.verify_starts;
  vc.seed = derive_seed(cfg.lmo.seed, 0xFACADEULL);
  // min_U <y, a_U>; the active atoms are the natural hints.
  const double m = lmo_unitary(cc.from_coords(y), Direction::Min, vc, projection.unitaries).objective;
  Witness out;
  if (!(m < 0.0)) {
    // Cannot happen for a genuine projection; report a non-separating map.
    out.gamma = depolarizing(d);
    out.value_on_target = witness_value(out.gamma, target);
    out.min_unitary_value = inv;
    out.id_value = inv;
    return out;
  }
  y *= inv / -m;
  if (y.norm() > radius) y *= radius / y.norm();
  CMat g = CMat::Identity(d * d, d * d) * inv + cc.from_coords(y);
  double min_value = lmo_unitary(g, Direction::Min, vc, projection.unitaries).objective;
  if (cfg.repair && min_value < 0) {
    const double s = -min_value / (inv - min_value);
    y *= (1.0 - s);
    g = CMat::Identity(d * d, d * d) * inv + cc.from_coords(y);
    min_value = lmo_unitary(g, Direction::Min, vc, projection.unitaries).objective;
  }
  out.gamma = Channel::from_choi(g);
  out.value_on_target = c0 + phi.dot(y);
  out.min_unitary_value = min_value;
  out.id_value = witness_value(out.gamma, identity_channel(d));
  out.grade = CertificateGrade::Heuristic;
  return out;
}

Witness witness_search(const Channel& target, const WitnessConfig& cfg, const MUDecomposition* projection) {
  const Index d = target.dim();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "witness_search needs d >= 2");
  if (!is_hermitian(target.choi(), 1e-9))
    throw Error(ErrorKind::NotHermitian, "witness_search target must be Hermitian-preserving");

  const ChoiCoordinates& cc = choi_coordinates(d);
  const Index n = cc.size();
  const double inv = 1.0 / static_cast<double>(d * d);
  const double radius = std::sqrt(1.0 - inv);
  const RVec phi = cc.coords(hermitian_part(target.choi()));
  const double c0 = target.choi().trace().real() * inv;

  Cuts cuts;
  std::vector<CMat> pool;
  auto add_unitary = [&](const CMat& u) {
    for (const CMat& v : pool)
      if (same_channel(u, v)) return false;
    pool.push_back(u);
    cuts.add(cc.unitary_coords(u), -inv);
    return true;
  };

  const std::vector<CMat> basis = traceless_hermitian_basis(d);
  if (cfg.dual_cone) {
    cuts.add_equality(cc.coords(identity_channel(d).choi()), -inv);
    pool.push_back(CMat::Identity(d, d));
    // <Gamma, Ad_U> has a minimum at U = I, so its derivative along every
    // Hamiltonian direction vanishes there.
    for (const CMat& h : basis) {
      const CMat hh = h;
      const Channel der = Channel::from_function(d, [hh](const CMat& x) -> CMat {
        const cplx i(0, 1);
        return i * (hh * x - x * hh);
      });
      cuts.add_equality(cc.coords(hermitian_part(der.choi())), 0.0);
    }
  } else {
    add_unitary(CMat::Identity(d, d));
  }
  if (projection != nullptr && !cfg.dual_cone) {
    Witness w = witness_from_projection(target, *projection, cfg);
    if (separates(w, kDeltaWit, cfg.tau_wit)) return w;
    for (const CMat& u : projection->unitaries) add_unitary(u);
  }
  for (const CMat& w : weyl_unitaries(d)) add_unitary(w);
  for (int i = 0; i < cfg.initial_random; ++i)
    add_unitary(random_unitary(d, derive_seed(cfg.lmo.seed ^ 0x5eedULL, static_cast<std::uint64_t>(i))));

  LmoConfig lc = cfg.lmo;
  RVec y = RVec::Zero(n);
  double mu_hint = 0.0;
  double last_min = 0.0;
  Witness out;
  for (int round = 0; round < cfg.max_rounds; ++round) {
    out.rounds = round + 1;
    y = solve_ball_lp(cuts.matrix(n), cuts.vector(), phi, radius, mu_hint);
    const CMat m = CMat::Identity(d * d, d * d) * inv + cc.from_coords(y);

    lc.seed = derive_seed(cfg.lmo.seed, static_cast<std::uint64_t>(round));
    LmoResult lr = lmo_unitary(m, Direction::Min, lc);
    last_min = lr.objective;
    std::sort(lr.candidates.begin(), lr.candidates.end(),
              [](const LmoCandidate& a, const LmoCandidate& b) {
                return a.objective < b.objective || (a.objective == b.objective && a.start_index < b.start_index);
              });
    bool violated = false;
    int added = 0;
    for (const auto& c : lr.candidates) {
      if (c.objective >= -cfg.tau_wit || added >= cfg.cuts_per_round) break;
      if (add_unitary(c.unitary)) ++added;
      violated = true;
    }
    if (cfg.dual_cone) {
      const RMat q = jump_quadratic_form(m);
      Eigen::SelfAdjointEigenSolver<RMat> es(q);
      if (es.eigenvalues()(0) < -cfg.tau_wit) {
        CMat a = CMat::Zero(d, d);
        for (Index k = 0; k < es.eigenvectors().rows(); ++k)
          a += es.eigenvectors()(k, 0) * basis[static_cast<std::size_t>(k)];
        cuts.add(cc.coords(hermitian_part(hermitian_jump_map(a).choi())), 0.0);
        violated = true;
      }
    }
    if (!violated) break;
  }

  CMat m = CMat::Identity(d * d, d * d) * inv + cc.from_coords(y);
  LmoConfig vc = cfg.lmo;
  vc.starts = cfg.verify_starts;
  vc.seed = derive_seed(cfg.lmo.seed, 0xC0FFEEULL);
  double min_value = std::min(last_min, lmo_unitary(m, Direction::Min, vc, pool).objective);
  if (!cfg.dual_cone && cfg.repair && min_value < 0) {
    // Mixing with the depolarizing map lifts every <Gamma, Ad_U> by s/d^2.
    const double s = -min_value / (inv - min_value);
    y *= (1.0 - s);
    m = CMat::Identity(d * d, d * d) * inv + cc.from_coords(y);
    min_value = lmo_unitary(m, Direction::Min, vc, pool).objective;
  }

  out.gamma = Channel::from_choi(m);
  out.value_on_target = c0 + phi.dot(y);
  out.min_unitary_value = min_value;
  out.id_value = witness_value(out.gamma, identity_channel(d));
  out.grade = CertificateGrade::Heuristic;
  return out;
}

}  // namespace muchan
