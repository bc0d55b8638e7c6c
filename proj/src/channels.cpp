#include "muchan/channels.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace muchan {

namespace {

Index sqrt_dim(Index n, const char* what) {
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n || d < 1) throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": size is not d^2");
  return d;
}

void canonicalize_phase(CMat& v) {
  const double cut = 1e-10 * std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  for (Index i = 0; i < v.rows(); ++i)
    for (Index j = 0; j < v.cols(); ++j)
      if (std::abs(v(i, j)) > cut) {
        v *= std::conj(v(i, j)) / std::abs(v(i, j));
        return;
      }
}

}  // namespace

struct Channel::State {
  Index d = 0;
  Repr primary = Repr::Superop;
  std::optional<std::vector<CMat>> kraus;
  mutable std::once_flag choi_once;
  mutable std::once_flag superop_once;
  mutable CMat choi;
  mutable CMat superop;
};

Channel::Channel() : state_(std::make_shared<State>()) {
  state_->choi = CMat(0, 0);
  state_->superop = CMat(0, 0);
}

Channel::Channel(std::shared_ptr<State> s) : state_(std::move(s)) {}

Channel Channel::from_kraus(std::vector<CMat> kraus) {
  if (kraus.empty()) throw Error(ErrorKind::InvalidArgument, "empty Kraus list");
  const Index d = kraus.front().rows();
  for (const auto& k : kraus) {
    if (k.rows() != d || k.cols() != d) throw Error(ErrorKind::ShapeMismatch, "Kraus operators must be d x d");
    require_finite(k, "Kraus operator");
  }
  auto s = std::make_shared<State>();
  s->d = d;
  s->primary = Repr::Kraus;
  s->kraus = std::move(kraus);
  return Channel(std::move(s));
}

Channel Channel::from_choi(CMat choi) {
  require_square(choi, "Choi matrix");
  require_finite(choi, "Choi matrix");
  auto s = std::make_shared<State>();
  s->d = sqrt_dim(choi.rows(), "Choi matrix");
  s->primary = Repr::Choi;
  s->choi = std::move(choi);
  return Channel(std::move(s));
}

Channel Channel::from_superop(CMat superop) {
  require_square(superop, "superoperator");
  require_finite(superop, "superoperator");
  auto s = std::make_shared<State>();
  s->d = sqrt_dim(superop.rows(), "superoperator");
  s->primary = Repr::Superop;
  s->superop = std::move(superop);
  return Channel(std::move(s));
}

Channel Channel::from_function(Index d, const std::function<CMat(const CMat&)>& f) {
  CMat s(d * d, d * d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) {
      const CMat y = f(matrix_unit(d, i, j));
      if (y.rows() != d || y.cols() != d) throw Error(ErrorKind::ShapeMismatch, "from_function output");
      s.col(i + d * j) = vec(y);
    }
  return from_superop(std::move(s));
}

Index Channel::dim() const { return state_->d; }
Repr Channel::primary() const { return state_->primary; }

const CMat& Channel::choi() const {
  const State& s = *state_;
  std::call_once(s.choi_once, [&s] {
    if (s.primary == Repr::Choi) return;
    if (s.primary == Repr::Kraus)
      s.choi = kraus_to_choi(*s.kraus);
    else
      s.choi = superop_to_choi(s.superop);
  });
  return s.choi;
}

const CMat& Channel::superop() const {
  const State& s = *state_;
  std::call_once(s.superop_once, [&s] {
    if (s.primary == Repr::Superop) return;
    if (s.primary == Repr::Kraus)
      s.superop = kraus_to_superop(*s.kraus);
    else
      s.superop = choi_to_superop(s.choi);
  });
  return s.superop;
}

const std::vector<CMat>* Channel::stored_kraus() const {
  return state_->kraus ? &*state_->kraus : nullptr;
}

CMat Channel::apply(const CMat& x) const {
  const Index d = dim();
  if (x.rows() != d || x.cols() != d) throw Error(ErrorKind::ShapeMismatch, "apply: input must be d x d");
  if (state_->kraus) {
    CMat out = CMat::Zero(d, d);
    for (const auto& v : *state_->kraus) out.noalias() += v.adjoint() * x * v;
    return out;
  }
  return unvec(superop() * vec(x), d);
}

CMat superop_to_choi(const CMat& s) {
  const Index d = sqrt_dim(s.rows(), "superoperator");
  CMat j(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index k = 0; k < d; ++k)
      for (Index jj = 0; jj < d; ++jj)
        for (Index l = 0; l < d; ++l) j(i * d + k, jj * d + l) = s(k + d * l, i + d * jj);
  return j / static_cast<double>(d);
}

CMat choi_to_superop(const CMat& j) {
  const Index d = sqrt_dim(j.rows(), "Choi matrix");
  CMat s(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index k = 0; k < d; ++k)
      for (Index jj = 0; jj < d; ++jj)
        for (Index l = 0; l < d; ++l) s(k + d * l, i + d * jj) = j(i * d + k, jj * d + l);
  return s * static_cast<double>(d);
}

CMat kraus_to_superop(const std::vector<CMat>& kraus) {
  const Index d = kraus.front().rows();
  CMat s = CMat::Zero(d * d, d * d);
  for (const auto& v : kraus) s += kron(v.transpose(), v.adjoint());
  return s;
}

CVec bell_vector(const CMat& u) {
  const Index d = u.rows();
  CVec w(d * d);
  for (Index i = 0; i < d; ++i)
    for (Index k = 0; k < d; ++k) w(i * d + k) = std::conj(u(i, k));
  return w;
}

CMat kraus_to_choi(const std::vector<CMat>& kraus) {
  const Index d = kraus.front().rows();
  CMat j = CMat::Zero(d * d, d * d);
  for (const auto& v : kraus) {
    const CVec w = bell_vector(v);
    j.noalias() += w * w.adjoint();
  }
  return j / static_cast<double>(d);
}

CMat choi_of(const Channel& ch) { return ch.choi(); }

std::vector<CMat> kraus_of(const Channel& ch) {
  const CMat& j = ch.choi();
  if (!is_hermitian(j)) throw Error(ErrorKind::NotCompletelyPositive, "Choi matrix is not Hermitian");
  const SpectralData sd = eig_herm(j);
  const std::vector<double> vals = sd.real_values();
  if (!vals.empty() && vals.front() < -kPsdTol)
    throw Error(ErrorKind::NotCompletelyPositive, "Choi matrix has a negative eigenvalue");
  const Index d = ch.dim();
  const double top = vals.empty() ? 0.0 : std::max(vals.back(), 0.0);
  std::vector<CMat> out;
  for (Index idx = static_cast<Index>(vals.size()) - 1; idx >= 0; --idx) {
    const double lam = vals[idx];
    if (lam <= kRankTol * top || lam <= 0) break;
    const CVec v = sd.eigenvectors.col(idx);
    CMat k(d, d);
    const double scale = std::sqrt(static_cast<double>(d) * lam);
    for (Index i = 0; i < d; ++i)
      for (Index kk = 0; kk < d; ++kk) k(i, kk) = scale * std::conj(v(i * d + kk));
    canonicalize_phase(k);
    out.push_back(std::move(k));
  }
  return out;
}

CMat trace_first(const CMat& j) {
  const Index d = sqrt_dim(j.rows(), "Choi matrix");
  CMat out = CMat::Zero(d, d);
  for (Index i = 0; i < d; ++i) out += j.block(i * d, i * d, d, d);
  return out;
}

CMat trace_second(const CMat& j) {
  const Index d = sqrt_dim(j.rows(), "Choi matrix");
  CMat out(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index jj = 0; jj < d; ++jj) out(i, jj) = j.block(i * d, jj * d, d, d).trace();
  return out;
}

VerifyReport verify(const Channel& ch) {
  VerifyReport r;
  const CMat& j = ch.choi();
  const Index d = ch.dim();
  r.is_hermitian_preserving = is_hermitian(j);
  const SpectralData sd = eig_herm(hermitian_part(j));
  const std::vector<double> vals = sd.real_values();
  r.min_choi_eigenvalue = vals.empty() ? 0.0 : vals.front();
  r.is_cp = r.is_hermitian_preserving && r.min_choi_eigenvalue >= -kPsdTol;
  const double top = vals.empty() ? 0.0 : std::max(vals.back(), 0.0);
  for (double v : vals)
    if (v > kRankTol * top && v > 0) ++r.choi_rank;
  const CMat target = CMat::Identity(d, d) / static_cast<double>(d);
  r.tp_residual = (trace_second(j) - target).norm();
  r.unital_residual = (trace_first(j) - target).norm();
  r.is_tp = r.tp_residual <= kFlagTol;
  r.is_unital = r.unital_residual <= kFlagTol;
  return r;
}

CMat apply(const Channel& ch, const CMat& x) { return ch.apply(x); }

Channel compose(const Channel& a, const Channel& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::ShapeMismatch, "compose: dimension mismatch");
  return Channel::from_superop(a.superop() * b.superop());
}

Channel dual_of(const Channel& ch) {
  if (const auto* k = ch.stored_kraus()) {
    std::vector<CMat> dual;
    dual.reserve(k->size());
    for (const auto& v : *k) dual.push_back(v.adjoint());
    return Channel::from_kraus(std::move(dual));
  }
  return Channel::from_superop(ch.superop().adjoint());
}

Channel power(const Channel& ch, unsigned n) {
  const Index d2 = ch.dim() * ch.dim();
  CMat result = CMat::Identity(d2, d2);
  CMat base = ch.superop();
  while (n > 0) {
    if (n & 1U) result = result * base;
    n >>= 1U;
    if (n > 0) base = base * base;
  }
  return Channel::from_superop(std::move(result));
}

Channel operator+(const Channel& a, const Channel& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::ShapeMismatch, "map sum: dimension mismatch");
  return Channel::from_superop(a.superop() + b.superop());
}

Channel operator-(const Channel& a, const Channel& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::ShapeMismatch, "map difference: dimension mismatch");
  return Channel::from_superop(a.superop() - b.superop());
}

Channel operator*(double s, const Channel& a) { return Channel::from_superop(s * a.superop()); }

cplx map_inner(const Channel& a, const Channel& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::ShapeMismatch, "map_inner: dimension mismatch");
  return hs_inner(a.choi(), b.choi());
}

double choi_distance(const Channel& a, const Channel& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::ShapeMismatch, "choi_distance: dimension mismatch");
  return (a.choi() - b.choi()).norm();
}

double superop_norm(const Channel& a) {
  const std::vector<double> s = svd_values(a.superop());
  return s.empty() ? 0.0 : s.front();
}

Channel identity_channel(Index d) { return Channel::from_kraus({CMat::Identity(d, d)}); }

Channel depolarizing(Index d) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "depolarizing: d >= 1");
  const CVec vi = vec(CMat::Identity(d, d));
  return Channel::from_superop(vi * vi.transpose() / static_cast<double>(d));
}

Channel holevo_werner() {
  return Channel::from_function(3, [](const CMat& x) -> CMat {
    return 0.5 * (x.trace() * CMat::Identity(3, 3) - x.transpose());
  });
}

Channel ad_unitary(const CMat& u) {
  require_square(u, "ad_unitary");
  if (!is_unitary(u)) throw Error(ErrorKind::NotUnitary, "ad_unitary input");
  return Channel::from_kraus({u});
}

Channel transpose_map(Index d) {
  return Channel::from_function(d, [](const CMat& x) -> CMat { return x.transpose(); });
}

Channel mixed_unitary_channel(const std::vector<double>& weights, const std::vector<CMat>& unitaries) {
  if (weights.size() != unitaries.size() || unitaries.empty())
    throw Error(ErrorKind::InvalidArgument, "mixed_unitary_channel: weights/unitaries mismatch");
  std::vector<CMat> kraus;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) throw Error(ErrorKind::InvalidArgument, "negative weight");
    if (weights[i] > 0) kraus.push_back(std::sqrt(weights[i]) * unitaries[i]);
  }
  if (kraus.empty()) throw Error(ErrorKind::InvalidArgument, "all weights zero");
  return Channel::from_kraus(std::move(kraus));
}

std::vector<CMat> traceless_hermitian_basis(Index d) {
  std::vector<CMat> out;
  out.reserve(static_cast<std::size_t>(d * d - 1));
  const double r2 = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < d; ++j)
    for (Index k = j + 1; k < d; ++k) {
      CMat g = CMat::Zero(d, d);
      g(j, k) = g(k, j) = r2;
      out.push_back(std::move(g));
    }
  for (Index j = 0; j < d; ++j)
    for (Index k = j + 1; k < d; ++k) {
      CMat g = CMat::Zero(d, d);
      g(j, k) = cplx(0, -r2);
      g(k, j) = cplx(0, r2);
      out.push_back(std::move(g));
    }
  for (Index l = 1; l < d; ++l) {
    CMat g = CMat::Zero(d, d);
    const double c = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Index j = 0; j < l; ++j) g(j, j) = c;
    g(l, l) = -c * static_cast<double>(l);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace muchan
