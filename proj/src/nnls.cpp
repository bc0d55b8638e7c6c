#include "muchan/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace muchan {

namespace {

RVec solve_on(const RMat& a, const RVec& b, const std::vector<Index>& cols) {
  RMat sub(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Index>(k)) = a.col(cols[k]);
  return sub.colPivHouseholderQr().solve(b);
}

std::vector<Index> passive_list(const std::vector<char>& passive) {
  std::vector<Index> out;
  for (std::size_t j = 0; j < passive.size(); ++j)
    if (passive[j]) out.push_back(static_cast<Index>(j));
  return out;
}

}  // namespace

NnlsResult nnls(const RMat& a, const RVec& b, const std::vector<Index>& warm_passive) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (b.size() != m) throw Error(ErrorKind::ShapeMismatch, "nnls: rhs length");
  NnlsResult res;
  res.x = RVec::Zero(n);
  if (n == 0) {
    res.residual = b.norm();
    res.converged = true;
    return res;
  }

  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = 10.0 * eps * std::max<double>(m, n) *
                     std::max(a.cwiseAbs().colwise().sum().maxCoeff(), 1e-300);
  std::vector<char> passive(n, 0);
  RVec& x = res.x;

  // Warm start: keep the warm columns whose least-squares solution stays positive.
  std::vector<Index> warm;
  for (Index j : warm_passive)
    if (j >= 0 && j < n && !passive[j]) {
      passive[j] = 1;
      warm.push_back(j);
    }
  while (!warm.empty()) {
    const RVec s = solve_on(a, b, warm);
    std::vector<Index> keep;
    for (std::size_t k = 0; k < warm.size(); ++k)
      if (s(static_cast<Index>(k)) > 0) keep.push_back(warm[k]);
    if (keep.size() == warm.size()) {
      for (std::size_t k = 0; k < warm.size(); ++k) x(warm[k]) = s(static_cast<Index>(k));
      break;
    }
    for (Index j : warm) passive[j] = 0;
    for (Index j : keep) passive[j] = 1;
    warm = std::move(keep);
  }

  std::vector<char> blocked(n, 0);
  const int max_outer = static_cast<int>(3 * n + 30);
  RVec w = a.transpose() * (b - a * x);
  for (res.iterations = 0; res.iterations < max_outer; ++res.iterations) {
    Index j = -1;
    double best = tol;
    for (Index k = 0; k < n; ++k)
      if (!passive[k] && !blocked[k] && w(k) > best) {
        best = w(k);
        j = k;
      }
    if (j < 0) {
      res.converged = true;
      break;
    }
    passive[j] = 1;

    bool first = true;
    for (int inner = 0; inner < 3 * n + 30; ++inner) {
      const std::vector<Index> cols = passive_list(passive);
      const RVec s_sub = solve_on(a, b, cols);
      RVec s = RVec::Zero(n);
      for (std::size_t k = 0; k < cols.size(); ++k) s(cols[k]) = s_sub(static_cast<Index>(k));

      bool all_positive = true;
      for (Index k : cols) all_positive = all_positive && s(k) > 0;
      if (all_positive) {
        x = s;
        std::fill(blocked.begin(), blocked.end(), 0);
        break;
      }
      if (first && s(j) <= 0) {
        // Roundoff made the entering column useless; skip it this round.
        passive[j] = 0;
        blocked[j] = 1;
        break;
      }
      first = false;
      double alpha = 1.0;
      for (Index k : cols)
        if (s(k) <= 0) alpha = std::min(alpha, x(k) / (x(k) - s(k)));
      x += alpha * (s - x);
      for (Index k : cols)
        if (x(k) <= tol) {
          x(k) = 0.0;
          passive[k] = 0;
        }
    }
    w = a.transpose() * (b - a * x);
  }
  x = x.cwiseMax(0.0);
  res.residual = (a * x - b).norm();
  return res;
}

NnlsResult simplex_least_squares(const RMat& p, const std::vector<Index>& warm_passive) {
  const Index n = p.rows();
  const Index k = p.cols();
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "simplex_least_squares: no atoms");
  RMat e(n + 1, k);
  e.topRows(n) = p;
  e.row(n).setOnes();
  RVec f = RVec::Zero(n + 1);
  f(n) = 1.0;
  NnlsResult r = nnls(e, f, warm_passive);
  const double total = r.x.sum();
  if (total <= 0) throw Error(ErrorKind::InvalidArgument, "simplex_least_squares: degenerate");
  r.x /= total;
  r.residual = (p * r.x).norm();
  return r;
}

LdpResult least_distance(const RMat& g, const RVec& h) {
  const Index m = g.rows();
  const Index n = g.cols();
  if (h.size() != m) throw Error(ErrorKind::ShapeMismatch, "least_distance: rhs length");
  LdpResult out;
  if (m == 0) {
    out.x = RVec::Zero(n);
    out.feasible = true;
    return out;
  }
  RMat e(n + 1, m);
  e.topRows(n) = g.transpose();
  e.row(n) = h.transpose();
  RVec f = RVec::Zero(n + 1);
  f(n) = 1.0;
  const NnlsResult r = nnls(e, f);
  const RVec resid = e * r.x - f;
  if (resid.norm() <= 1e-12 || std::abs(resid(n)) <= 1e-14) {
    out.x = RVec::Zero(n);
    out.feasible = false;
    return out;
  }
  out.x = -resid.head(n) / resid(n);
  out.feasible = true;
  return out;
}

}  // namespace muchan
