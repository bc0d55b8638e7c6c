#include <algorithm>
#include <cmath>

#include "muchan/mucone.hpp"
#include "muchan/parallel.hpp"

namespace muchan {

namespace {

// f(U) = (1/d) u^H N u with u the row-major vectorization of U and N = conj(M).
// Templated on the size so that d <= 5 runs allocation-free.
template <int D, int D2>
struct Descent {
  using Mat = Eigen::Matrix<cplx, D, D>;
  using Vec = Eigen::Matrix<cplx, D2, 1>;
  using Big = Eigen::Matrix<cplx, D2, D2>;

  Big n;
  double inv_d;
  Index d;

  double value(const Mat& u) const {
    const Mat ut = u.transpose();
    const Eigen::Map<const Vec> v(ut.data(), ut.size());
    return (v.dot(n * v)).real() * inv_d;
  }

  // value(a) - value(b) without the cancellation of subtracting two values.
  double value_drop(const Mat& a, const Mat& b) const {
    const Mat at = a.transpose(), bt = b.transpose();
    const Eigen::Map<const Vec> va(at.data(), at.size()), vb(bt.data(), bt.size());
    return ((va - vb).dot(n * (va + vb))).real() * inv_d;
  }

  // Euclidean gradient for the real inner product Re tr(A* B).
  Mat gradient(const Mat& u) const {
    const Mat ut = u.transpose();
    const Eigen::Map<const Vec> v(ut.data(), ut.size());
    const Vec g = (2.0 * inv_d) * (n * v);
    return Eigen::Map<const Mat>(g.data(), d, d).transpose();
  }

  // Newton-Schulz for near-unitary points, the general polar factor otherwise.
  static bool retract(const Mat& m, Mat& out) {
    const Mat id = Mat::Identity(m.rows(), m.cols());
    Mat gram = m.adjoint() * m;
    if ((gram - id).norm() >= 0.5) {
      try {
        out = polar_retract(CMat(m));
      } catch (const Error&) {
        return false;
      }
      return true;
    }
    out = m;
    for (int k = 0; k < 12; ++k) {
      const Mat e = gram - id;
      if (e.norm() <= 1e-15 * static_cast<double>(m.rows())) break;
      out -= 0.5 * out * e;
      gram = out.adjoint() * out;
    }
    return true;
  }

  LmoCandidate run(const CMat& start, double sign, const LmoConfig& cfg, int index, double scale) const {
    Mat u = start;
    double f = sign * value(u);
    double step = 1.0 / std::max(scale, 1e-12);
    const double tol = cfg.grad_tol * std::max(1.0, scale);
    // Degenerate minima converge sublinearly; stop once ten steps gain nothing
    // in value and barely shrink the gradient. Near a nondegenerate optimum the
    // value stalls at rounding level long before the point does, so the
    // gradient test keeps those runs going down to grad_tol.
    double f_window = f, gn_window = 0.0;
    Mat trial;
    const auto rgrad = [&](const Mat& x) {
      const Mat g = sign * gradient(x);
      const Mat xhg = x.adjoint() * g;
      return Mat(g - x * (0.5 * (xhg + xhg.adjoint())));
    };
    for (int it = 0; it < cfg.max_steps; ++it) {
      const Mat rg = rgrad(u);
      const double gn2 = rg.squaredNorm();
      if (std::sqrt(gn2) <= tol) break;
      if (it % 10 == 0) {
        if (it > 0 && f_window - f <= 1e-14 * scale && std::sqrt(gn2) > 0.1 * gn_window) break;
        f_window = f;
        gn_window = std::sqrt(gn2);
      }
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        if (!retract(u - step * rg, trial)) {
          step *= 0.5;
          continue;
        }
        // A weak Armijo constant accepts steps near twice the optimum, which flip
        // the iterate across the maximum and leave only O(1/k) progress.
        const double drop = sign * value_drop(u, trial);
        if (drop >= 0.25 * step * gn2) {
          u = trial;
          f -= drop;
          accepted = true;
          break;
        }
        // Close to the optimum the true drop (~gn^2) is below the rounding left
        // by the retraction, so judge the step by the gradient instead.
        if (std::sqrt(gn2) < 1e-6 * scale && rgrad(trial).squaredNorm() < 0.25 * gn2) {
          u = trial;
          f -= drop;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      step *= 2.0;
    }
    return {CMat(u), value(u), index};
  }
};

template <int D, int D2>
std::vector<LmoCandidate> run_starts(const CMat& n, Index d, double sign, double scale, const LmoConfig& cfg,
                                     const std::vector<CMat>& hints) {
  const Descent<D, D2> desc{n, 1.0 / static_cast<double>(d), d};
  const int total = static_cast<int>(hints.size()) + std::max(cfg.starts, 0);
  std::vector<LmoCandidate> results(static_cast<std::size_t>(total));
  parallel_for(total, cfg.threads, [&](int i) {
    const CMat u0 = i < static_cast<int>(hints.size())
                        ? polar_retract(hints[static_cast<std::size_t>(i)])
                        : random_unitary(d, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    results[static_cast<std::size_t>(i)] = desc.run(u0, sign, cfg, i, scale);
  });
  return results;
}

}  // namespace

double unitary_overlap(const CMat& m, const CMat& u) {
  const CVec w = bell_vector(u);
  return (w.dot(m * w)).real() / static_cast<double>(u.rows());
}

LmoResult lmo_unitary(const CMat& m, Direction dir, const LmoConfig& cfg, const std::vector<CMat>& hints) {
  require_square(m, "lmo_unitary");
  if (!is_hermitian(m, 1e-8)) throw Error(ErrorKind::NotHermitian, "lmo_unitary expects a Hermitian matrix");
  const Index d2 = m.rows();
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(d2))));
  if (d * d != d2) throw Error(ErrorKind::ShapeMismatch, "lmo_unitary: size is not d^2");

  const CMat n = hermitian_part(m).conjugate();
  const double scale = std::max(2.0 * n.norm() / static_cast<double>(d), 1e-12);
  const double sign = dir == Direction::Min ? 1.0 : -1.0;
  if (static_cast<int>(hints.size()) + std::max(cfg.starts, 0) == 0)
    throw Error(ErrorKind::InvalidArgument, "lmo_unitary: no starts");
  for (const CMat& h : hints)
    if (h.rows() != d || h.cols() != d) throw Error(ErrorKind::ShapeMismatch, "lmo_unitary: hint has the wrong size");

  std::vector<LmoCandidate> results;
  switch (d) {
    case 1: results = run_starts<1, 1>(n, d, sign, scale, cfg, hints); break;
    case 2: results = run_starts<2, 4>(n, d, sign, scale, cfg, hints); break;
    case 3: results = run_starts<3, 9>(n, d, sign, scale, cfg, hints); break;
    case 4: results = run_starts<4, 16>(n, d, sign, scale, cfg, hints); break;
    case 5: results = run_starts<5, 25>(n, d, sign, scale, cfg, hints); break;
    default: results = run_starts<Eigen::Dynamic, Eigen::Dynamic>(n, d, sign, scale, cfg, hints); break;
  }

  LmoResult out;
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (sign * results[i].objective < sign * results[best].objective) best = i;
  out.unitary = results[best].unitary;
  out.objective = results[best].objective;
  out.start_index = results[best].start_index;
  out.candidates = std::move(results);
  return out;
}

}  // namespace muchan
