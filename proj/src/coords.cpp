#include "muchan/coords.hpp"

#include <map>
#include <memory>
#include <mutex>

#include "muchan/channels.hpp"

namespace muchan {

ChoiCoordinates::ChoiCoordinates(Index d) : d_(d) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "ChoiCoordinates needs d >= 2");
  const std::vector<CMat> g = traceless_hermitian_basis(d);
  const auto m = static_cast<Index>(g.size());
  basis_.resize(d * d * d * d, m * m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) basis_.col(a * m + b) = vec(kron(g[a], g[b]));
}

RVec ChoiCoordinates::coords(const CMat& choi) const {
  if (choi.rows() != d_ * d_ || choi.cols() != d_ * d_)
    throw Error(ErrorKind::ShapeMismatch, "coords: expected a d^2 x d^2 matrix");
  return (basis_.adjoint() * vec(choi)).real();
}

RVec ChoiCoordinates::unitary_coords(const CMat& u) const {
  const CVec w = bell_vector(u);
  const CMat j = w * w.adjoint() / static_cast<double>(d_);
  return coords(j);
}

CMat ChoiCoordinates::from_coords(const RVec& y) const {
  if (y.size() != size()) throw Error(ErrorKind::ShapeMismatch, "from_coords: length");
  const CVec v = basis_ * y.cast<cplx>();
  return unvec(v, d_ * d_);
}

const ChoiCoordinates& choi_coordinates(Index d) {
  static std::mutex mu;
  static std::map<Index, std::unique_ptr<ChoiCoordinates>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[d];
  if (!slot) slot = std::make_unique<ChoiCoordinates>(d);
  return *slot;
}

}  // namespace muchan
