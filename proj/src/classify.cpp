#include "muchan/classify.hpp"

#include "muchan/weyl.hpp"

namespace muchan {

const char* to_string(MUVerdict v) {
  switch (v) {
    case MUVerdict::MixedUnitary: return "MixedUnitary";
    case MUVerdict::NotMixedUnitaryAnalytic: return "NotMixedUnitary-Analytic";
    case MUVerdict::NotMixedUnitaryHeuristic: return "NotMixedUnitary-Heuristic";
    case MUVerdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

bool is_not_mu(MUVerdict v) {
  return v == MUVerdict::NotMixedUnitaryAnalytic || v == MUVerdict::NotMixedUnitaryHeuristic;
}

Classification classify_channel(const Channel& ch, const ClassifyConfig& cfg) {
  if (!verify(ch).is_unital_channel())
    throw Error(ErrorKind::InvalidChannel, "classify_channel needs a unital quantum channel");
  const Index d = ch.dim();
  Classification out;

  for (const Witness& w : cfg.candidate_witnesses) {
    if (w.gamma.dim() != d) throw Error(ErrorKind::ShapeMismatch, "candidate witness has the wrong dimension");
    Witness ww = with_target(w, ch);
    if (ww.grade == CertificateGrade::Analytic && ww.value_on_target <= -cfg.delta_wit) {
      out.verdict = MUVerdict::NotMixedUnitaryAnalytic;
      out.route = "analytic-witness";
      out.witness = std::move(ww);
      return out;
    }
  }

  if (d == 1) {
    MUDecomposition trivial;
    trivial.weights = {1.0};
    trivial.unitaries = {CMat::Identity(1, 1)};
    trivial.residual = decomposition_residual(ch, trivial.weights, trivial.unitaries);
    trivial.verdict = DecompositionVerdict::MixedUnitary;
    trivial.stop_reason = "exact";
    out.verdict = MUVerdict::MixedUnitary;
    out.route = "exact";
    out.residual = trivial.residual;
    out.decomposition = std::move(trivial);
    return out;
  }

  if (cfg.use_weyl_route) {
    WeylDecomposition wd = mixed_weyl_decompose(ch, WeylSystem(d));
    if (wd.decomposition.verdict == DecompositionVerdict::MixedUnitary) {
      out.verdict = MUVerdict::MixedUnitary;
      out.route = "weyl";
      out.residual = wd.decomposition.residual;
      out.decomposition = std::move(wd.decomposition);
      return out;
    }
  }

  MUDecomposition dec = fw_decompose(ch, cfg.fw);
  out.residual = dec.residual;
  const bool found = dec.verdict == DecompositionVerdict::MixedUnitary;
  out.decomposition = std::move(dec);
  if (found) {
    out.verdict = MUVerdict::MixedUnitary;
    out.route = "frank-wolfe";
    return out;
  }

  if (cfg.run_witness_search) {
    Witness w = witness_search(ch, cfg.witness, &*out.decomposition);
    const bool sep = separates(w, cfg.delta_wit, cfg.witness.tau_wit);
    out.witness = std::move(w);
    if (sep) {
      out.verdict = MUVerdict::NotMixedUnitaryHeuristic;
      out.route = "witness-search";
      return out;
    }
  }
  out.verdict = MUVerdict::Undetermined;
  out.route = "none";
  return out;
}

}  // namespace muchan
