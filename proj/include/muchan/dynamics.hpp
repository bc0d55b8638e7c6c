#pragma once

// GKLS generators, their semigroups and mixed-unitary scans over time.

#include <optional>
#include <string>
#include <vector>

#include "muchan/channels.hpp"
#include "muchan/classify.hpp"
#include "muchan/mucone.hpp"
#include "muchan/structure.hpp"

namespace muchan {

// L(X) = i[H, X] - (1/2) sum_j (L_j* L_j X + X L_j* L_j - 2 L_j* X L_j).
struct GKLSData {
  Index dim = 0;
  CMat h;
  std::vector<CMat> jumps;
  CMat compiled;

  // Requires Hermitian H and sum L L* = sum L* L (trace preservation).
  static GKLSData build(CMat h, std::vector<CMat> jumps);
  // Same formula with no balance requirement; the result is always unital.
  static GKLSData build_unchecked(CMat h, std::vector<CMat> jumps);

  Channel generator() const { return Channel::from_superop(compiled); }
  double balance_residual() const;
};

// Compiles after re-checking the invariants and L(I) = 0, tr(L(X)) = 0.
CMat gkls_superop(const GKLSData& g);

struct GeneratorReport {
  bool hermitian_preserving = false;
  bool unital = false;
  bool trace_annihilating = false;
  bool conditionally_cp = false;
  double unital_residual = 0.0;
  double trace_residual = 0.0;
  // Smallest eigenvalue of J(L) compressed off the maximally entangled vector.
  double min_compressed_eigenvalue = 0.0;

  bool valid() const { return hermitian_preserving && unital && trace_annihilating && conditionally_cp; }
};

GeneratorReport validate_generator(const Channel& l);

// expm(t L); throws InvalidArgument for t < 0.
Channel evolve(const Channel& l, double t);

// P = span of eigenvectors with |Re lambda| <= tol.
PeripheralSplit generator_peripheral_split(const Channel& l);

enum class AllTimesVerdict { AllTimesMU, NotAllTimesMUAnalytic, NotAllTimesMUHeuristic, Undetermined };
const char* to_string(AllTimesVerdict v);

struct AllTimesConfig {
  int max_iters = 400;
  double eps = kEpsMU;
  LmoConfig lmo;
  // Used with dual_cone forced on.
  WitnessConfig witness;
  bool run_dual = true;
  std::vector<Witness> candidate_witnesses;
  double delta_wit = kDeltaWit;
};

struct AllTimesResult {
  AllTimesVerdict verdict = AllTimesVerdict::Undetermined;
  std::string route;
  double primal_residual = std::numeric_limits<double>::infinity();
  int atoms = 0;
  int iterations = 0;
  std::optional<Witness> witness;
};

// Primal: nonnegative fit of J(L) by Hamiltonian directions, Ad_U - id and
// Hermitian-jump generators, all of which lie in the closed cone spanned by
// {Ad_U - id}. Dual: witness search restricted to the generator dual cone.
AllTimesResult mu_all_times(const Channel& l, const AllTimesConfig& cfg = {});

// H = 0, jumps = {A}, built without the balance check.
GKLSData kummerer_maassen_generator(const CMat& a);

// L(X) = B (tr(X) I - X^T) B* / 2 - X on M_3; B unitary with tr(B* B^T) = -1.
Channel example59_generator(const CMat& b);
// Returns B when l has that form.
std::optional<CMat> recognize_example59(const Channel& l);

struct SeriesCoefficients {
  double a = 0, b = 0, c = 0, d = 0;
};
// e^{tL1} = a id + b A + c A^2 + d A^3 with A = Ad_{B*} T, i.e. A(X) = B X^T B*,
// A^4 = id and L1 = -A / 2; summed from the power series.
SeriesCoefficients example59_series(double t);
// The same coefficients in closed form (s = t/2):
// a = (cosh s + cos s)/2, b = -(sinh s + sin s)/2, c = (cosh s - cos s)/2, d = -(sinh s - sin s)/2.
SeriesCoefficients example59_closed_coefficients(double t);

// e^t - e^{-t/2} - 3 sinh(t/2) - 2 sin(t/2).
double example59_root_function(double t);
// <Gamma, e^{tL}> = e^{-t} root_function(t) / 9.
double closed_form_g(double t);
// Positive root of example59_root_function on (0.1, 3).
double find_root_t0();

struct ScanReport {
  std::vector<double> grid;
  std::vector<double> witness_values;  // NaN where no witness was evaluated
  std::vector<MUVerdict> mu_verdicts;
  std::vector<double> residuals;
  std::vector<std::string> routes;
  std::vector<double> sign_changes;  // interpolated zero crossings of witness_values
  std::optional<double> t0_estimate;
  std::optional<double> t1_estimate;
};

ScanReport witness_curve(const Channel& l, const Witness& gamma, const std::vector<double>& grid);

// Classifies e^{tL} at every grid time. For generators of the form handled by
// recognize_example59 the matching transpose witness is added as a candidate.
ScanReport eventual_mu_scan(const Channel& l, const std::vector<double>& grid, const ClassifyConfig& cfg = {});

std::vector<double> linear_grid(double start, double end, int points);
std::vector<double> log_grid(double start, double end, int points);
// "start:end:points[:log]".
std::vector<double> parse_grid(const std::string& spec);

}  // namespace muchan
