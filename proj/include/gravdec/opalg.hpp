#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "gravdec/modes.hpp"

namespace gravdec::opalg {

using modes::ModeFunction;
using modes::SpaceTimeLabel;

/// One labelled bosonic ladder operator on beam 1 or beam 2.
struct LadderOp {
  int beam = 1;
  SpaceTimeLabel label;
  bool dagger = false;
};

struct Term {
  std::complex<double> coeff;
  LadderOp op;
};

/// Affine combination scalar + sum_k coeff_k * op_k. Source input/output
/// relations are affine in the ladder operators, so no operator products
/// appear inside a single expression.
struct OperatorExpr {
  std::complex<double> scalar{0.0, 0.0};
  std::vector<Term> terms;
};

OperatorExpr adjoint(const OperatorExpr& expr);

struct CoherentSource {
  std::complex<double> alpha;
};

/// Down-conversion gain; chi is capped at 0.3 and a warning is printed above
/// 0.1, where the affine source model starts to strain.
struct PdcSource {
  double chi = 0.0;
};

using SourceModel = std::variant<CoherentSource, PdcSource>;

SourceModel coherent_source(std::complex<double> alpha);
SourceModel pdc_source(double chi);

/// Evolved detector-mode operators for the given source:
///   coherent: (a1(l1) + alpha, a2(l2) + alpha)
///   pdc:      (a1(l1) + chi a2^dag(l1), a2(l2) + chi a1^dag(l2))
/// The conjugate term carries the same label as its partner operator.
std::pair<OperatorExpr, OperatorExpr> apply_source(const SourceModel& source,
                                                   const SpaceTimeLabel& label_1,
                                                   const SpaceTimeLabel& label_2);

/// Scalar commutator [a, b] of two labelled ladder operators: zero across
/// beams and for equal dagger flags, otherwise +/- the mode overlap.
double contraction_kernel(const ModeFunction& mode, const LadderOp& a, const LadderOp& b);

/// Vacuum expectation of an ordered product of affine factors, evaluated by
/// distributive expansion and full Wick contraction with the overlap kernel.
/// Exact in the source parameters; monomials longer than 16 ladder operators
/// are rejected.
std::complex<double> vacuum_expectation(std::span<const OperatorExpr> factors,
                                        const ModeFunction& mode);

/// Coincidence rate <n1 n2> for the given source and labels via the Wick
/// engine; checked to be real.
double coincidence_exact(const SourceModel& source, const SpaceTimeLabel& label_1,
                         const SpaceTimeLabel& label_2, const ModeFunction& mode);

/// The second-order truncation chi^2 K^2; down-conversion sources only.
double coincidence_second_order(const SourceModel& source, const SpaceTimeLabel& label_1,
                                const SpaceTimeLabel& label_2, const ModeFunction& mode);

struct CutoffError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Independent route to the same coincidence: orthonormalises the labelled
/// modes per beam, represents the detector operators on a truncated Fock
/// space, and evaluates <00| n1 n2 |00> by direct state-vector arithmetic.
/// Throws CutoffError if truncation loses more than 1e-12 probability mass.
double fock_oracle(const SourceModel& source, const SpaceTimeLabel& label_1,
                   const SpaceTimeLabel& label_2, const ModeFunction& mode, int cutoff);

}  // namespace gravdec::opalg
