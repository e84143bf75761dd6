#include "gravdec/opalg.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <iostream>
#include <unordered_map>

namespace gravdec::opalg {

namespace {

constexpr std::size_t kMaxMonomialLength = 16;
constexpr double kChiWarnThreshold = 0.1;
constexpr double kChiHardCap = 0.3;

void check_beam(int beam) {
  if (beam != 1 && beam != 2) {
    throw std::invalid_argument("ladder operator beam must be 1 or 2");
  }
}

struct LabelPairKey {
  double a_s, a_l, b_s, b_l;
  friend bool operator==(const LabelPairKey&, const LabelPairKey&) = default;
};

struct LabelPairHash {
  std::size_t operator()(const LabelPairKey& k) const {
    std::size_t seed = std::hash<double>{}(k.a_s);
    for (double v : {k.a_l, k.b_s, k.b_l}) {
      seed ^= std::hash<double>{}(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
    }
    return seed;
  }
};

// Memoised overlap lookups; tabulated-mode overlaps are grid integrals and the
// Wick recursion revisits the same label pairs many times.
class ContractionTable {
 public:
  explicit ContractionTable(const ModeFunction& mode) : mode_(mode) {}

  double overlap(const SpaceTimeLabel& a, const SpaceTimeLabel& b) {
    const LabelPairKey key{a.s, a.l, b.s, b.l};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double k = modes::overlap(mode_, a, b);
    cache_.emplace(key, k);
    return k;
  }

 private:
  const ModeFunction& mode_;
  std::unordered_map<LabelPairKey, double, LabelPairHash> cache_;
};

// <0| ops |0> by recursive contraction: the leading annihilator pairs with
// each matching creator to its right, the leading creator kills the bra.
std::complex<double> wick_vacuum(const std::vector<LadderOp>& ops, ContractionTable& table) {
  if (ops.empty()) return {1.0, 0.0};
  const LadderOp& lead = ops.front();
  if (lead.dagger) return {0.0, 0.0};

  std::complex<double> total{0.0, 0.0};
  for (std::size_t j = 1; j < ops.size(); ++j) {
    if (!ops[j].dagger || ops[j].beam != lead.beam) continue;
    const double kernel = table.overlap(lead.label, ops[j].label);
    if (kernel == 0.0) continue;
    std::vector<LadderOp> rest;
    rest.reserve(ops.size() - 2);
    for (std::size_t k = 1; k < ops.size(); ++k) {
      if (k != j) rest.push_back(ops[k]);
    }
    total += kernel * wick_vacuum(rest, table);
  }
  return total;
}

struct Monomial {
  std::complex<double> coeff;
  std::vector<LadderOp> ops;
};

}  // namespace

OperatorExpr adjoint(const OperatorExpr& expr) {
  OperatorExpr out;
  out.scalar = std::conj(expr.scalar);
  out.terms.reserve(expr.terms.size());
  for (const Term& term : expr.terms) {
    out.terms.push_back(Term{std::conj(term.coeff),
                             LadderOp{term.op.beam, term.op.label, !term.op.dagger}});
  }
  return out;
}

SourceModel coherent_source(std::complex<double> alpha) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw std::invalid_argument("coherent amplitude must be finite");
  }
  return CoherentSource{alpha};
}

SourceModel pdc_source(double chi) {
  if (!std::isfinite(chi) || chi < 0.0 || chi > kChiHardCap) {
    throw std::invalid_argument("down-conversion gain chi must lie in [0, 0.3]");
  }
  if (chi > kChiWarnThreshold) {
    std::cerr << "warning: chi = " << chi
              << " exceeds 0.1; the affine source model assumes chi << 1\n";
  }
  return PdcSource{chi};
}

std::pair<OperatorExpr, OperatorExpr> apply_source(const SourceModel& source,
                                                   const SpaceTimeLabel& label_1,
                                                   const SpaceTimeLabel& label_2) {
  OperatorExpr out_1;
  OperatorExpr out_2;
  out_1.terms.push_back(Term{{1.0, 0.0}, LadderOp{1, label_1, false}});
  out_2.terms.push_back(Term{{1.0, 0.0}, LadderOp{2, label_2, false}});

  if (const auto* coherent = std::get_if<CoherentSource>(&source)) {
    out_1.scalar = coherent->alpha;
    out_2.scalar = coherent->alpha;
  } else {
    const double chi = std::get<PdcSource>(source).chi;
    if (chi != 0.0) {
      out_1.terms.push_back(Term{{chi, 0.0}, LadderOp{2, label_1, true}});
      out_2.terms.push_back(Term{{chi, 0.0}, LadderOp{1, label_2, true}});
    }
  }
  return {std::move(out_1), std::move(out_2)};
}

double contraction_kernel(const ModeFunction& mode, const LadderOp& a, const LadderOp& b) {
  check_beam(a.beam);
  check_beam(b.beam);
  if (a.beam != b.beam || a.dagger == b.dagger) return 0.0;
  if (!a.dagger) return modes::overlap(mode, a.label, b.label);
  return -modes::overlap(mode, b.label, a.label);
}

std::complex<double> vacuum_expectation(std::span<const OperatorExpr> factors,
                                        const ModeFunction& mode) {
  std::vector<Monomial> expansion{Monomial{{1.0, 0.0}, {}}};
  for (const OperatorExpr& factor : factors) {
    std::vector<Monomial> next;
    next.reserve(expansion.size() * (factor.terms.size() + 1));
    for (const Monomial& mono : expansion) {
      if (factor.scalar != std::complex<double>{0.0, 0.0}) {
        next.push_back(Monomial{mono.coeff * factor.scalar, mono.ops});
      }
      for (const Term& term : factor.terms) {
        if (term.coeff == std::complex<double>{0.0, 0.0}) continue;
        check_beam(term.op.beam);
        Monomial grown{mono.coeff * term.coeff, mono.ops};
        grown.ops.push_back(term.op);
        if (grown.ops.size() > kMaxMonomialLength) {
          throw std::length_error("monomial longer than 16 ladder operators");
        }
        next.push_back(std::move(grown));
      }
    }
    expansion = std::move(next);
  }

  ContractionTable table(mode);
  std::complex<double> total{0.0, 0.0};
  for (const Monomial& mono : expansion) {
    if (mono.ops.empty()) {
      total += mono.coeff;
    } else {
      total += mono.coeff * wick_vacuum(mono.ops, table);
    }
  }
  return total;
}

double coincidence_exact(const SourceModel& source, const SpaceTimeLabel& label_1,
                         const SpaceTimeLabel& label_2, const ModeFunction& mode) {
  const auto [out_1, out_2] = apply_source(source, label_1, label_2);
  const OperatorExpr factors[] = {adjoint(out_1), out_1, adjoint(out_2), out_2};
  const std::complex<double> c = vacuum_expectation(factors, mode);
  if (std::fabs(c.imag()) > 1.0e-12 * std::max(1.0, std::fabs(c.real()))) {
    throw std::runtime_error("coincidence expectation is not real");
  }
  return c.real();
}

double coincidence_second_order(const SourceModel& source, const SpaceTimeLabel& label_1,
                                const SpaceTimeLabel& label_2, const ModeFunction& mode) {
  const auto* pdc = std::get_if<PdcSource>(&source);
  if (pdc == nullptr) {
    throw std::invalid_argument("second-order coincidence requires a down-conversion source");
  }
  const double k = modes::overlap(mode, label_1, label_2);
  return pdc->chi * pdc->chi * k * k;
}

}  // namespace gravdec::opalg
