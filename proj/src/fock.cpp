#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "gravdec/opalg.hpp"

namespace gravdec::opalg {

namespace {

// One ladder term acting on an orthonormal Fock mode.
struct FockTerm {
  std::complex<double> coeff;
  int mode = 0;
  bool dagger = false;
};

struct FockExpr {
  std::complex<double> scalar{0.0, 0.0};
  std::vector<FockTerm> terms;
};

FockExpr fock_adjoint(const FockExpr& expr) {
  FockExpr out;
  out.scalar = std::conj(expr.scalar);
  out.terms.reserve(expr.terms.size());
  for (const FockTerm& t : expr.terms) {
    out.terms.push_back(FockTerm{std::conj(t.coeff), t.mode, !t.dagger});
  }
  return out;
}

class FockSpace {
 public:
  using State = std::vector<std::complex<double>>;

  FockSpace(int mode_count, int cutoff)
      : mode_count_(mode_count), levels_(cutoff + 1) {
    strides_.resize(mode_count_);
    std::size_t dim = 1;
    for (int m = 0; m < mode_count_; ++m) {
      strides_[m] = dim;
      dim *= static_cast<std::size_t>(levels_);
    }
    dim_ = dim;
  }

  State vacuum() const {
    State v(dim_, {0.0, 0.0});
    v[0] = {1.0, 0.0};
    return v;
  }

  void apply(const FockExpr& expr, State& state) {
    State out(dim_, {0.0, 0.0});
    if (expr.scalar != std::complex<double>{0.0, 0.0}) {
      for (std::size_t idx = 0; idx < dim_; ++idx) out[idx] = expr.scalar * state[idx];
    }
    for (const FockTerm& term : expr.terms) {
      const std::size_t stride = strides_[term.mode];
      for (std::size_t idx = 0; idx < dim_; ++idx) {
        if (state[idx] == std::complex<double>{0.0, 0.0}) continue;
        const int occ = static_cast<int>(idx / stride) % levels_;
        if (term.dagger) {
          const std::complex<double> amp =
              term.coeff * std::sqrt(static_cast<double>(occ + 1)) * state[idx];
          if (occ + 1 < levels_) {
            out[idx + stride] += amp;
          } else {
            lost_mass_ += std::norm(amp);
          }
        } else if (occ > 0) {
          out[idx - stride] +=
              term.coeff * std::sqrt(static_cast<double>(occ)) * state[idx];
        }
      }
    }
    state = std::move(out);
  }

  double lost_mass() const { return lost_mass_; }

 private:
  int mode_count_;
  int levels_;
  std::size_t dim_ = 0;
  std::vector<std::size_t> strides_;
  double lost_mass_ = 0.0;
};

}  // namespace

double fock_oracle(const SourceModel& source, const SpaceTimeLabel& label_1,
                   const SpaceTimeLabel& label_2, const ModeFunction& mode, int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("fock_oracle requires cutoff >= 2");
  if (cutoff > 32) throw std::invalid_argument("fock_oracle cutoff above 32 is unsupported");

  const double k = modes::overlap(mode, label_1, label_2);

  // Per beam, the two labelled copies of the mode span at most two
  // orthonormal modes: e1 = mode@label_1 and e2 from Gram-Schmidt on
  // mode@label_2 with <e1, mode@label_2> = K.
  const bool degenerate = 1.0 - k < 1.0e-12;
  const double q = degenerate ? 0.0 : std::sqrt(std::max(0.0, 1.0 - k * k));
  const int per_beam = degenerate ? 1 : 2;
  auto mode_index = [per_beam](int beam, int which) { return (beam - 1) * per_beam + which; };

  auto annihilator_at_1 = [&](int beam) {
    return std::vector<FockTerm>{{{1.0, 0.0}, mode_index(beam, 0), false}};
  };
  auto annihilator_at_2 = [&](int beam) {
    if (degenerate) {
      return std::vector<FockTerm>{{{1.0, 0.0}, mode_index(beam, 0), false}};
    }
    return std::vector<FockTerm>{{{k, 0.0}, mode_index(beam, 0), false},
                                 {{q, 0.0}, mode_index(beam, 1), false}};
  };
  auto daggered = [](std::vector<FockTerm> terms, std::complex<double> factor) {
    for (FockTerm& t : terms) {
      t.coeff = factor * std::conj(t.coeff);
      t.dagger = true;
    }
    return terms;
  };

  FockExpr detector_1;
  FockExpr detector_2;
  detector_1.terms = annihilator_at_1(1);
  detector_2.terms = annihilator_at_2(2);
  if (const auto* coherent = std::get_if<CoherentSource>(&source)) {
    detector_1.scalar = coherent->alpha;
    detector_2.scalar = coherent->alpha;
  } else {
    const double chi = std::get<PdcSource>(source).chi;
    if (chi != 0.0) {
      for (FockTerm& t : daggered(annihilator_at_1(2), chi)) detector_1.terms.push_back(t);
      for (FockTerm& t : daggered(annihilator_at_2(1), chi)) detector_2.terms.push_back(t);
    }
  }

  FockSpace space(2 * per_beam, cutoff);
  FockSpace::State state = space.vacuum();
  space.apply(detector_2, state);
  space.apply(fock_adjoint(detector_2), state);
  space.apply(detector_1, state);
  space.apply(fock_adjoint(detector_1), state);

  if (space.lost_mass() > 1.0e-12) {
    throw CutoffError("Fock truncation lost more than 1e-12 probability mass; raise the cutoff");
  }
  return state[0].real();
}

}  // namespace gravdec::opalg
