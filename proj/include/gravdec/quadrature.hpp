#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace gravdec::quad {

/// Outcome of an adaptive integration pass.
struct Result {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t panels = 0;
  bool converged = false;
};

namespace detail {

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1].
// Odd-index nodes (plus the centre) form the embedded 7-point Gauss rule.
inline constexpr double kNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Panel evaluate_panel(F& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  const double f_mid = f(mid);
  double kronrod = kKronrodWeights[7] * f_mid;
  double gauss = kGaussWeights[3] * f_mid;
  double resabs = kKronrodWeights[7] * std::fabs(f_mid);

  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double f_lo = f(mid - dx);
    const double f_hi = f(mid + dx);
    const double pair_sum = f_lo + f_hi;
    kronrod += kKronrodWeights[i] * pair_sum;
    resabs += kKronrodWeights[i] * (std::fabs(f_lo) + std::fabs(f_hi));
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair_sum;
  }

  kronrod *= half;
  gauss *= half;
  resabs *= std::fabs(half);

  // QUADPACK-style error estimate with a roundoff floor.
  double err = std::fabs(kronrod - gauss);
  err = std::min(err, std::pow(200.0 * err, 1.5));
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * resabs);

  return Panel{lo, hi, kronrod, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod 7-15 integration of f over [lo, hi].
/// Splits the worst panel until the summed error estimate drops below
/// max(abs_tol, rel_tol * |integral|) or max_panels is reached.
template <class F>
Result integrate(F&& f, double lo, double hi, double abs_tol, double rel_tol,
                 std::size_t max_panels = 4096) {
  Result out;
  if (lo == hi) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (hi < lo) {
    std::swap(lo, hi);
    sign = -1.0;
  }

  std::vector<detail::Panel> heap;
  auto by_error = [](const detail::Panel& a, const detail::Panel& b) {
    return a.error < b.error;
  };

  heap.push_back(detail::evaluate_panel(f, lo, hi));
  double total_value = heap.front().value;
  double total_error = heap.front().error;

  while (true) {
    const double tol = std::max(abs_tol, rel_tol * std::fabs(total_value));
    if (total_error <= tol) {
      out.converged = true;
      break;
    }
    if (heap.size() >= max_panels) break;

    std::pop_heap(heap.begin(), heap.end(), by_error);
    const detail::Panel worst = heap.back();
    heap.pop_back();

    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      // Interval at roundoff resolution; put it back and stop subdividing.
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), by_error);
      break;
    }

    const detail::Panel left = detail::evaluate_panel(f, worst.lo, mid);
    const detail::Panel right = detail::evaluate_panel(f, mid, worst.hi);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;

    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
  }

  // Re-sum the panels with compensation; the incremental total drifts.
  double sum = 0.0, carry = 0.0, err = 0.0;
  for (const detail::Panel& p : heap) {
    const double y = p.value - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
    err += p.error;
  }

  out.value = sign * sum;
  out.error_estimate = err;
  out.panels = heap.size();
  return out;
}

}  // namespace gravdec::quad
