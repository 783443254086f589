#include "curvflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace curvflow {

namespace {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule (QUADPACK).
constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b, value, err;
  bool operator<(const Interval& o) const { return err < o.err; }
};

Interval gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  const double fc = f(c);
  resk = wgk[7] * fc;
  resg = wg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = h * xgk[j];
    const double fsum = f(c - x) + f(c + x);
    resk += wgk[j] * fsum;
    if (j % 2 == 1) resg += wg[j / 2] * fsum;
  }
  Interval out;
  out.a = a;
  out.b = b;
  out.value = resk * h;
  out.err = std::abs((resk - resg) * h);
  return out;
}

}  // namespace

QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol,
                        const std::vector<double>& breakpoints, int max_intervals) {
  std::vector<double> cuts{a, b};
  for (double x : breakpoints)
    if (x > a && x < b) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());

  std::priority_queue<Interval> heap;
  QuadResult res;
  double total = 0.0, toterr = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Interval iv = gk15(f, cuts[i], cuts[i + 1]);
    res.evals += 15;
    total += iv.value;
    toterr += iv.err;
    heap.push(iv);
  }

  int n = static_cast<int>(heap.size());
  while (n < max_intervals) {
    const double tol = std::max(abs_tol, rel_tol * std::abs(total));
    if (toterr <= tol) break;
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // interval exhausted by rounding
      heap.push(worst);
      break;
    }
    Interval l = gk15(f, worst.a, mid), r = gk15(f, mid, worst.b);
    res.evals += 30;
    total += l.value + r.value - worst.value;
    toterr += l.err + r.err - worst.err;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  res.value = total;
  res.abs_error = toterr;
  return res;
}

double radial_integral_nd(const std::function<double(double)>& g, int n, double decay,
                          double abs_tol, double tail_tol) {
  if (decay <= double(n))
    throw NumericError("radial integrand decays like r^{-" + std::to_string(decay) +
                       "} <= r^{-n}: integral diverges");
  // Tail bound: |∫_R^∞ g r^{n-1} dr| <= C R^{n-decay}/(decay-n) with
  // C estimated from |g(R)| R^{decay}; safety factor 4 covers non-monotone
  // prefactors of the rational integrands used here.
  double R = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double C = 4.0 * std::abs(g(R)) * std::pow(R, decay);
    const double tail = C * std::pow(R, double(n) - decay) / (decay - n);
    if (tail < tail_tol) break;
    R *= 1.6;
  }
  std::vector<double> bp{0.5, 1.0, 2.0, 8.0};
  QuadResult q = integrate_gk([&](double r) { return g(r) * std::pow(r, n - 1); }, 0.0, R,
                              abs_tol, 1e-13, bp);
  return sphere_area(n - 1) * q.value;
}

}  // namespace curvflow
