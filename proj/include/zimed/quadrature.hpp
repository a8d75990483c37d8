#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace zimed::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  int panels = 0;
  bool converged = false;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

// Kronrod nodes and weights of one panel, for integrating several functions
// on a fixed panel set: visit(u, weight).
template <class Visit>
void kronrod_nodes(double a, double b, Visit&& visit) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  visit(c, h * detail::kWgk[7]);
  for (int j = 0; j < 7; ++j) {
    visit(c - h * detail::kXgk[j], h * detail::kWgk[j]);
    visit(c + h * detail::kXgk[j], h * detail::kWgk[j]);
  }
}

// Globally adaptive Gauss-Kronrod (7/15) quadrature. The interval is first cut
// into `initial_panels` equal pieces; the panel with the largest error
// estimate is bisected until the summed error is below
// max(abs_tol, rel_tol * |value|) or `max_panels` is reached.
// If `panels_out` is given it receives the final panel boundaries, so that
// related integrands can be evaluated with the same rule.
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol, double abs_tol, int initial_panels = 1,
                 int max_panels = 256, std::vector<std::array<double, 2>>* panels_out = nullptr) {
  std::vector<detail::Panel> panels;
  panels.reserve(static_cast<std::size_t>(initial_panels) + 16);
  const double w = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + w * i;
    const double hi = i + 1 == initial_panels ? b : lo + w;
    panels.push_back(detail::gk15(f, lo, hi));
  }
  Result res;
  for (;;) {
    double value = 0.0;
    double error = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      value += panels[i].value;
      error += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    res.value = value;
    res.error = error;
    res.panels = static_cast<int>(panels.size());
    if (error <= std::max(abs_tol, rel_tol * std::abs(value))) {
      res.converged = true;
      break;
    }
    if (static_cast<int>(panels.size()) >= max_panels) break;
    const detail::Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    panels[worst] = detail::gk15(f, p.a, mid);
    panels.push_back(detail::gk15(f, mid, p.b));
  }
  res.evaluations = 15 * (initial_panels + 2 * (res.panels - initial_panels));
  if (panels_out) {
    panels_out->clear();
    for (const auto& p : panels) panels_out->push_back({p.a, p.b});
  }
  return res;
}

}  // namespace zimed::quad
