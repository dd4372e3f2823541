#include "entwb/quadrature.hpp"

#include <cmath>

#include "entwb/errors.hpp"

namespace entwb {

namespace {

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss
// rule (QUADPACK dqk15 constants).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
  double kronrod;
  double error;
};

PanelEstimate gk15(const std::function<double(double)>& f, double a,
                   double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double gauss = fc * kWg[3];
  double kronrod = fc * kWgk[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += fsum * kWgk[i];
    if (i % 2 == 1) gauss += fsum * kWg[i / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {kronrod, std::abs(kronrod - gauss)};
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double tol, int depth) {
  const PanelEstimate est = gk15(f, a, b);
  if (est.error <= tol) return est.kronrod;
  if (depth >= 48 || b - a < 1e-300) {
    throw QuadratureFailure("integrate: tolerance unreachable on subinterval");
  }
  const double mid = 0.5 * (a + b);
  return adaptive(f, a, mid, 0.5 * tol, depth + 1) +
         adaptive(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol) {
  if (!(abs_tol > 0.0)) throw OutOfRange("integrate: tolerance must be > 0");
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, abs_tol);
  return adaptive(f, a, b, abs_tol, 0);
}

}  // namespace entwb
