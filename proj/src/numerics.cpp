#include "mfcl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace mfcl {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa,
                   double b, double fb, double fm, double whole, double eps,
                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, fa, m, fm, flm);
  double right = simpson(m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * eps, depth - 1) +
         simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * eps, depth - 1);
}

}  // namespace

double iexp(double mu, double t) {
  double x = mu * t;
  if (x == 0.0) return t;
  return std::expm1(x) / mu;
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = simpson(a, fa, b, fb, fm);
  double scale = std::max({std::fabs(whole), std::fabs(b - a), 1e-300});
  return simpson_rec(f, a, fa, b, fb, fm, whole, rel_tol * scale, 48);
}

double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double width) {
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > width) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::vector<double>> rk4_solve(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
    std::vector<double> y0, double t0, double h, int steps) {
  std::vector<std::vector<double>> out;
  out.reserve(steps + 1);
  out.push_back(y0);
  size_t d = y0.size();
  std::vector<double> k1, k2, k3, k4, tmp(d);
  for (int s = 0; s < steps; ++s) {
    double t = t0 + s * h;
    const std::vector<double>& y = out.back();
    k1 = f(t, y);
    for (size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    k2 = f(t + 0.5 * h, tmp);
    for (size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    k3 = f(t + 0.5 * h, tmp);
    for (size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * k3[i];
    k4 = f(t + h, tmp);
    std::vector<double> next(d);
    for (size_t i = 0; i < d; ++i)
      next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    out.push_back(std::move(next));
  }
  return out;
}

double central_diff(const std::function<double(double)>& f, double x, double h) {
  auto d = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  double dh = d(h), dh2 = d(0.5 * h);
  return (4.0 * dh2 - dh) / 3.0;
}

double second_diff(const std::function<double(double)>& f, double x, double h) {
  auto d = [&](double step) {
    return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
  };
  double dh = d(h), dh2 = d(0.5 * h);
  return (4.0 * dh2 - dh) / 3.0;
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("wasserstein1 needs equal nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s / a.size();
}

SampleStats sample_stats(const std::vector<double>& x) {
  SampleStats st;
  st.count = x.size();
  if (x.empty()) return st;
  double n = (double)x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    double d = v - mean;
    double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  st.mean = mean;
  st.variance = n > 1 ? m2 * n / (n - 1.0) : 0.0;
  if (m2 > 0.0) {
    st.skewness = m3 / std::pow(m2, 1.5);
    st.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  st.se_mean = n > 1 ? std::sqrt(st.variance / n) : 0.0;
  st.se_variance = n > 1 ? st.variance * std::sqrt(2.0 / (n - 1.0)) : 0.0;
  st.se_skewness = std::sqrt(6.0 / n);
  st.se_kurtosis = std::sqrt(24.0 / n);
  return st;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> sample, double mean, double variance) {
  std::sort(sample.begin(), sample.end());
  double n = (double)sample.size();
  double sd = std::sqrt(std::max(variance, 0.0));
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    double z = sd > 0.0 ? (sample[i] - mean) / sd : (sample[i] > mean ? 40.0 : -40.0);
    double cdf = normal_cdf(z);
    d = std::max(d, std::fabs(cdf - (i + 1) / n));
    d = std::max(d, std::fabs(cdf - i / n));
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::fabs((double)i / a.size() - (double)j / b.size()));
  }
  return d;
}

double kolmogorov_pvalue(double d, double n_effective) {
  double lambda = (std::sqrt(n_effective) + 0.12 + 0.11 / std::sqrt(n_effective)) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ls_slope needs matched samples of size >= 2");
  double n = (double)x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mfcl
