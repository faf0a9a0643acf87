#pragma once

#include <functional>
#include <vector>

namespace mfcl {

// int_0^t e^{mu s} ds = expm1(mu t)/mu, stable through mu = 0.
double iexp(double mu, double t);

// Adaptive Simpson on [a, b], relative tolerance rel_tol (floored absolutely
// near zero integrals).
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol = 1e-10);

// Maximum of a unimodal f over [lo, hi]: golden-section to interval width
// `width`, returns the midpoint of the final bracket.
double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double width = 1e-12);

// Classic fixed-step RK4 for y' = f(t, y), y vector-valued; returns the values
// at every grid point t_k = t0 + k h, k = 0..steps.
std::vector<std::vector<double>> rk4_solve(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
    std::vector<double> y0, double t0, double h, int steps);

// Central difference with one Richardson extrapolation step, base step h.
double central_diff(const std::function<double(double)>& f, double x,
                    double h = 1e-5);
double second_diff(const std::function<double(double)>& f, double x,
                   double h = 1e-4);

// 1-Wasserstein distance between two equal-size samples: mean absolute
// difference of the sorted values. Inputs are copied and sorted.
double wasserstein1(std::vector<double> a, std::vector<double> b);

struct SampleStats {
  size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;       // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;    // Gaussian-based sqrt(2/(n-1)) * variance
  double se_skewness = 0.0;    // sqrt(6/n)
  double se_kurtosis = 0.0;    // sqrt(24/n)
};
SampleStats sample_stats(const std::vector<double>& x);

double normal_cdf(double z);

// One-sample Kolmogorov-Smirnov statistic against N(mean, variance).
double ks_statistic(std::vector<double> sample, double mean, double variance);
// Two-sample KS statistic and the asymptotic Kolmogorov p-value.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double kolmogorov_pvalue(double d, double n_effective);

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mfcl
