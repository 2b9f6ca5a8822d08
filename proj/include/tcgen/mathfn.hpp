#pragma once

namespace tcgen::mathfn {

/// Digamma function psi(x), x > 0.
double digamma(double x);

/// Trigamma function psi'(x), x > 0.
double trigamma(double x);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double reg_inc_gamma_p(double a, double x);

/// Inverse of P(a, .) in x for p in (0, 1).
double inv_reg_inc_gamma_p(double a, double p);

/// Chi-square survival function (upper tail) with df degrees of freedom.
double chi2_sf(double x, double df);

/// Kolmogorov-Smirnov asymptotic survival function Q_KS(lambda).
double ks_sf(double lambda);

}  // namespace tcgen::mathfn
