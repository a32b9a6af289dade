#pragma once
// Scalar special functions used outside the hot kernel loops.

namespace qcrel::special {

// Standard normal CDF, evaluated through erfc. Absolute error below 1e-14
// over the whole real line (the erfc route has no cancellation for x < 0).
double norm_cdf(double x);

// Standard normal density.
double norm_pdf(double x);

// Standard normal quantile for p in (0, 1). A low-order initial guess is
// polished with three Newton steps on norm_cdf, giving close to full double
// accuracy; throws std::domain_error outside (0, 1).
double norm_icdf(double p);

}  // namespace qcrel::special
