#pragma once

#include <string>
#include <vector>

#include "iocttl/trace.hpp"

namespace iocttl {

// Empirical survival curve: ys[i] = fraction of samples strictly above xs[i].
// The trailing all-below point (survival 0) is dropped so log transforms stay
// finite.
struct CcdfPoints {
  std::vector<double> xs;  // ascending, positive
  std::vector<double> ys;  // nonincreasing, in (0, 1)
  bool zero_shifted = false;
};

enum class FitFamily { pareto, weibull };

// Pareto survival (k/x)^alpha: shape=alpha, scale=k.
// Weibull survival exp(-(x/k)^lambda): shape=lambda, scale=k.
struct FitResult {
  FitFamily family = FitFamily::pareto;
  double shape = 0.0;
  double scale = 0.0;
  double rmse = 0.0;  // in linear CCDF space, over the points used
  std::size_t points_used = 0;
};

// Samples must be positive; zeros are shifted to `zero_epsilon` and flagged.
CcdfPoints empirical_ccdf(std::vector<double> samples,
                          double zero_epsilon = 0.5);

// Least squares on (log x, log y); needs >= 2 points.
FitResult fit_pareto(const CcdfPoints& ccdf);

// Least squares on (log x, log(-log y)); points with y >= 1 are dropped and
// >= 3 usable points are required.
FitResult fit_weibull(const CcdfPoints& ccdf);

double pareto_survival(double x, double alpha, double k);
double weibull_survival(double x, double lambda, double k);

const char* to_string(FitFamily family);

}  // namespace iocttl
