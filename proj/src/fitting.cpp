#include "iocttl/fitting.hpp"

#include <algorithm>
#include <cmath>

namespace iocttl {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) throw DataError("degenerate regression: all x equal");
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

double ccdf_rmse(const std::vector<double>& xs, const std::vector<double>& ys,
                 double (*survival)(double, double, double), double shape,
                 double scale) {
  double sq = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = survival(xs[i], shape, scale) - ys[i];
    sq += r * r;
  }
  return std::sqrt(sq / static_cast<double>(xs.size()));
}

}  // namespace

double pareto_survival(double x, double alpha, double k) {
  return std::pow(k / x, alpha);
}

double weibull_survival(double x, double lambda, double k) {
  return std::exp(-std::pow(x / k, lambda));
}

const char* to_string(FitFamily family) {
  return family == FitFamily::pareto ? "pareto" : "weibull";
}

CcdfPoints empirical_ccdf(std::vector<double> samples, double zero_epsilon) {
  CcdfPoints out;
  for (double& s : samples) {
    if (s < 0.0) throw DataError("CCDF samples must be nonnegative durations");
    if (s == 0.0) {
      s = zero_epsilon;
      out.zero_shifted = true;
    }
  }
  if (samples.size() < 3)
    throw DataError("empirical CCDF needs at least 3 samples");
  std::sort(samples.begin(), samples.end());
  if (samples.front() == samples.back())
    throw DataError("degenerate CCDF: all samples equal");

  const double n = static_cast<double>(samples.size());
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double above = static_cast<double>(samples.size() - j);
    if (above > 0.0) {  // final point (nothing above) is dropped
      out.xs.push_back(samples[i]);
      out.ys.push_back(above / n);
    }
    i = j;
  }
  return out;
}

FitResult fit_pareto(const CcdfPoints& ccdf) {
  if (ccdf.xs.size() < 2 || ccdf.xs.size() != ccdf.ys.size())
    throw DataError("Pareto fit needs at least 2 CCDF points");
  std::vector<double> lx, ly;
  lx.reserve(ccdf.xs.size());
  ly.reserve(ccdf.xs.size());
  for (std::size_t i = 0; i < ccdf.xs.size(); ++i) {
    if (ccdf.xs[i] <= 0.0 || ccdf.ys[i] <= 0.0)
      throw DataError("Pareto fit needs positive CCDF coordinates");
    lx.push_back(std::log(ccdf.xs[i]));
    ly.push_back(std::log(ccdf.ys[i]));
  }
  const LineFit line = least_squares(lx, ly);
  const double alpha = -line.slope;
  // anything at regression noise level counts as nonpositive
  if (!(alpha > 1e-12))
    throw DataError("data is not power-law tailed: fitted alpha <= 0");
  const double k = std::exp(line.intercept / alpha);
  FitResult res;
  res.family = FitFamily::pareto;
  res.shape = alpha;
  res.scale = k;
  res.points_used = ccdf.xs.size();
  res.rmse = ccdf_rmse(ccdf.xs, ccdf.ys, &pareto_survival, alpha, k);
  return res;
}

FitResult fit_weibull(const CcdfPoints& ccdf) {
  if (ccdf.xs.size() != ccdf.ys.size())
    throw DataError("mismatched CCDF coordinate vectors");
  std::vector<double> lx, lly, xs_used, ys_used;
  for (std::size_t i = 0; i < ccdf.xs.size(); ++i) {
    const double y = ccdf.ys[i];
    if (y >= 1.0 || y <= 0.0) continue;  // log(-log y) undefined
    if (ccdf.xs[i] <= 0.0)
      throw DataError("Weibull fit needs positive CCDF abscissae");
    lx.push_back(std::log(ccdf.xs[i]));
    lly.push_back(std::log(-std::log(y)));
    xs_used.push_back(ccdf.xs[i]);
    ys_used.push_back(y);
  }
  if (lx.size() < 3)
    throw DataError("Weibull fit needs at least 3 usable CCDF points");
  const LineFit line = least_squares(lx, lly);
  const double lambda = line.slope;
  if (!(lambda > 1e-12))
    throw DataError("data is not Weibull tailed: fitted lambda <= 0");
  const double k = std::exp(-line.intercept / lambda);
  FitResult res;
  res.family = FitFamily::weibull;
  res.shape = lambda;
  res.scale = k;
  res.points_used = lx.size();
  res.rmse = ccdf_rmse(xs_used, ys_used, &weibull_survival, lambda, k);
  return res;
}

}  // namespace iocttl
