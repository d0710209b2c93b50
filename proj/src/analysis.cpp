#include "g2p/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include "g2p/error.hpp"

namespace g2p {

bool point_in_region(const std::vector<FootPoint>& poly, const FootPoint& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const FootPoint& a = poly[i];
    const FootPoint& b = poly[j];
    // On-edge test.
    const double cross = (b.x - a.x) * (p.z - a.z) - (b.z - a.z) * (p.x - a.x);
    const double len = std::hypot(b.x - a.x, b.z - a.z);
    if (std::abs(cross) <= 1e-12 * std::max(len, 1e-12) && p.x >= std::min(a.x, b.x) - 1e-15 &&
        p.x <= std::max(a.x, b.x) + 1e-15 && p.z >= std::min(a.z, b.z) - 1e-15 && p.z <= std::max(a.z, b.z) + 1e-15)
      return true;
    if ((a.z > p.z) != (b.z > p.z)) {
      const double x_cross = a.x + (p.z - a.z) * (b.x - a.x) / (b.z - a.z);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

SpreadResult spread(std::span<const FootPoint> points, const Trajectory& region, double pixel_size) {
  const auto& poly = region.points;
  double area = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    area += poly[j].x * poly[i].z - poly[i].x * poly[j].z;
  area = std::abs(area) / 2.0;
  if (poly.size() < 3 || !(area > pixel_size * pixel_size))
    throw Error(ErrorCode::DegenerateRegion, fmt::format("spread region has area {:.3g} m^2", area));

  double xmin = INFINITY, xmax = -INFINITY, zmin = INFINITY, zmax = -INFINITY;
  for (const auto& p : poly) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
  }
  // Pixel grid anchored at multiples of pixel_size.
  const auto x0 = static_cast<long>(std::floor(xmin / pixel_size));
  const auto z0 = static_cast<long>(std::floor(zmin / pixel_size));
  const auto x1 = static_cast<long>(std::floor(xmax / pixel_size));
  const auto z1 = static_cast<long>(std::floor(zmax / pixel_size));
  SpreadResult r;
  r.grid_width = static_cast<int>(x1 - x0 + 1);
  r.grid_height = static_cast<int>(z1 - z0 + 1);
  std::vector<char> in_region(static_cast<std::size_t>(r.grid_width * r.grid_height), 0);
  std::vector<char> visited(in_region.size(), 0);
  for (int iz = 0; iz < r.grid_height; ++iz)
    for (int ix = 0; ix < r.grid_width; ++ix) {
      const FootPoint c{(static_cast<double>(x0 + ix) + 0.5) * pixel_size,
                        (static_cast<double>(z0 + iz) + 0.5) * pixel_size};
      if (point_in_region(poly, c)) {
        in_region[static_cast<std::size_t>(iz * r.grid_width + ix)] = 1;
        ++r.total;
      }
    }
  if (r.total == 0) throw Error(ErrorCode::DegenerateRegion, "spread region contains no pixel centers");
  for (const auto& p : points) {
    const long ix = static_cast<long>(std::floor(p.x / pixel_size)) - x0;
    const long iz = static_cast<long>(std::floor(p.z / pixel_size)) - z0;
    if (ix < 0 || iz < 0 || ix >= r.grid_width || iz >= r.grid_height) continue;
    const auto k = static_cast<std::size_t>(iz * r.grid_width + ix);
    if (in_region[k] && !visited[k]) {
      visited[k] = 1;
      ++r.occupied;
    }
  }
  r.ratio = static_cast<double>(r.occupied) / static_cast<double>(r.total);
  return r;
}

std::vector<int> default_dfa_scales(std::size_t n, int min_scale, int count) {
  const double hi = static_cast<double>(n) / 8.0;
  std::vector<int> scales;
  if (hi < min_scale || count < 2) return scales;
  const double ratio = std::log(hi / min_scale);
  for (int k = 0; k < count; ++k) {
    const int s = static_cast<int>(std::lround(min_scale * std::exp(ratio * k / (count - 1))));
    if (scales.empty() || s > scales.back()) scales.push_back(s);
  }
  return scales;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// RMS residual of a least-squares polynomial fit over one box. Uses the box
// index as abscissa, centred, with Gram-Schmidt orthogonal polynomials.
double box_rms(std::span<const double> y, int order) {
  const std::size_t n = y.size();
  std::vector<double> resid(y.begin(), y.end());
  std::vector<std::vector<double>> basis;
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  for (int k = 0; k <= order; ++k) {
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = std::pow(static_cast<double>(i) - c, k);
    for (const auto& q : basis) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += b[i] * q[i];
      for (std::size_t i = 0; i < n; ++i) b[i] -= d * q[i];
    }
    double norm = 0.0;
    for (double v : b) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : b) v /= norm;
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += resid[i] * b[i];
    for (std::size_t i = 0; i < n; ++i) resid[i] -= proj * b[i];
    basis.push_back(std::move(b));
  }
  double ss = 0.0;
  for (double v : resid) ss += v * v;
  return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace

DfaResult dfa(std::span<const double> series, std::span<const int> scales, const DfaOptions& options) {
  if (scales.empty()) throw Error(ErrorCode::SeriesTooShort, "DFA needs at least one scale");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] < options.detrend_order + 2)
      throw Error(ErrorCode::InvalidArgument, fmt::format("DFA scale {} too small for the detrend order", scales[i]));
    if (i > 0 && scales[i] <= scales[i - 1])
      throw Error(ErrorCode::InvalidArgument, "DFA scales must be strictly increasing");
  }
  const auto max_scale = static_cast<std::size_t>(scales.back());
  if (series.size() < 4 * max_scale)
    throw Error(ErrorCode::SeriesTooShort,
                fmt::format("DFA needs at least {} samples (got {})", 4 * max_scale, series.size()));
  const double mu = mean(series);
  const double lo = *std::min_element(series.begin(), series.end());
  const double hi = *std::max_element(series.begin(), series.end());
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mu)))
    throw Error(ErrorCode::ConstantSeries, "DFA input series is constant");

  std::vector<double> profile(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (options.integrate) {
      acc += series[i] - mu;
      profile[i] = acc;
    } else {
      profile[i] = series[i] - mu;
    }
  }

  DfaResult r;
  std::vector<double> log_s, log_f;
  for (int s : scales) {
    const auto len = static_cast<std::size_t>(s);
    const std::size_t boxes = profile.size() / len;
    double f = 0.0;
    for (std::size_t b = 0; b < boxes; ++b)
      f += box_rms(std::span(profile).subspan(b * len, len), options.detrend_order);
    f /= static_cast<double>(boxes);
    if (!(f > 0.0) || !std::isfinite(f))
      throw Error(ErrorCode::ConstantSeries, fmt::format("zero fluctuation at scale {}", s));
    r.scales.push_back(s);
    r.fluctuations.push_back(f);
    log_s.push_back(std::log(static_cast<double>(s)));
    log_f.push_back(std::log(f));
  }
  if (log_s.size() >= 2) {
    const auto fit = fit_line(log_s, log_f);
    r.alpha = fit.slope;
    r.intercept = fit.intercept;
    r.fit_r2 = fit.r2;
  }
  return r;
}

DfaResult dfa(std::span<const double> series, const DfaOptions& options) {
  const auto scales = default_dfa_scales(series.size());
  if (scales.size() < 2)
    throw Error(ErrorCode::SeriesTooShort, fmt::format("series of {} samples is too short for DFA", series.size()));
  return dfa(series, scales, options);
}

std::vector<double> endpoint_distance_series(const KinematicsLog& log, std::size_t leg) {
  std::vector<double> d;
  d.reserve(log.size());
  for (const auto& s : log.legs.at(leg)) d.push_back(s.foot.norm());
  return d;
}

TrialStats trial_stats(std::span<const double> displacement, double sample_rate, double success_distance) {
  TrialStats st;
  if (displacement.empty()) return st;
  st.final_displacement = displacement.back();
  for (std::size_t i = 0; i < displacement.size(); ++i) {
    if (displacement[i] >= success_distance) {
      double t = static_cast<double>(i) / sample_rate;
      if (i > 0 && displacement[i] > displacement[i - 1]) {
        const double w = (success_distance - displacement[i - 1]) / (displacement[i] - displacement[i - 1]);
        t = (static_cast<double>(i - 1) + w) / sample_rate;
      }
      st.success = true;
      st.travel_time = t;
      st.speed = t > 0.0 ? success_distance * 100.0 / t : INFINITY;
      break;
    }
  }
  return st;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double student_t_two_sided(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

WelchResult welch_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw Error(ErrorCode::InsufficientData, "Welch's test needs at least 2 values per group");
  WelchResult r;
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.t = r.mean_a == r.mean_b ? 0.0 : std::copysign(INFINITY, r.mean_a - r.mean_b);
    r.df = static_cast<double>(a.size() + b.size() - 2);
    r.p = r.mean_a == r.mean_b ? 1.0 : 0.0;
    return r;
  }
  r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

}  // namespace g2p
