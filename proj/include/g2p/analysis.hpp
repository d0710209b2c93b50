#pragma once

// Quantitative instruments: babbling spread, detrended fluctuation analysis,
// walking success/speed, and Welch's two-sample t-test.

#include <cstdint>
#include <span>
#include <vector>

#include "g2p/babbling.hpp"
#include "g2p/kinematics.hpp"
#include "g2p/plant.hpp"

namespace g2p {

struct SpreadResult {
  double ratio = 0.0;
  int grid_width = 0;   // pixels spanning the region's bounding box
  int grid_height = 0;
  std::size_t occupied = 0;
  std::size_t total = 0;  // pixels whose centers lie inside the region
};

/// Even-odd point-in-polygon; points on an edge count as inside.
bool point_in_region(const std::vector<FootPoint>& polygon, const FootPoint& p);

/// Fraction of the region's pixels (pixel_size square, 1 mm by default)
/// visited by at least one point. Throws DegenerateRegion for zero-area regions.
SpreadResult spread(std::span<const FootPoint> points, const Trajectory& region, double pixel_size = 1e-3);

struct DfaOptions {
  int detrend_order = 1;
  bool integrate = true;  // false: skip the cumulative-sum profile
};

struct DfaResult {
  double alpha = 0.0;
  double intercept = 0.0;
  std::vector<int> scales;
  std::vector<double> fluctuations;
  double fit_r2 = 0.0;
};

/// `count` log-spaced integer box sizes from `min_scale` to n / 8, deduplicated.
std::vector<int> default_dfa_scales(std::size_t n, int min_scale = 16, int count = 12);

DfaResult dfa(std::span<const double> series, std::span<const int> scales, const DfaOptions& options = {});
DfaResult dfa(std::span<const double> series, const DfaOptions& options = {});

std::vector<double> endpoint_distance_series(const KinematicsLog& log, std::size_t leg);

struct TrialStats {
  bool success = false;
  double travel_time = 0.0;  // s to the first success-distance crossing
  double speed = 0.0;        // cm/s
  double final_displacement = 0.0;  // m
};

TrialStats trial_stats(std::span<const double> displacement, double sample_rate, double success_distance = 0.40);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

/// Welch's unequal-variance t-test, two-sided. Throws InsufficientData for groups below 2.
WelchResult welch_test(std::span<const double> a, std::span<const double> b);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);

}  // namespace g2p
