// SPDX-License-Identifier: Apache-2.0

#include "selfnom/channel_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace selfnom::channel {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kNormalizationSamples = 10001;

double deg2rad(double d) { return d * kPi / 180.0; }

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a;
}

double laplace(RngStream& rng, double scale) {
  // Inverse CDF; scale = spread / sqrt(2) gives standard deviation `spread`.
  const double u = uniform01(rng) - 0.5;
  return -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
}

std::complex<double> complex_gaussian(RngStream& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace

void ArrayGeometry::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("array: rows and cols must be >= 1");
  if (kind == ArrayKind::Ula && rows != 1) throw std::invalid_argument("array: ULA must have rows = 1");
  if (!(element_spacing > 0.0)) throw std::invalid_argument("array: element_spacing must be > 0");
}

void ChannelModelConfig::validate() const {
  if (num_clusters < 1) throw std::invalid_argument("channel: num_clusters must be >= 1");
  if (!(cell_radius_m > 0.0)) throw std::invalid_argument("channel: cell_radius_m must be > 0");
  if (!(min_distance_m > 0.0) || min_distance_m >= cell_radius_m)
    throw std::invalid_argument("channel: need 0 < min_distance_m < cell_radius_m");
  if (angle_spread_deg < 0.0 || shadowing_std_db < 0.0)
    throw std::invalid_argument("channel: spreads must be nonnegative");
  if (!(sector_half_width_deg > 0.0) || sector_half_width_deg > 180.0)
    throw std::invalid_argument("channel: sector_half_width_deg must be in (0, 180]");
}

ChannelVector steering_vector(const ArrayGeometry& geometry, double azimuth_rad,
                              double elevation_rad) {
  if (std::abs(azimuth_rad) > kPi + 1e-12 || std::abs(elevation_rad) > kPi / 2 + 1e-12)
    throw std::invalid_argument("steering_vector: angle out of range");
  const double kx = 2.0 * kPi * geometry.element_spacing * std::sin(azimuth_rad) *
                    std::cos(elevation_rad);
  const double ky = 2.0 * kPi * geometry.element_spacing * std::sin(elevation_rad);
  ChannelVector a(geometry.num_antennas());
  for (int r = 0; r < geometry.rows; ++r)
    for (int c = 0; c < geometry.cols; ++c)
      a(r * geometry.cols + c) = std::polar(1.0, kx * c + ky * r);
  return a;
}

ChannelVector compose_channel(const ArrayGeometry& geometry, double large_scale_gain,
                              std::span<const ClusterPath> clusters) {
  ChannelVector h = ChannelVector::Zero(geometry.num_antennas());
  for (const auto& cl : clusters) h += cl.gain * steering_vector(geometry, cl.azimuth, cl.elevation);
  return large_scale_gain * h;
}

ChannelModel::ChannelModel(ArrayGeometry geometry, ChannelModelConfig config)
    : geometry_(geometry), config_(config) {
  geometry_.validate();
  config_.validate();
  if (config_.rayleigh_mode) return;
  // Median of |h|^2/N under a fixed internal stream, so every model built
  // from the same (geometry, config) shares the same constant.
  RngStream rng = make_stream(0x5eed, {stream_tag::kNormalization});
  std::vector<double> g(kNormalizationSamples);
  for (auto& v : g) {
    const UeLayout l = draw_layout_unnormalized(rng);
    v = realize(l, rng).squaredNorm() / geometry_.num_antennas();
  }
  std::nth_element(g.begin(), g.begin() + kNormalizationSamples / 2, g.end());
  normalization_ = 1.0 / std::sqrt(g[kNormalizationSamples / 2]);
}

UeLayout ChannelModel::draw_layout_unnormalized(RngStream& rng) const {
  const auto& c = config_;
  UeLayout l;
  const double r2min = c.min_distance_m * c.min_distance_m;
  const double r2max = c.cell_radius_m * c.cell_radius_m;
  l.distance_m = std::sqrt(r2min + uniform01(rng) * (r2max - r2min));
  const double sector = deg2rad(c.sector_half_width_deg);
  l.azimuth = wrap_angle((2.0 * uniform01(rng) - 1.0) * sector);
  l.elevation = -std::atan2(c.bs_height_m - c.ue_height_m, l.distance_m);
  const double shadow_db = std::normal_distribution<double>(0.0, c.shadowing_std_db)(rng);
  const double power = std::pow(l.distance_m / c.min_distance_m, -c.pathloss_exponent) *
                       std::pow(10.0, shadow_db / 10.0);
  l.large_scale_gain = std::sqrt(power);
  const double scale = deg2rad(c.angle_spread_deg) / std::numbers::sqrt2;
  l.cluster_azimuth.resize(c.num_clusters);
  l.cluster_elevation.resize(c.num_clusters);
  for (int k = 0; k < c.num_clusters; ++k) {
    l.cluster_azimuth[k] = wrap_angle(l.azimuth + laplace(rng, scale));
    l.cluster_elevation[k] =
        std::clamp(l.elevation + laplace(rng, 0.5 * scale), -kPi / 2, kPi / 2);
  }
  return l;
}

UeLayout ChannelModel::draw_layout(RngStream& rng) const {
  UeLayout l = draw_layout_unnormalized(rng);
  l.large_scale_gain *= normalization_;
  return l;
}

ChannelVector ChannelModel::realize(const UeLayout& layout, RngStream& rng) const {
  if (config_.rayleigh_mode) {
    ChannelVector h(geometry_.num_antennas());
    for (auto& v : h) v = complex_gaussian(rng, 1.0);
    return h;
  }
  const int k = static_cast<int>(layout.cluster_azimuth.size());
  std::vector<ClusterPath> paths(k);
  for (int i = 0; i < k; ++i)
    paths[i] = {complex_gaussian(rng, 1.0 / k), layout.cluster_azimuth[i],
                layout.cluster_elevation[i]};
  return compose_channel(geometry_, layout.large_scale_gain, paths);
}

ChannelVector ChannelModel::generate(RngStream& rng) const {
  if (config_.rayleigh_mode) return realize(UeLayout{}, rng);
  return realize(draw_layout(rng), rng);
}

}  // namespace selfnom::channel
