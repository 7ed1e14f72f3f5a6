// SPDX-License-Identifier: Apache-2.0
//
// Synthetic narrowband spatial channels: ULA/UPA array response, clustered
// geometric multipath over a single-cell user drop, and i.i.d. Rayleigh.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "selfnom/mimo_core.hpp"
#include "selfnom/rng.hpp"

namespace selfnom::channel {

using mimo::ChannelVector;

enum class ArrayKind { Ula, Upa };

struct ArrayGeometry {
  ArrayKind kind = ArrayKind::Ula;
  int rows = 1;  // vertical elements
  int cols = 1;  // horizontal elements
  double element_spacing = 0.5;  // wavelengths

  static ArrayGeometry ula(int n, double spacing = 0.5) { return {ArrayKind::Ula, 1, n, spacing}; }
  static ArrayGeometry upa(int rows, int cols, double spacing = 0.5) {
    return {ArrayKind::Upa, rows, cols, spacing};
  }
  int num_antennas() const { return rows * cols; }
  void validate() const;
};

struct ChannelModelConfig {
  int num_clusters = 3;
  double angle_spread_deg = 10.0;  // Laplacian spread of cluster azimuths
  double pathloss_exponent = 3.0;
  double cell_radius_m = 100.0;
  double min_distance_m = 10.0;
  double bs_height_m = 10.0;
  double ue_height_m = 1.5;
  double sector_half_width_deg = 180.0;  // 180 = full disc
  double shadowing_std_db = 4.0;
  bool rayleigh_mode = false;

  void validate() const;
};

struct ClusterPath {
  std::complex<double> gain;
  double azimuth = 0.0;
  double elevation = 0.0;
};

// Large-scale state of one UE: fixed for a network layout, while cluster
// gains are redrawn per block-fading slot.
struct UeLayout {
  double distance_m = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  double large_scale_gain = 1.0;  // amplitude
  std::vector<double> cluster_azimuth;
  std::vector<double> cluster_elevation;
};

// Element (r, c), index r * cols + c, has phase
// 2 pi d (c sin(az) cos(el) + r sin(el)).
ChannelVector steering_vector(const ArrayGeometry& geometry, double azimuth_rad,
                              double elevation_rad);

// h = large_scale_gain * sum_c gain_c a(az_c, el_c)
ChannelVector compose_channel(const ArrayGeometry& geometry, double large_scale_gain,
                              std::span<const ClusterPath> clusters);

class ChannelModel {
 public:
  ChannelModel(ArrayGeometry geometry, ChannelModelConfig config);

  const ArrayGeometry& geometry() const { return geometry_; }
  const ChannelModelConfig& config() const { return config_; }
  // Constant that puts the median of |h|^2/N at 1.
  double gain_normalization() const { return normalization_; }

  UeLayout draw_layout(RngStream& rng) const;
  // In rayleigh_mode the layout is ignored and entries are i.i.d. CN(0, 1).
  ChannelVector realize(const UeLayout& layout, RngStream& rng) const;
  // Fresh layout plus realization; in rayleigh_mode, i.i.d. CN(0, 1) entries.
  ChannelVector generate(RngStream& rng) const;

 private:
  UeLayout draw_layout_unnormalized(RngStream& rng) const;

  ArrayGeometry geometry_;
  ChannelModelConfig config_;
  double normalization_ = 1.0;
};

}  // namespace selfnom::channel
