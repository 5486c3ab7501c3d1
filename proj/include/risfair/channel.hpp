#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "risfair/types.hpp"

namespace risfair {

/// Deterministic random stream. Seeding mixes (seed, stream) so that
/// independent substreams can be derived from one trial seed; draws use
/// explicit mappings (not std distributions) so a given seed always produces
/// the same values.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform();
  /// Uniform on [0, 2*pi).
  double angle();
  /// Standard normal (Box-Muller).
  double gaussian();
  /// CN(0,1): unit-variance circularly symmetric complex Gaussian.
  Complex complex_gaussian();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct Geometry {
  Eigen::Vector2d bs_position{0.0, 0.0};
  Eigen::Vector2d ris_position{100.0, 50.0};
  std::vector<Eigen::Vector2d> user_positions;

  /// Horizontal RIS coordinate D, meters.
  double ris_distance() const { return ris_position.x(); }
};

struct PathLossParams {
  double reference_loss_db = 30.0;  // at 1 m
  double exponent_bs_user = 4.6;    // obstructed direct link
  double exponent_bs_ris = 2.2;
  double exponent_ris_user = 2.2;

  void validate() const;
  /// Linear power gain at distance d for the given exponent.
  double gain(double distance_m, double exponent) const;
};

struct NoiseModel {
  double bandwidth_hz = 180e3;
  double psd_dbm_per_hz = -174.0;
  double sigma2_watts = 0.0;

  static NoiseModel make(double bandwidth_hz, double psd_dbm_per_hz);
};

/// One channel realization. Columns index users.
struct ChannelSet {
  ComplexMatrix G;          // N x M, BS -> RIS
  ComplexMatrix h_direct;   // M x K, BS -> user k in column k
  ComplexMatrix h_reflect;  // N x K, RIS -> user k in column k

  Index bs_antennas() const { return h_direct.rows(); }
  Index ris_elements() const { return G.rows(); }
  Index users() const { return h_direct.cols(); }

  ComplexVector direct(Index k) const { return h_direct.col(k); }
  ComplexVector reflect(Index k) const { return h_reflect.col(k); }

  void validate() const;
};

/// K points uniform on the disc (polar sampling with sqrt radius),
/// deterministic per seed.
std::vector<Eigen::Vector2d> place_users(std::uint64_t seed, Index k,
                                         const Eigen::Vector2d& center, double radius_m);

/// sigma^2 [W] = 10^((psd_dbm_per_hz + 10 log10(bandwidth) - 30)/10)
double noise_power(double bandwidth_hz, double psd_dbm_per_hz);

/// Per-link coefficient = sqrt(linear gain) * CN(0,1), i.i.d. across entries;
/// deterministic per seed.
ChannelSet sample_channels(std::uint64_t seed, const Geometry& geometry,
                           const PathLossParams& pl, Index m, Index n, Index k);

}  // namespace risfair
