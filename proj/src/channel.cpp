#include "risfair/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "risfair/linalg.hpp"

namespace risfair {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(seed ^ splitmix64(stream))) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::angle() { return 2.0 * std::numbers::pi * uniform(); }

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

Complex Rng::complex_gaussian() {
  const double re = gaussian();
  const double im = gaussian();
  return Complex(re, im) / std::sqrt(2.0);
}

void PathLossParams::validate() const {
  auto in_range = [](double e) { return e >= 1.5 && e <= 6.0; };
  if (!in_range(exponent_bs_user) || !in_range(exponent_bs_ris) ||
      !in_range(exponent_ris_user))
    throw std::invalid_argument("PathLossParams: exponents must lie in [1.5, 6]");
  if (reference_loss_db < 0.0)
    throw std::invalid_argument("PathLossParams: reference_loss_db must be >= 0");
}

double PathLossParams::gain(double distance_m, double exponent) const {
  const double d = std::max(distance_m, 1.0);
  const double loss_db = reference_loss_db + 10.0 * exponent * std::log10(d);
  return std::pow(10.0, -loss_db / 10.0);
}

NoiseModel NoiseModel::make(double bandwidth_hz, double psd_dbm_per_hz) {
  NoiseModel nm;
  nm.bandwidth_hz = bandwidth_hz;
  nm.psd_dbm_per_hz = psd_dbm_per_hz;
  nm.sigma2_watts = noise_power(bandwidth_hz, psd_dbm_per_hz);
  return nm;
}

void ChannelSet::validate() const {
  if (G.cols() != h_direct.rows())
    throw std::invalid_argument("ChannelSet: G cols must match BS antenna count");
  if (G.rows() != h_reflect.rows())
    throw std::invalid_argument("ChannelSet: G rows must match RIS element count");
  if (h_direct.cols() != h_reflect.cols())
    throw std::invalid_argument("ChannelSet: user count mismatch");
  require_finite(G, "ChannelSet.G");
  require_finite(h_direct, "ChannelSet.h_direct");
  require_finite(h_reflect, "ChannelSet.h_reflect");
}

std::vector<Eigen::Vector2d> place_users(std::uint64_t seed, Index k,
                                         const Eigen::Vector2d& center,
                                         double radius_m) {
  if (radius_m < 0.0) throw std::invalid_argument("place_users: radius must be >= 0");
  Rng rng(seed, /*stream=*/1);
  std::vector<Eigen::Vector2d> users;
  users.reserve(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const double r = radius_m * std::sqrt(rng.uniform());
    const double th = rng.angle();
    users.emplace_back(center.x() + r * std::cos(th), center.y() + r * std::sin(th));
  }
  return users;
}

double noise_power(double bandwidth_hz, double psd_dbm_per_hz) {
  if (bandwidth_hz <= 0.0)
    throw std::invalid_argument("noise_power: bandwidth must be > 0");
  const double dbm = psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz);
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

ChannelSet sample_channels(std::uint64_t seed, const Geometry& geometry,
                           const PathLossParams& pl, Index m, Index n, Index k) {
  pl.validate();
  if (static_cast<Index>(geometry.user_positions.size()) != k)
    throw std::invalid_argument("sample_channels: geometry has wrong user count");
  if (geometry.ris_distance() <= 0.0)
    throw std::invalid_argument("sample_channels: RIS distance D must be > 0");

  // Separate substreams per link family so the direct channels are identical
  // across sweeps of N or D for the same seed (common random numbers pair the
  // comparisons of interest).
  Rng rng_direct(seed, /*stream=*/2);
  Rng rng_g(seed, /*stream=*/3);
  Rng rng_reflect(seed, /*stream=*/4);

  ChannelSet ch;
  const double d_br = (geometry.ris_position - geometry.bs_position).norm();
  const double amp_br = std::sqrt(pl.gain(d_br, pl.exponent_bs_ris));
  ch.G.resize(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) ch.G(i, j) = amp_br * rng_g.complex_gaussian();

  ch.h_direct.resize(m, k);
  ch.h_reflect.resize(n, k);
  for (Index u = 0; u < k; ++u) {
    const auto& pos = geometry.user_positions[static_cast<std::size_t>(u)];
    const double amp_du =
        std::sqrt(pl.gain((pos - geometry.bs_position).norm(), pl.exponent_bs_user));
    const double amp_ru =
        std::sqrt(pl.gain((pos - geometry.ris_position).norm(), pl.exponent_ris_user));
    for (Index i = 0; i < m; ++i)
      ch.h_direct(i, u) = amp_du * rng_direct.complex_gaussian();
    for (Index i = 0; i < n; ++i)
      ch.h_reflect(i, u) = amp_ru * rng_reflect.complex_gaussian();
  }
  ch.validate();
  return ch;
}

}  // namespace risfair
