#include "afdm/constellation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace afdm {

namespace {

int axis_level(double amplitude, int levels, double scale) {
  // amplitude = scale * (levels - 1 - 2k)
  const double k = std::round((levels - 1 - amplitude / scale) / 2.0);
  return static_cast<int>(std::clamp(k, 0.0, static_cast<double>(levels - 1)));
}

}  // namespace

Constellation::Constellation(int order) : order_(order) {
  if (order < 2 || !std::has_single_bit(static_cast<unsigned>(order)))
    throw std::invalid_argument("Constellation: order must be a power of two");
  bits_ = std::countr_zero(static_cast<unsigned>(order));
  if (order != 2 && bits_ % 2 != 0)
    throw std::invalid_argument("Constellation: only BPSK and square QAM are supported");

  axis_levels_ = order == 2 ? 2 : (1 << (bits_ / 2));
  const int L = axis_levels_;
  const double mean_energy = order == 2 ? 1.0 : 2.0 * (L * L - 1) / 3.0;
  scale_ = 1.0 / std::sqrt(mean_energy);

  level_to_axis_bits_.resize(static_cast<std::size_t>(L));
  axis_bits_to_level_.resize(static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) {
    const int gray = k ^ (k >> 1);
    level_to_axis_bits_[static_cast<std::size_t>(k)] = gray;
    axis_bits_to_level_[static_cast<std::size_t>(gray)] = k;
  }

  points_.resize(static_cast<std::size_t>(order));
  for (int label = 0; label < order; ++label) {
    if (order == 2) {
      const int k = axis_bits_to_level_[static_cast<std::size_t>(label)];
      points_[static_cast<std::size_t>(label)] = cd(scale_ * (L - 1 - 2 * k), 0.0);
    } else {
      const int half = bits_ / 2;
      const int ib = label >> half;
      const int qb = label & ((1 << half) - 1);
      const int ki = axis_bits_to_level_[static_cast<std::size_t>(ib)];
      const int kq = axis_bits_to_level_[static_cast<std::size_t>(qb)];
      points_[static_cast<std::size_t>(label)] = cd(scale_ * (L - 1 - 2 * ki), scale_ * (L - 1 - 2 * kq));
    }
  }
}

int Constellation::nearest(cd sample) const {
  const int ki = axis_level(sample.real(), axis_levels_, scale_);
  if (order_ == 2) return level_to_axis_bits_[static_cast<std::size_t>(ki)];
  const int kq = axis_level(sample.imag(), axis_levels_, scale_);
  const int half = bits_ / 2;
  return (level_to_axis_bits_[static_cast<std::size_t>(ki)] << half) |
         level_to_axis_bits_[static_cast<std::size_t>(kq)];
}

CVector Constellation::map_bits(std::span<const std::uint8_t> bits) const {
  if (bits.size() % static_cast<std::size_t>(bits_) != 0)
    throw std::invalid_argument("Constellation::map_bits: bit count not a multiple of log2(order)");
  const auto n = static_cast<Index>(bits.size() / static_cast<std::size_t>(bits_));
  CVector out(n);
  for (Index i = 0; i < n; ++i) {
    int label = 0;
    for (int b = 0; b < bits_; ++b)
      label = (label << 1) | (bits[static_cast<std::size_t>(i * bits_ + b)] & 1);
    out(i) = points_[static_cast<std::size_t>(label)];
  }
  return out;
}

std::vector<std::uint8_t> Constellation::demap(const CVector& symbols) const {
  std::vector<int> labels(static_cast<std::size_t>(symbols.size()));
  for (Index i = 0; i < symbols.size(); ++i) labels[static_cast<std::size_t>(i)] = nearest(symbols(i));
  return bits_from_labels(labels);
}

CVector Constellation::symbols_from_labels(std::span<const int> labels) const {
  CVector out(static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) out(static_cast<Index>(i)) = point(labels[i]);
  return out;
}

std::vector<std::uint8_t> Constellation::bits_from_labels(std::span<const int> labels) const {
  std::vector<std::uint8_t> bits;
  bits.reserve(labels.size() * static_cast<std::size_t>(bits_));
  for (int label : labels)
    for (int b = bits_ - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((label >> b) & 1));
  return bits;
}

}  // namespace afdm
