#pragma once

#include "afdm/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace afdm {

/// Unit-energy Gray-mapped BPSK or square QAM.
///
/// Labels are read MSB-first. For square QAM the first half of the label
/// drives the in-phase axis and the second half the quadrature axis; each
/// axis uses binary-reflected Gray PAM with bit pattern 0...0 on the most
/// positive level. QPSK therefore maps 00 -> (1 + i)/sqrt(2),
/// 01 -> (1 - i)/sqrt(2), 10 -> (-1 + i)/sqrt(2), 11 -> (-1 - i)/sqrt(2);
/// BPSK maps 0 -> +1 and 1 -> -1.
class Constellation {
 public:
  /// Throws std::invalid_argument unless order is 2 or an even power of two.
  explicit Constellation(int order);

  static Constellation bpsk() { return Constellation(2); }
  static Constellation qpsk() { return Constellation(4); }

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_; }
  const std::vector<cd>& points() const { return points_; }
  cd point(int label) const { return points_.at(static_cast<std::size_t>(label)); }

  /// Label of the closest point.
  int nearest(cd sample) const;

  /// bits.size() must be a multiple of bits_per_symbol().
  CVector map_bits(std::span<const std::uint8_t> bits) const;
  std::vector<std::uint8_t> demap(const CVector& symbols) const;

  CVector symbols_from_labels(std::span<const int> labels) const;
  std::vector<std::uint8_t> bits_from_labels(std::span<const int> labels) const;

 private:
  int order_;
  int bits_;
  int axis_levels_;  // per-axis PAM levels (BPSK: 2 on the real axis only)
  double scale_;
  std::vector<cd> points_;
  std::vector<int> level_to_axis_bits_;  // level index -> axis bit pattern
  std::vector<int> axis_bits_to_level_;
};

}  // namespace afdm
