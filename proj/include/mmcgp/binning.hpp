#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mmcgp {

/// Equal-width partition of the output range [lo, hi] into m half-open bins
/// [lo + i*width, lo + (i+1)*width). The right end hi belongs to the last bin.
class Binning {
 public:
  Binning(double lo, double hi, int m);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int bins() const { return m_; }
  double width() const { return delta_; }

  double lower_edge(int i) const { return lo_ + i * delta_; }
  double upper_edge(int i) const { return i + 1 == m_ ? hi_ : lo_ + (i + 1) * delta_; }
  double center(int i) const { return lo_ + (i + 0.5) * delta_; }

  bool operator==(const Binning&) const = default;

 private:
  double lo_;
  double hi_;
  int m_;
  double delta_;
};

/// Index of the bin containing y, or nullopt outside [lo, hi].
/// Throws ArgumentError for non-finite y.
std::optional<int> bin_index(const Binning& b, double y);

/// Per-bin counts with separate overflow buckets below lo and above hi.
struct Histogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t overflow_low = 0;
  std::uint64_t overflow_high = 0;

  explicit Histogram(int m = 0) : counts(static_cast<std::size_t>(m), 0) {}

  void add(const Binning& b, double y);
  bool operator==(const Histogram&) const = default;
};

Histogram tally(const Binning& b, std::span<const double> ys);

}  // namespace mmcgp
