#include "mmcgp/binning.hpp"

#include <cmath>

#include "mmcgp/errors.hpp"

namespace mmcgp {

Binning::Binning(double lo, double hi, int m) : lo_(lo), hi_(hi), m_(m) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ArgumentError("Binning: require finite lo < hi");
  }
  if (m <= 0) throw ArgumentError("Binning: bin count must be positive");
  delta_ = (hi - lo) / m;
}

std::optional<int> bin_index(const Binning& b, double y) {
  if (!std::isfinite(y)) throw ArgumentError("bin_index: non-finite value");
  if (y < b.lo() || y > b.hi()) return std::nullopt;
  if (y == b.hi()) return b.bins() - 1;
  auto i = static_cast<int>(std::floor((y - b.lo()) / b.width()));
  // The quotient can land one bin off near an edge; settle it against the
  // edges as the class defines them.
  if (i >= b.bins()) i = b.bins() - 1;
  if (i < 0) i = 0;
  if (y < b.lower_edge(i)) --i;
  else if (y >= b.upper_edge(i) && i + 1 < b.bins()) ++i;
  return i;
}

void Histogram::add(const Binning& b, double y) {
  const auto i = bin_index(b, y);
  ++total;
  if (i) {
    ++counts[static_cast<std::size_t>(*i)];
  } else if (y < b.lo()) {
    ++overflow_low;
  } else {
    ++overflow_high;
  }
}

Histogram tally(const Binning& b, std::span<const double> ys) {
  Histogram h(b.bins());
  for (double y : ys) h.add(b, y);
  return h;
}

}  // namespace mmcgp
