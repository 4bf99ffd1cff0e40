#pragma once

#include <algorithm>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// Per-class instance counts with fractions and the max/min class ratio.
struct ClassBalance {
  std::map<std::string, std::size_t> counts;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [label, c] : counts) n += c;
    return n;
  }

  double fraction(const std::string& label) const {
    const auto it = counts.find(label);
    const std::size_t n = total();
    return (it == counts.end() || n == 0)
               ? 0.0
               : static_cast<double>(it->second) / static_cast<double>(n);
  }

  /// Largest class count over smallest (1.0 when perfectly balanced;
  /// infinity when some present class has count 0 is impossible since
  /// absent classes are not counted).
  double imbalance_ratio() const {
    std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
    for (const auto& [label, c] : counts) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    if (counts.empty() || lo == 0) return 0.0;
    return static_cast<double>(hi) / static_cast<double>(lo);
  }
};

inline ClassBalance class_balance(const std::vector<Box3D>& boxes) {
  ClassBalance balance;
  for (const auto& b : boxes) ++balance.counts[b.class_label];
  return balance;
}

/// Count deltas per class between an augmented and an original set.
inline std::map<std::string, long> balance_delta(const ClassBalance& augmented,
                                                 const ClassBalance& original) {
  std::map<std::string, long> delta;
  for (const auto& [label, c] : augmented.counts)
    delta[label] = static_cast<long>(c);
  for (const auto& [label, c] : original.counts)
    delta[label] -= static_cast<long>(c);
  return delta;
}

inline void print_class_balance(std::ostream& out, const ClassBalance& balance,
                                const ClassBalance* original = nullptr) {
  out << "class count fraction\n";
  out << std::setprecision(6);
  for (const auto& [label, c] : balance.counts)
    out << label << ' ' << c << ' ' << balance.fraction(label) << '\n';
  out << "total " << balance.total() << '\n';
  out << "imbalance_ratio " << balance.imbalance_ratio() << '\n';
  if (original) {
    out << "delta_vs_original\n";
    for (const auto& [label, d] : balance_delta(balance, *original))
      out << label << ' ' << (d >= 0 ? "+" : "") << d << '\n';
  }
}

}  // namespace lidaraug
