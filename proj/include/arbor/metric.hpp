#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace arbor {

/// Relative triangle/symmetry tolerance: 1e-9 per unit of diameter.
inline constexpr double kMetricTolerance = 1e-9;

/// Finite metric space standing in for a compact metric space.
/// Points are indices 0..n-1; distances in a row-major n x n matrix.
class FiniteCompactum {
public:
  FiniteCompactum() = default;
  FiniteCompactum(std::size_t n, std::vector<double> dist);

  static FiniteCompactum from_points_2d(const std::vector<std::pair<double, double>>& pts);

  std::size_t size() const { return n_; }
  double dist(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  void set_dist(std::size_t i, std::size_t j, double v) { d_[i * n_ + j] = d_[j * n_ + i] = v; }
  const std::vector<double>& raw() const { return d_; }

  double diameter() const;
  /// Max distance within a point subset.
  double diameter_of(const std::vector<std::size_t>& subset) const;

  /// Claimed sampling density; metadata only.
  double resolution = 0.0;

  /// Optional coordinates (gallery spaces); empty or one entry per point.
  std::vector<std::pair<double, double>> coords;

  /// Restriction to a subset (sorted, deduplicated internally); coords carried.
  FiniteCompactum restrict_to(std::vector<std::size_t> subset) const;

private:
  std::size_t n_ = 0;
  std::vector<double> d_;
  mutable double diam_cache_ = -1.0;
};

/// Point subset of a named compactum; the compactum is referenced by the
/// caller's context, this only carries the indices.
using PointSet = std::vector<std::size_t>;

struct MetricViolation {
  std::string kind;  // "diagonal" | "symmetry" | "positivity" | "triangle"
  std::size_t i = 0, j = 0, k = 0;
  double amount = 0.0;
};

struct MetricReport {
  std::vector<MetricViolation> violations;
  bool sampled = false;  // true when triangle check was subsampled
  bool ok() const { return violations.empty(); }
};

/// Checks diag/symmetry/positivity everywhere and the triangle inequality
/// exhaustively up to `max_triples` (deterministic subsample beyond).
MetricReport validate_metric(const FiniteCompactum& m, double tolerance = kMetricTolerance,
                             std::uint64_t max_triples = 20'000'000);

/// Hausdorff distance between two nonempty subsets of one compactum.
double hausdorff(const FiniteCompactum& m, const PointSet& a, const PointSet& b);

/// Nullity profile: for each ladder value eps, the number of family members
/// with diameter strictly greater than eps.
struct NullityProfile {
  std::vector<double> ladder;
  std::vector<std::size_t> counts;
};

/// Default ladder: diam * 2^-k for k = 0..20.
std::vector<double> default_ladder(double diam, int levels = 21);

NullityProfile nullity_profile(const FiniteCompactum& m, const std::vector<PointSet>& family,
                               std::vector<double> ladder = {});

/// Result of a chain quotient: classes and the quotient compactum.
struct Quotient {
  FiniteCompactum space;
  std::vector<std::vector<std::size_t>> classes;   // class -> original points (sorted)
  std::vector<std::size_t> class_of;               // original point -> class
};

/// Chain (shortest-path) quotient metric: identified points connect at cost
/// zero, all original distances are edge weights. Throws Error if the result
/// degenerates (two distinct classes at distance ~0) or is not a metric.
Quotient quotient_metric(const FiniteCompactum& m,
                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// Correspondence between two compacta: surjective onto both point sets.
struct Correspondence {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

bool is_surjective(const Correspondence& r, std::size_t nx, std::size_t ny);

/// Half the distortion of the correspondence; an upper bound for the
/// Gromov-Hausdorff distance. Throws on a non-surjective correspondence.
double gh_upper(const FiniteCompactum& x, const FiniteCompactum& y, const Correspondence& r);

/// Deterministic surjective correspondence: mutual nearest matching on
/// coordinates when both sides carry them, else farthest-point orderings
/// paired by rank.
Correspondence greedy_correspondence(const FiniteCompactum& x, const FiniteCompactum& y);

}  // namespace arbor
