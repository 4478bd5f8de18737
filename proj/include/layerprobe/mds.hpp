#pragma once

// Multidimensional scaling: classical (Torgerson) spectral embedding and
// SMACOF stress majorization.

#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "layerprobe/geometry.hpp"

namespace layerprobe::mds {

using geometry::PointMatrix;

/// Symmetric, zero-diagonal, nonnegative n x n matrix.
class DistanceMatrix {
 public:
  /// Throws ValidationError if the matrix is not square, not symmetric within
  /// 1e-12 (relative to its largest entry), has a nonzero diagonal, or has a
  /// negative or non-finite entry.
  explicit DistanceMatrix(Eigen::MatrixXd values);

  Eigen::Index size() const noexcept { return values_.rows(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  double operator()(Eigen::Index i, Eigen::Index j) const {
    return values_(i, j);
  }

 private:
  Eigen::MatrixXd values_;
};

enum class Method { classical, smacof };
std::string_view to_string(Method method);

struct MdsResult {
  PointMatrix coordinates;          // n x k, column means 0
  std::vector<double> eigenvalues;  // all n, descending, before clamping
  std::vector<double> stress_trace;  // per-iteration raw stress (smacof)
  Method method = Method::classical;
};

/// Euclidean distances. Each unordered pair is computed once, so the result
/// is exactly symmetric. Throws on NaN input or fewer than 2 points.
DistanceMatrix pairwise_distances(const PointMatrix& points);

/// Double-centers the squared distances and embeds with the top-k
/// eigenpairs. Each output column is flipped so its largest-magnitude entry
/// is positive. Eigenvalues that are negative, or zero up to rounding
/// (below n * eps * largest |eigenvalue|), give zero coordinates.
/// Requires 1 <= k <= n.
MdsResult classical_mds(const DistanceMatrix& dist, Eigen::Index k = 2);

/// Raw stress: sum over i<j of (|x_i - x_j| - delta_ij)^2.
double stress(const DistanceMatrix& dist, const PointMatrix& coords);

struct SmacofOptions {
  int max_iter = 300;
  double tol = 1e-6;
};

/// Guttman-transform iterations from `init`. stress_trace[0] is the stress of
/// `init`; an iteration is accepted only if it does not increase stress, so
/// the trace is nonincreasing. Stops on zero stress, relative decrease below
/// tol, or max_iter accepted updates. Throws DegenerateDataError on an
/// all-zero distance matrix.
MdsResult smacof(const DistanceMatrix& dist, const PointMatrix& init,
                 const SmacofOptions& options = {});

}  // namespace layerprobe::mds
