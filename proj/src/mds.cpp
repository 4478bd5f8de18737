#include "layerprobe/mds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "layerprobe/errors.hpp"

namespace layerprobe::mds {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd values)
    : values_(std::move(values)) {
  const Eigen::Index n = values_.rows();
  if (values_.cols() != n) {
    throw ValidationError("distance matrix must be square");
  }
  if (!values_.allFinite()) {
    throw ValidationError("distance matrix has non-finite entries");
  }
  const double scale = std::max(1.0, n ? values_.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (values_(i, i) != 0.0) {
      throw ValidationError("distance matrix has nonzero diagonal at " +
                            std::to_string(i));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (values_(i, j) < 0.0) {
        throw ValidationError("distance matrix has a negative entry at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (std::abs(values_(i, j) - values_(j, i)) > 1e-12 * scale) {
        throw ValidationError("distance matrix is not symmetric at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

std::string_view to_string(Method method) {
  return method == Method::classical ? "classical" : "smacof";
}

DistanceMatrix pairwise_distances(const PointMatrix& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw DegenerateDataError("pairwise distances need at least 2 points");
  if (points.hasNaN()) throw ValidationError("pairwise distances: NaN in input");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (points.row(i) - points.row(j)).norm();
    }
  }
  return DistanceMatrix(std::move(d));
}

MdsResult classical_mds(const DistanceMatrix& dist, Eigen::Index k) {
  const Eigen::Index n = dist.size();
  if (k < 1 || k > n) {
    throw ValidationError("classical MDS: need 1 <= k <= n (k=" +
                          std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }

  // B = -1/2 J D^2 J, expanded through row/column/grand means of D^2.
  const Eigen::MatrixXd sq = dist.values().array().square().matrix();
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const double grand_mean = row_mean.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - row_mean(j) + grand_mean);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) {
    throw DegenerateDataError("classical MDS: eigendecomposition failed");
  }
  const Eigen::VectorXd& ascending = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();

  MdsResult result;
  result.method = Method::classical;
  result.eigenvalues.assign(ascending.data(), ascending.data() + n);
  std::reverse(result.eigenvalues.begin(), result.eigenvalues.end());

  const double largest = ascending.cwiseAbs().maxCoeff();
  const double floor =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * largest;

  result.coordinates = PointMatrix::Zero(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index src = n - 1 - c;
    const double lambda = ascending(src);
    if (lambda <= floor) continue;
    Eigen::VectorXd column = vectors.col(src) * std::sqrt(lambda);
    column.array() -= column.mean();

    // Sign rule: the largest-magnitude entry (first row among near-ties)
    // is positive.
    const double peak = column.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(column(i)) >= peak * (1.0 - 1e-9)) {
        if (column(i) < 0) column = -column;
        break;
      }
    }
    result.coordinates.col(c) = column;
  }
  return result;
}

double stress(const DistanceMatrix& dist, const PointMatrix& coords) {
  const Eigen::Index n = dist.size();
  if (coords.rows() != n) {
    throw ValidationError("stress: coordinates have " +
                          std::to_string(coords.rows()) + " rows, expected " +
                          std::to_string(n));
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = (coords.row(i) - coords.row(j)).norm() - dist(i, j);
      total += r * r;
    }
  }
  return total;
}

namespace {

PointMatrix guttman_transform(const DistanceMatrix& dist, const PointMatrix& x) {
  const Eigen::Index n = x.rows();
  PointMatrix next = PointMatrix::Zero(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (x.row(i) - x.row(j)).norm();
      const double bij = d > 0.0 ? -dist(i, j) / d : 0.0;
      diag -= bij;
      next.row(i) += bij * x.row(j);
    }
    next.row(i) += diag * x.row(i);
  }
  return next / static_cast<double>(n);
}

}  // namespace

MdsResult smacof(const DistanceMatrix& dist, const PointMatrix& init,
                 const SmacofOptions& options) {
  const Eigen::Index n = dist.size();
  if (init.rows() != n || init.cols() < 1) {
    throw ValidationError("smacof: init must have " + std::to_string(n) +
                          " rows and at least one column");
  }
  if (options.max_iter < 1 || !(options.tol > 0.0)) {
    throw ValidationError("smacof: need max_iter >= 1 and tol > 0");
  }
  if ((dist.values().array() == 0.0).all()) {
    throw DegenerateDataError("smacof: all distances are zero");
  }

  MdsResult result;
  result.method = Method::smacof;
  result.coordinates = init;
  double current = stress(dist, init);
  result.stress_trace.push_back(current);

  for (int it = 0; it < options.max_iter && current > 0.0; ++it) {
    PointMatrix next = guttman_transform(dist, result.coordinates);
    const double s = stress(dist, next);
    // Majorization never increases stress in exact arithmetic; at
    // convergence rounding can, and such a step is discarded.
    if (s > current) break;
    result.coordinates = std::move(next);
    result.stress_trace.push_back(s);
    const double decrease = (current - s) / current;
    current = s;
    if (decrease < options.tol) break;
  }
  return result;
}

}  // namespace layerprobe::mds
