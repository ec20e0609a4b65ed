#include "aircran/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace aircran {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kVarianceFloor = 1e-9;

Eigen::Vector2d sample_annulus_point(double inner, double outer, Rng& rng) {
  double r = std::sqrt(inner * inner +
                       rng.uniform() * (outer * outer - inner * inner));
  double theta = 2.0 * kPi * rng.uniform();
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

Placements sample_geometry(const SystemConfig& cfg, const GeometryParams& geo,
                           Rng& rng) {
  if (!(geo.inner_radius > 0.0) || !(geo.inner_radius < geo.outer_radius))
    throw std::invalid_argument(
        "sample_geometry: need 0 < inner_radius < outer_radius");
  Placements p;
  p.device_positions.reserve(static_cast<std::size_t>(cfg.K));
  p.rrh_positions.reserve(static_cast<std::size_t>(cfg.M));
  for (int k = 0; k < cfg.K; ++k)
    p.device_positions.push_back(
        sample_annulus_point(geo.inner_radius, geo.outer_radius, rng));
  for (int m = 0; m < cfg.M; ++m)
    p.rrh_positions.push_back(
        sample_annulus_point(geo.inner_radius, geo.outer_radius, rng));
  return p;
}

double path_loss_amplitude(double distance_m) {
  if (!(distance_m > 0.0))
    throw std::invalid_argument("path_loss_amplitude: distance must be > 0");
  double pl_db = 30.6 + 36.7 * std::log10(distance_m);
  return std::pow(10.0, -pl_db / 20.0);
}

ChannelSet generate_channels(const Placements& placements,
                             const SystemConfig& cfg, Rng& rng) {
  ChannelSet ch;
  ch.M = cfg.M;
  ch.N = cfg.N;
  ch.h.resize(static_cast<std::size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) {
    VectorXcd hk(cfg.M * cfg.N);
    for (int m = 0; m < cfg.M; ++m) {
      double dist = (placements.device_positions[static_cast<std::size_t>(k)] -
                     placements.rrh_positions[static_cast<std::size_t>(m)])
                        .norm();
      double amp = path_loss_amplitude(dist);
      for (int n = 0; n < cfg.N; ++n)
        hk[m * cfg.N + n] = amp * rng.cnormal(1.0);
    }
    ch.h[static_cast<std::size_t>(k)] = hk;
  }
  return ch;
}

FeatureStatistics synthesize_feature_statistics(int L, int D, double separation,
                                                Rng& rng) {
  if (separation < 0.0)
    throw std::invalid_argument("synthesize_feature_statistics: separation < 0");
  MatrixXd mu(L, D);
  for (int l = 0; l < L; ++l)
    for (int d = 0; d < D; ++d) mu(l, d) = rng.normal();

  // Average pairwise squared distance per dimension.
  double acc = 0.0;
  int pairs = 0;
  for (int l = 0; l < L; ++l)
    for (int lp = l + 1; lp < L; ++lp) {
      acc += (mu.row(l) - mu.row(lp)).squaredNorm();
      ++pairs;
    }
  double mean_per_dim = acc / (static_cast<double>(pairs) * D);
  double scale =
      mean_per_dim > 0.0 ? separation / std::sqrt(mean_per_dim) : 0.0;
  mu *= scale;

  VectorXd var(D);
  double lo = std::log(0.5), hi = std::log(2.0);
  for (int d = 0; d < D; ++d)
    var[d] = std::exp(lo + rng.uniform() * (hi - lo));

  FeatureStatistics stats;
  stats.class_means = mu;
  stats.feature_variances = var;
  return stats;
}

namespace {

// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Stops when the
// off-diagonal Frobenius norm drops below 1e-10 times the matrix norm.
void jacobi_eigen(MatrixXd a, MatrixXd& vectors, VectorXd& values) {
  const int n = static_cast<int>(a.rows());
  vectors = MatrixXd::Identity(n, n);
  double scale = std::max(a.norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(2.0 * off) <= 1e-10 * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        Eigen::JacobiRotation<double> rot(c, -s);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        vectors.applyOnTheRight(p, q, rot);
      }
    }
  }
  values = a.diagonal();
}

}  // namespace

PcaBasis fit_pca(const MatrixXd& data, int D) {
  const int n = static_cast<int>(data.rows());
  const int S = static_cast<int>(data.cols());
  if (n < D || S < D)
    throw std::invalid_argument("fit_pca: need at least D samples and D input "
                                "dimensions");
  Eigen::RowVectorXd mean = data.colwise().mean();
  MatrixXd centered = data.rowwise() - mean;
  MatrixXd cov = centered.transpose() * centered / std::max(1, n - 1);

  MatrixXd vecs;
  VectorXd vals;
  jacobi_eigen(cov, vecs, vals);

  std::vector<int> order(static_cast<std::size_t>(S));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return vals[a] > vals[b]; });

  double total = std::max(vals.sum(), 0.0);
  double lead = std::max(vals[order[0]], 0.0);
  int rank = 0;
  for (int i = 0; i < S; ++i)
    if (vals[order[static_cast<std::size_t>(i)]] > 1e-12 * std::max(lead, 1e-300))
      ++rank;
  if (rank < D)
    throw std::invalid_argument(
        "fit_pca: covariance rank " + std::to_string(rank) +
        " is below the requested dimension " + std::to_string(D));

  PcaBasis basis;
  basis.U.resize(S, D);
  basis.eigenvalues.resize(D);
  double kept = 0.0;
  for (int j = 0; j < D; ++j) {
    basis.U.col(j) = vecs.col(order[static_cast<std::size_t>(j)]);
    basis.eigenvalues[j] = vals[order[static_cast<std::size_t>(j)]];
    kept += basis.eigenvalues[j];
  }
  basis.explained_variance_ratio = total > 0.0 ? kept / total : 1.0;
  return basis;
}

MatrixXd pca_project(const PcaBasis& basis, const MatrixXd& data) {
  return data * basis.U;
}

FeatureStatistics fit_mixture(const LabeledFeatures& data, int L) {
  const int n = static_cast<int>(data.features.rows());
  const int D = static_cast<int>(data.features.cols());
  if (static_cast<int>(data.labels.size()) != n)
    throw std::invalid_argument("fit_mixture: label/feature row mismatch");

  // Sort row indices by (label, feature row) so accumulation order does not
  // depend on input order.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (data.labels[static_cast<std::size_t>(a)] !=
        data.labels[static_cast<std::size_t>(b)])
      return data.labels[static_cast<std::size_t>(a)] <
             data.labels[static_cast<std::size_t>(b)];
    for (int d = 0; d < D; ++d) {
      if (data.features(a, d) != data.features(b, d))
        return data.features(a, d) < data.features(b, d);
    }
    return a < b;
  });

  MatrixXd mu = MatrixXd::Zero(L, D);
  std::vector<int> counts(static_cast<std::size_t>(L), 0);
  for (int idx : order) {
    int l = data.labels[static_cast<std::size_t>(idx)];
    if (l < 0 || l >= L)
      throw std::invalid_argument("fit_mixture: label out of range");
    mu.row(l) += data.features.row(idx);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int l = 0; l < L; ++l) {
    if (counts[static_cast<std::size_t>(l)] < 2)
      throw std::invalid_argument("fit_mixture: class " + std::to_string(l) +
                                  " has fewer than 2 samples");
    mu.row(l) /= static_cast<double>(counts[static_cast<std::size_t>(l)]);
  }

  VectorXd var = VectorXd::Zero(D);
  for (int idx : order) {
    int l = data.labels[static_cast<std::size_t>(idx)];
    Eigen::RowVectorXd diff = data.features.row(idx) - mu.row(l);
    var += diff.cwiseProduct(diff).transpose();
  }
  var /= static_cast<double>(n - L);  // pooled within-class variance
  for (int d = 0; d < D; ++d) var[d] = std::max(var[d], kVarianceFloor);

  FeatureStatistics stats;
  stats.class_means = mu;
  stats.feature_variances = var;
  return stats;
}

LabeledFeatures load_labeled_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("CSV '" + path + "': empty file");
  // Header: label,f1,...,fS
  int S = -1;
  {
    std::stringstream ss(line);
    std::string col;
    int ncol = 0;
    while (std::getline(ss, col, ',')) ++ncol;
    if (ncol < 2)
      throw std::runtime_error("CSV '" + path + "': need label + features");
    S = ncol - 1;
  }
  std::vector<int> labels;
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ','))
      throw std::runtime_error("CSV line " + std::to_string(lineno) +
                               ": missing label");
    labels.push_back(static_cast<int>(std::strtol(cell.c_str(), nullptr, 10)));
    int got = 0;
    while (std::getline(ss, cell, ',')) {
      if (cell.empty())
        throw std::runtime_error("CSV line " + std::to_string(lineno) +
                                 ": missing value");
      values.push_back(std::strtod(cell.c_str(), nullptr));
      ++got;
    }
    if (got != S)
      throw std::runtime_error("CSV line " + std::to_string(lineno) +
                               ": expected " + std::to_string(S) +
                               " features, got " + std::to_string(got));
  }
  LabeledFeatures out;
  out.labels = std::move(labels);
  const int n = static_cast<int>(out.labels.size());
  out.features = Eigen::Map<MatrixXd>(values.data(), S, n).transpose();
  return out;
}

}  // namespace aircran
