#pragma once

#include <string>
#include <vector>

#include "aircran/rng.hpp"
#include "aircran/types.hpp"

namespace aircran {

struct GeometryParams {
  double inner_radius = 100.0;  // meters
  double outer_radius = 500.0;
};

struct Placements {
  std::vector<Eigen::Vector2d> device_positions;  // K points
  std::vector<Eigen::Vector2d> rrh_positions;     // M points
};

struct PcaBasis {
  MatrixXd U;  // S x D, orthonormal columns, eigenvalue order non-increasing
  VectorXd eigenvalues;            // top D
  double explained_variance_ratio = 0.0;  // in (0, 1]
};

struct LabeledFeatures {
  std::vector<int> labels;  // n entries, values in 0..L-1
  MatrixXd features;        // n x S
};

/// Devices and RRHs uniform over the annulus (uniform angle, inverse-CDF
/// radius for uniform area density).
Placements sample_geometry(const SystemConfig& cfg, const GeometryParams& geo,
                           Rng& rng);

/// Path-loss amplitude for a distance in meters: 10^(-pl/20) with
/// pl = 30.6 + 36.7 log10(d) dB.
double path_loss_amplitude(double distance_m);

/// i.i.d. standard complex Gaussian fading per antenna, scaled by the
/// path-loss amplitude of the device-RRH distance.
ChannelSet generate_channels(const Placements& placements,
                             const SystemConfig& cfg, Rng& rng);

/// Synthetic Gaussian-mixture statistics: means i.i.d. N(0,1) rescaled so the
/// average pairwise squared distance per dimension equals separation^2;
/// variances log-uniform in [0.5, 2].
FeatureStatistics synthesize_feature_statistics(int L, int D, double separation,
                                                Rng& rng);

/// Top-D principal eigenvectors of the sample covariance (cyclic Jacobi).
/// Throws std::invalid_argument reporting the achievable dimension when the
/// covariance rank is below D.
PcaBasis fit_pca(const MatrixXd& data, int D);

MatrixXd pca_project(const PcaBasis& basis, const MatrixXd& data);

/// Plug-in mixture estimator: per-class sample means, pooled within-class
/// per-dimension variance (floored at 1e-9). Accumulation order is fixed by
/// sorting rows, so the result is independent of input order.
FeatureStatistics fit_mixture(const LabeledFeatures& data, int L);

/// CSV with header `label,f1,...,fS`; no missing values.
LabeledFeatures load_labeled_csv(const std::string& path);

}  // namespace aircran
