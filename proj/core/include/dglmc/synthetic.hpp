#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "dglmc/model.hpp"

namespace dglmc {

struct SyntheticDataset {
  std::string kind;  // "gaussian" or "logistic"
  ShardedDataset data;
  VectorXd theta_gen;  // generating parameter (unit norm)
  int dim = 0;
  long n = 0;
  int n_shards = 0;
  std::uint64_t seed = 0;
  double like_var = 1.0;  // gaussian observation variance (isotropic)
};

/// Draws a dataset deterministically from (kind, d, n, b, seed).
/// gaussian: y_j = theta_gen + sqrt(like_var) * noise. logistic: standardized
/// N(0,1) covariates, Bernoulli labels with success probability
/// sigmoid(x_j . theta_gen).
SyntheticDataset generate_dataset(const std::string& kind, int dim, long n,
                                  int n_shards, std::uint64_t seed,
                                  double like_var = 1.0);

/// Writes shard_1.csv .. shard_b.csv plus dataset_meta.cfg into out_dir.
/// Shard files carry a header (`y1,...,yd` gaussian, `y,x1,...,xd` logistic)
/// and are byte-identical for identical inputs.
void write_dataset(const SyntheticDataset& dataset, const std::string& out_dir);

/// Reads a dataset written by write_dataset. The shard headers determine the
/// kind; dataset_meta.cfg restores the generating parameter when present.
SyntheticDataset load_dataset(const std::string& dir);

}  // namespace dglmc
