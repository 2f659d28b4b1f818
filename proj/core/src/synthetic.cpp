#include "dglmc/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "dglmc/config.hpp"
#include "dglmc/csv.hpp"
#include "dglmc/rng.hpp"

namespace dglmc {

namespace {

namespace fs = std::filesystem;

std::vector<Eigen::Index> shard_sizes(long n, int n_shards) {
  std::vector<Eigen::Index> sizes(n_shards);
  const long base = n / n_shards;
  const long extra = n % n_shards;
  for (int i = 0; i < n_shards; ++i)
    sizes[i] = base + (i < extra ? 1 : 0);
  return sizes;
}

std::string shard_path(const std::string& dir, int index_one_based) {
  std::ostringstream out;
  out << dir << "/shard_" << index_one_based << ".csv";
  return out.str();
}

}  // namespace

SyntheticDataset generate_dataset(const std::string& kind, int dim, long n,
                                  int n_shards, std::uint64_t seed,
                                  double like_var) {
  if (kind != "gaussian" && kind != "logistic")
    throw std::invalid_argument("unknown dataset kind '" + kind + "'");
  if (dim < 1) throw std::invalid_argument("dim must be positive");
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (n_shards < 1 || n_shards > n)
    throw std::invalid_argument("shard count must lie in [1, n]");
  if (!(like_var > 0.0))
    throw std::invalid_argument("like_var must be positive");

  SyntheticDataset out;
  out.kind = kind;
  out.dim = dim;
  out.n = n;
  out.n_shards = n_shards;
  out.seed = seed;
  out.like_var = like_var;

  NormalStream theta_stream(seed, 0);
  out.theta_gen = theta_stream.vector(dim);
  const double norm = out.theta_gen.norm();
  if (norm > 0.0) out.theta_gen /= norm;

  MatrixXd rows(n, dim);
  VectorXd labels;
  NormalStream value_stream(seed, 1);
  if (kind == "gaussian") {
    const double sd = std::sqrt(like_var);
    for (long j = 0; j < n; ++j)
      for (int k = 0; k < dim; ++k)
        rows(j, k) = out.theta_gen[k] + sd * value_stream.next();
  } else {
    for (long j = 0; j < n; ++j)
      for (int k = 0; k < dim; ++k) rows(j, k) = value_stream.next();
    // Column standardization keeps every worker's curvature bound moderate.
    for (int k = 0; k < dim; ++k) {
      const double mean = rows.col(k).mean();
      rows.col(k).array() -= mean;
      if (n > 1) {
        const double sd =
            std::sqrt(rows.col(k).squaredNorm() / static_cast<double>(n - 1));
        if (sd > 0.0) rows.col(k) /= sd;
      }
    }
    labels.resize(n);
    PhiloxStream label_stream(seed, 2);
    for (long j = 0; j < n; ++j) {
      const double p =
          1.0 / (1.0 + std::exp(-rows.row(j).dot(out.theta_gen)));
      labels[j] = label_stream.next_unit() < p ? 1.0 : 0.0;
    }
  }

  const auto sizes = shard_sizes(n, n_shards);
  out.data.shards.resize(n_shards);
  out.data.n_total = n;
  out.data.feature_dim = kind == "logistic" ? dim : 0;
  Eigen::Index start = 0;
  for (int i = 0; i < n_shards; ++i) {
    DataShard& shard = out.data.shards[i];
    shard.rows = rows.middleRows(start, sizes[i]);
    if (kind == "logistic") shard.labels = labels.segment(start, sizes[i]);
    start += sizes[i];
  }
  return out;
}

void write_dataset(const SyntheticDataset& dataset,
                   const std::string& out_dir) {
  fs::create_directories(out_dir);
  const bool logistic = dataset.kind == "logistic";

  for (int i = 0; i < dataset.n_shards; ++i) {
    const DataShard& shard = dataset.data.shards[i];
    CsvTable table;
    if (logistic) {
      table.header.push_back("y");
      for (int k = 1; k <= dataset.dim; ++k)
        table.header.push_back("x" + std::to_string(k));
    } else {
      for (int k = 1; k <= dataset.dim; ++k)
        table.header.push_back("y" + std::to_string(k));
    }
    table.rows.reserve(shard.size());
    for (Eigen::Index j = 0; j < shard.size(); ++j) {
      std::vector<std::string> row;
      row.reserve(table.header.size());
      if (logistic) row.push_back(format_g17(shard.labels[j]));
      for (int k = 0; k < dataset.dim; ++k)
        row.push_back(format_g17(shard.rows(j, k)));
      table.rows.push_back(std::move(row));
    }
    write_csv(shard_path(out_dir, i + 1), table);
  }

  ExperimentConfig meta;
  meta.set("dataset.kind", dataset.kind);
  meta.set("dataset.dim", std::to_string(dataset.dim));
  meta.set("dataset.n", std::to_string(dataset.n));
  meta.set("dataset.shards", std::to_string(dataset.n_shards));
  meta.set("dataset.seed", std::to_string(dataset.seed));
  meta.set("dataset.like_var", format_g17(dataset.like_var));
  std::string theta;
  for (int k = 0; k < dataset.dim; ++k) {
    if (k > 0) theta += ",";
    theta += format_g17(dataset.theta_gen[k]);
  }
  meta.set("dataset.theta_gen", theta);
  write_text_file(out_dir + "/dataset_meta.cfg", meta.serialize());
}

SyntheticDataset load_dataset(const std::string& dir) {
  if (!fs::exists(shard_path(dir, 1)))
    throw std::runtime_error("no shard files found in '" + dir + "'");

  SyntheticDataset out;
  std::vector<CsvTable> tables;
  for (int i = 1; fs::exists(shard_path(dir, i)); ++i)
    tables.push_back(read_csv(shard_path(dir, i)));

  const CsvTable& first = tables.front();
  const bool logistic = first.header.front() == "y" && first.header.size() > 1;
  out.kind = logistic ? "logistic" : "gaussian";
  out.dim = static_cast<int>(first.header.size()) - (logistic ? 1 : 0);
  out.n_shards = static_cast<int>(tables.size());
  out.data.feature_dim = logistic ? out.dim : 0;
  out.data.shards.resize(tables.size());

  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].header != first.header)
      throw std::runtime_error("shard headers disagree in '" + dir + "'");
    const MatrixXd m = csv_to_matrix(tables[i]);
    DataShard& shard = out.data.shards[i];
    if (logistic) {
      shard.labels = m.col(0);
      shard.rows = m.rightCols(out.dim);
    } else {
      shard.rows = m;
    }
    out.n += m.rows();
  }
  out.data.n_total = out.n;

  const std::string meta_path = dir + "/dataset_meta.cfg";
  if (fs::exists(meta_path)) {
    const ExperimentConfig meta = ExperimentConfig::parse_file(meta_path);
    if (meta.get_string("dataset.kind") != out.kind)
      throw std::runtime_error("dataset_meta.cfg disagrees with shard headers");
    if (meta.get_long("dataset.shards") != out.n_shards)
      throw std::runtime_error("dataset_meta.cfg shard count mismatch");
    out.seed = meta.get_u64("dataset.seed", 0);
    out.like_var = meta.get_double("dataset.like_var", 1.0);
    const std::vector<double> theta = meta.get_double_list("dataset.theta_gen");
    out.theta_gen =
        Eigen::Map<const VectorXd>(theta.data(),
                                   static_cast<Eigen::Index>(theta.size()));
  }
  return out;
}

}  // namespace dglmc
