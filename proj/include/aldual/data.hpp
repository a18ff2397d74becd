#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aldual/problem.hpp"

namespace aldual {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ColumnRole { kFeature, kProtected, kLabel };
enum class Encoding { kNumeric, kBinary, kCategorical };

/**
 * One source column. Binary columns accept "0"/"1", or the two tokens in
 * `categories` (first ↦ 0). Categorical columns are one-hot encoded over
 * `categories`; the first category is the reference level.
 */
struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::kFeature;
  Encoding encoding = Encoding::kNumeric;
  std::vector<std::string> categories;
};

struct DatasetSchema {
  std::vector<ColumnSpec> columns;

  /// Exactly one binary label column; at least one protected column when
  /// `require_protected`.
  void validate(bool require_protected = false) const;
};

/// Encoded column of the feature block or the protected block.
struct EncodedColumn {
  std::string name;
  /// Index of the source column in the schema.
  std::size_t source = 0;
  /// Category this indicator column represents (categorical only).
  std::string category;
};

/// Per-column z-scoring; non-numeric columns pass through (mean 0, scale 1).
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& raw, const std::vector<bool>& numeric);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
};

/**
 * Rows are samples. `features` holds the standardized x̃ block, `raw_features`
 * the same columns before z-scoring, `protected_attrs` the z block (0/1
 * indicators, never standardized).
 */
struct TabularDataset {
  DatasetSchema schema;
  Eigen::MatrixXd raw_features;
  Eigen::MatrixXd features;
  Eigen::MatrixXd protected_attrs;
  Eigen::VectorXi labels;
  std::vector<EncodedColumn> feature_columns;
  std::vector<EncodedColumn> protected_columns;
  std::vector<bool> numeric_feature;
  Standardizer standardizer;
  std::string split = "all";
  std::size_t dropped_rows = 0;
  std::map<std::string, std::string> metadata;

  Eigen::Index rows() const { return labels.size(); }
  /// Model inputs [x̃, z] as columns (input_width × N).
  Eigen::MatrixXd model_inputs() const;
  /// Same, with the protected block replaced.
  Eigen::MatrixXd model_inputs(const Eigen::MatrixXd& protected_block) const;
  Eigen::Index input_width() const { return features.cols() + protected_attrs.cols(); }

  /// Source-column values of row r, decoded back from the encoding.
  std::vector<std::string> decode_row(Eigen::Index r) const;
  /// Copy restricted to the given rows (standardizer unchanged).
  TabularDataset subset(const std::vector<Eigen::Index>& rows) const;
  /// Refit the standardizer on this dataset's raw features.
  void refit_standardizer();
  void restandardize(const Standardizer& s);
};

DatasetSchema load_schema_json(const std::string& path);

/// Loads a headered CSV, encodes it per schema and z-scores numeric features
/// over all loaded rows. Rows with a missing cell are dropped and counted.
TabularDataset load_csv(const std::string& path, const DatasetSchema& schema);
TabularDataset parse_csv(std::istream& in, const DatasetSchema& schema);

/// Seeded shuffle then split; the train standardizer is applied to both sides.
std::pair<TabularDataset, TabularDataset> train_test_split(const TabularDataset& data,
                                                           double fraction,
                                                           std::uint64_t seed);

/**
 * Synthetic testbed with one binary protected column "group". Features
 * x1 = s·(2z−1) + ε₁, x2, x3 ~ N(0,1), x4 = 0.5·x2 + ε₄; labels are
 * Bernoulli(σ(1.2·x2 − 0.8·x3 + 0.5·x1 + 1.5·s·(2z−1))) with s the bias
 * strength. With s = 0 the protected bit is independent of everything else.
 */
TabularDataset synthesize_biased(std::size_t n, std::uint64_t seed,
                                 double bias_strength);

}  // namespace aldual
