#include "aldual/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace aldual {

void DatasetSchema::validate(bool require_protected) const {
  int labels = 0;
  int protected_count = 0;
  std::vector<std::string> seen;
  for (const auto& c : columns) {
    if (c.name.empty()) throw DataError("schema column without a name");
    if (std::find(seen.begin(), seen.end(), c.name) != seen.end())
      throw DataError("duplicate schema column '" + c.name + "'");
    seen.push_back(c.name);
    if (c.role == ColumnRole::kLabel) {
      ++labels;
      if (c.encoding != Encoding::kBinary)
        throw DataError("label column '" + c.name + "' must be binary");
    }
    if (c.role == ColumnRole::kProtected) {
      ++protected_count;
      if (c.encoding == Encoding::kNumeric)
        throw DataError("protected column '" + c.name + "' must be binary or categorical");
    }
    if (c.encoding == Encoding::kBinary && !c.categories.empty() && c.categories.size() != 2)
      throw DataError("binary column '" + c.name + "' needs exactly two tokens");
    if (c.encoding == Encoding::kCategorical && c.categories.size() < 2)
      throw DataError("categorical column '" + c.name + "' needs at least two categories");
  }
  if (labels != 1) throw DataError("schema needs exactly one label column");
  if (require_protected && protected_count == 0)
    throw DataError("schema needs at least one protected column");
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& raw,
                               const std::vector<bool>& numeric) {
  Standardizer s;
  s.mean = Eigen::VectorXd::Zero(raw.cols());
  s.scale = Eigen::VectorXd::Ones(raw.cols());
  if (raw.rows() == 0) return s;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    if (!numeric[static_cast<std::size_t>(j)]) continue;
    CompensatedSum sum;
    for (Eigen::Index r = 0; r < raw.rows(); ++r) sum.add(raw(r, j));
    const double mean = sum.value() / static_cast<double>(raw.rows());
    CompensatedSum sq;
    for (Eigen::Index r = 0; r < raw.rows(); ++r) sq.add((raw(r, j) - mean) * (raw(r, j) - mean));
    const double sd = std::sqrt(sq.value() / static_cast<double>(raw.rows()));
    s.mean(j) = mean;
    s.scale(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& raw) const {
  return (raw.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd TabularDataset::model_inputs() const {
  return model_inputs(protected_attrs);
}

Eigen::MatrixXd TabularDataset::model_inputs(const Eigen::MatrixXd& protected_block) const {
  Eigen::MatrixXd inputs(input_width(), rows());
  inputs.topRows(features.cols()) = features.transpose();
  inputs.bottomRows(protected_block.cols()) = protected_block.transpose();
  return inputs;
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> decode_block(const DatasetSchema& schema,
                                      const std::vector<EncodedColumn>& cols,
                                      const Eigen::RowVectorXd& values,
                                      std::vector<std::string>& out) {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const ColumnSpec& spec = schema.columns[cols[k].source];
    const double v = values(static_cast<Eigen::Index>(k));
    std::string& cell = out[cols[k].source];
    switch (spec.encoding) {
      case Encoding::kNumeric:
        cell = format_number(v);
        break;
      case Encoding::kBinary:
        cell = spec.categories.empty() ? (v != 0.0 ? "1" : "0")
                                       : spec.categories[v != 0.0 ? 1 : 0];
        break;
      case Encoding::kCategorical:
        if (v != 0.0) cell = cols[k].category;
        break;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> TabularDataset::decode_row(Eigen::Index r) const {
  std::vector<std::string> out(schema.columns.size());
  decode_block(schema, feature_columns, raw_features.row(r), out);
  decode_block(schema, protected_columns, protected_attrs.row(r), out);
  for (std::size_t s = 0; s < schema.columns.size(); ++s) {
    const ColumnSpec& spec = schema.columns[s];
    if (spec.role != ColumnRole::kLabel) continue;
    out[s] = spec.categories.empty() ? std::to_string(labels(r))
                                     : spec.categories[static_cast<std::size_t>(labels(r))];
  }
  return out;
}

TabularDataset TabularDataset::subset(const std::vector<Eigen::Index>& rows) const {
  TabularDataset out = *this;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.raw_features.resize(n, raw_features.cols());
  out.features.resize(n, features.cols());
  out.protected_attrs.resize(n, protected_attrs.cols());
  out.labels.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = rows[static_cast<std::size_t>(k)];
    out.raw_features.row(k) = raw_features.row(r);
    out.features.row(k) = features.row(r);
    out.protected_attrs.row(k) = protected_attrs.row(r);
    out.labels(k) = labels(r);
  }
  return out;
}

void TabularDataset::refit_standardizer() {
  restandardize(Standardizer::fit(raw_features, numeric_feature));
}

void TabularDataset::restandardize(const Standardizer& s) {
  standardizer = s;
  features = s.apply(raw_features);
}

namespace {

ColumnRole parse_role(const std::string& s) {
  if (s == "feature") return ColumnRole::kFeature;
  if (s == "protected") return ColumnRole::kProtected;
  if (s == "label") return ColumnRole::kLabel;
  throw DataError("unknown column role '" + s + "'");
}

Encoding parse_encoding(const std::string& s) {
  if (s == "numeric") return Encoding::kNumeric;
  if (s == "binary") return Encoding::kBinary;
  if (s == "categorical" || s == "one-hot") return Encoding::kCategorical;
  throw DataError("unknown column encoding '" + s + "'");
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Comma-separated fields; double quotes protect commas and "" is a literal quote.
std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(trim(field));
  return out;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "?" || cell == "NaN" || cell == "nan";
}

bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

DatasetSchema load_schema_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed schema '" + path + "': " + e.what());
  }
  DatasetSchema schema;
  try {
    for (const auto& c : j.at("columns")) {
      ColumnSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.role = parse_role(c.value("role", std::string("feature")));
      spec.encoding = parse_encoding(c.value("encoding", std::string("numeric")));
      spec.categories = c.value("categories", std::vector<std::string>{});
      schema.columns.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid schema '" + path + "': " + e.what());
  }
  schema.validate();
  return schema;
}

TabularDataset parse_csv(std::istream& in, const DatasetSchema& schema) {
  schema.validate();
  std::string line;
  if (!std::getline(in, line)) throw DataError("no rows: missing header");
  const std::vector<std::string> header = split_line(line);

  std::vector<std::size_t> position(schema.columns.size());
  for (std::size_t s = 0; s < schema.columns.size(); ++s) {
    const auto it = std::find(header.begin(), header.end(), schema.columns[s].name);
    if (it == header.end())
      throw DataError("unknown column '" + schema.columns[s].name + "' (not in header)");
    position[s] = static_cast<std::size_t>(it - header.begin());
  }

  TabularDataset data;
  data.schema = schema;
  for (std::size_t s = 0; s < schema.columns.size(); ++s) {
    const ColumnSpec& spec = schema.columns[s];
    if (spec.role == ColumnRole::kLabel) continue;
    auto& block = spec.role == ColumnRole::kProtected ? data.protected_columns
                                                      : data.feature_columns;
    if (spec.encoding == Encoding::kCategorical) {
      for (const auto& cat : spec.categories) block.push_back({spec.name + "=" + cat, s, cat});
    } else {
      block.push_back({spec.name, s, ""});
    }
    if (spec.role == ColumnRole::kFeature)
      for (std::size_t k = data.numeric_feature.size(); k < data.feature_columns.size(); ++k)
        data.numeric_feature.push_back(spec.encoding == Encoding::kNumeric);
  }

  std::vector<std::vector<double>> feat_rows;
  std::vector<std::vector<double>> prot_rows;
  std::vector<int> label_rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    bool missing = false;
    for (std::size_t s = 0; s < schema.columns.size() && !missing; ++s)
      missing = is_missing(cells[position[s]]);
    if (missing) {
      ++data.dropped_rows;
      continue;
    }

    std::vector<double> feat;
    std::vector<double> prot;
    int label = 0;
    for (std::size_t s = 0; s < schema.columns.size(); ++s) {
      const ColumnSpec& spec = schema.columns[s];
      const std::string& cell = cells[position[s]];
      const auto fail = [&](const std::string& why) {
        return DataError("row " + std::to_string(line_no) + ", column '" + spec.name +
                         "': " + why + " '" + cell + "'");
      };
      std::vector<double> encoded;
      switch (spec.encoding) {
        case Encoding::kNumeric: {
          double v = 0.0;
          if (!parse_double(cell, v)) throw fail("unparseable number");
          encoded.push_back(v);
          break;
        }
        case Encoding::kBinary: {
          double v = -1.0;
          if (spec.categories.empty()) {
            if (!parse_double(cell, v)) throw fail("unparseable value");
          } else {
            for (std::size_t c = 0; c < 2; ++c)
              if (cell == spec.categories[c]) v = static_cast<double>(c);
          }
          if (v != 0.0 && v != 1.0)
            throw fail(spec.role == ColumnRole::kLabel ? "label outside {0,1}"
                                                       : "value outside {0,1}");
          encoded.push_back(v);
          break;
        }
        case Encoding::kCategorical: {
          const auto it = std::find(spec.categories.begin(), spec.categories.end(), cell);
          if (it == spec.categories.end()) throw fail("unknown category");
          encoded.assign(spec.categories.size(), 0.0);
          encoded[static_cast<std::size_t>(it - spec.categories.begin())] = 1.0;
          break;
        }
      }
      if (spec.role == ColumnRole::kLabel) {
        label = static_cast<int>(encoded.front());
      } else {
        auto& dst = spec.role == ColumnRole::kProtected ? prot : feat;
        dst.insert(dst.end(), encoded.begin(), encoded.end());
      }
    }
    feat_rows.push_back(std::move(feat));
    prot_rows.push_back(std::move(prot));
    label_rows.push_back(label);
  }
  if (label_rows.empty()) throw DataError("no rows");

  const auto n = static_cast<Eigen::Index>(label_rows.size());
  data.raw_features.resize(n, static_cast<Eigen::Index>(data.feature_columns.size()));
  data.protected_attrs.resize(n, static_cast<Eigen::Index>(data.protected_columns.size()));
  data.labels.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto k = static_cast<std::size_t>(r);
    for (Eigen::Index j = 0; j < data.raw_features.cols(); ++j)
      data.raw_features(r, j) = feat_rows[k][static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < data.protected_attrs.cols(); ++j)
      data.protected_attrs(r, j) = prot_rows[k][static_cast<std::size_t>(j)];
    data.labels(r) = label_rows[k];
  }
  data.refit_standardizer();
  return data;
}

TabularDataset load_csv(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  TabularDataset data = parse_csv(in, schema);
  data.metadata["source"] = path;
  return data;
}

std::pair<TabularDataset, TabularDataset> train_test_split(const TabularDataset& data,
                                                           double fraction,
                                                           std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw DataError("split fraction must lie strictly between 0 and 1");
  const Eigen::Index n = data.rows();
  const auto n_train = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
  if (n_train <= 0 || n_train >= n)
    throw DataError("degenerate split: " + std::to_string(n_train) + " of " +
                    std::to_string(n) + " rows in train");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::vector<Eigen::Index> train_rows(order.begin(), order.begin() + n_train);
  const std::vector<Eigen::Index> test_rows(order.begin() + n_train, order.end());
  TabularDataset train = data.subset(train_rows);
  TabularDataset test = data.subset(test_rows);
  train.refit_standardizer();
  test.restandardize(train.standardizer);
  train.split = "train";
  test.split = "test";
  return {std::move(train), std::move(test)};
}

TabularDataset synthesize_biased(std::size_t n, std::uint64_t seed, double bias_strength) {
  if (n == 0) throw DataError("synthetic dataset needs n > 0");
  TabularDataset data;
  data.schema.columns = {
      {"x1", ColumnRole::kFeature, Encoding::kNumeric, {}},
      {"x2", ColumnRole::kFeature, Encoding::kNumeric, {}},
      {"x3", ColumnRole::kFeature, Encoding::kNumeric, {}},
      {"x4", ColumnRole::kFeature, Encoding::kNumeric, {}},
      {"group", ColumnRole::kProtected, Encoding::kBinary, {}},
      {"label", ColumnRole::kLabel, Encoding::kBinary, {}},
  };
  for (std::size_t s = 0; s < 4; ++s)
    data.feature_columns.push_back({data.schema.columns[s].name, s, ""});
  data.protected_columns.push_back({"group", 4, ""});
  data.numeric_feature.assign(4, true);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto rows = static_cast<Eigen::Index>(n);
  data.raw_features.resize(rows, 4);
  data.protected_attrs.resize(rows, 1);
  data.labels.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double z = unit(rng) < 0.5 ? 0.0 : 1.0;
    const double sign = 2.0 * z - 1.0;
    const double x1 = bias_strength * sign + normal(rng);
    const double x2 = normal(rng);
    const double x3 = normal(rng);
    const double x4 = 0.5 * x2 + normal(rng);
    const double logit = 1.2 * x2 - 0.8 * x3 + 0.5 * x1 + 1.5 * bias_strength * sign;
    const double prob = 1.0 / (1.0 + std::exp(-logit));
    data.raw_features.row(r) << x1, x2, x3, x4;
    data.protected_attrs(r, 0) = z;
    data.labels(r) = unit(rng) < prob ? 1 : 0;
  }
  data.refit_standardizer();
  data.metadata = {
      {"generator", "synthesize_biased"},
      {"n", std::to_string(n)},
      {"seed", std::to_string(seed)},
      {"bias_strength", format_number(bias_strength)},
      {"features", "x1=s*(2z-1)+N(0,1); x2,x3~N(0,1); x4=0.5*x2+N(0,1)"},
      {"label", "Bernoulli(sigmoid(1.2*x2-0.8*x3+0.5*x1+1.5*s*(2z-1)))"},
  };
  return data;
}

}  // namespace aldual
