#include "mdaml/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "mdaml/errors.hpp"
#include "mdaml/rng.hpp"

namespace mdaml {

int Dataset::num_classes() const {
  if (!labels || labels->size() == 0) return 0;
  return labels->maxCoeff() + 1;
}

void Dataset::validate() const {
  if (!features.allFinite()) {
    throw DataError("dataset: features contain non-finite values");
  }
  if (labels) {
    if (labels->size() != features.rows()) {
      throw DataError("dataset: label count does not match sample count");
    }
    if (labels->size() > 0 && labels->minCoeff() < 0) {
      throw DataError("dataset: negative class id");
    }
  }
}

LabelColumn LabelColumn::parse(const std::string& spec) {
  if (spec.empty()) return none();
  const bool digits = std::all_of(spec.begin(), spec.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
  if (digits) return by_index(std::stoi(spec));
  return by_name(spec);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    auto begin = cell.find_first_not_of(" \t\r");
    auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos
                        ? std::string()
                        : cell.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_feature(const std::string& cell, int row, int col) {
  try {
    size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    if (!std::isfinite(v)) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw DataError("csv row " + std::to_string(row) + ", column " +
                    std::to_string(col + 1) + ": not a finite number: '" +
                    cell + "'");
  }
}

}  // namespace

Dataset load_csv(const std::string& path, const LabelColumn& label,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open csv file: " + path);
  }

  std::string line;
  int row = 0;  // 1-based row number in the file, including the header
  std::vector<std::string> header;
  if (has_header) {
    if (!std::getline(in, line)) {
      throw DataError("csv file is empty: " + path);
    }
    ++row;
    header = split_line(line);
  }

  int label_index = -1;
  if (label.name) {
    if (!has_header) {
      throw DataError("label column by name requires a header row");
    }
    auto it = std::find(header.begin(), header.end(), *label.name);
    if (it == header.end()) {
      throw DataError("label column '" + *label.name + "' not found in header");
    }
    label_index = static_cast<int>(it - header.begin());
  } else if (label.index) {
    label_index = *label.index;
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  int width = -1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() ||
        line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::vector<std::string> cells = split_line(line);
    if (width < 0) {
      width = static_cast<int>(cells.size());
      if (label_index >= width) {
        throw DataError("label column index " + std::to_string(label_index) +
                        " out of range; csv has " + std::to_string(width) +
                        " columns");
      }
    } else if (static_cast<int>(cells.size()) != width) {
      throw DataError("csv row " + std::to_string(row) + ": expected " +
                      std::to_string(width) + " columns, got " +
                      std::to_string(cells.size()));
    }
    std::vector<double> feats;
    feats.reserve(width);
    for (int c = 0; c < width; ++c) {
      if (c == label_index) {
        raw_labels.push_back(cells[c]);
      } else {
        feats.push_back(parse_feature(cells[c], row, c));
      }
    }
    rows.push_back(std::move(feats));
  }

  if (rows.empty()) {
    throw DataError("csv contains no data rows: " + path);
  }

  Dataset data;
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size());
  data.features.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.features(i, j) = rows[i][j];
  }

  if (label_index >= 0) {
    Eigen::VectorXi ids(n);
    std::map<std::string, int> seen;
    std::vector<std::string> order;
    for (int i = 0; i < n; ++i) {
      auto [it, inserted] =
          seen.emplace(raw_labels[i], static_cast<int>(order.size()));
      if (inserted) order.push_back(raw_labels[i]);
      ids(i) = it->second;
    }
    data.labels = std::move(ids);
  }

  data.validate();
  return data;
}

Normalizer fit_normalizer(const Dataset& train) {
  if (train.num_samples() < 2) {
    throw DataError("normalizer: need at least 2 samples to fit");
  }
  const auto& x = train.features;
  Normalizer norm;
  norm.mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - norm.mean.transpose();
  norm.stddev =
      (centered.array().square().colwise().sum() / x.rows()).sqrt().max(1e-12);
  return norm;
}

Dataset apply(const Normalizer& norm, const Dataset& data) {
  if (norm.mean.size() != data.dim()) {
    throw DataError("normalizer: dimension mismatch");
  }
  Dataset out = data;
  out.features = (data.features.rowwise() - norm.mean.transpose()).array().rowwise() /
                 norm.stddev.transpose().array();
  return out;
}

Dataset apply_inverse(const Normalizer& norm, const Dataset& data) {
  if (norm.mean.size() != data.dim()) {
    throw DataError("normalizer: dimension mismatch");
  }
  Dataset out = data;
  out.features =
      (data.features.array().rowwise() * norm.stddev.transpose().array())
          .rowwise() +
      norm.mean.transpose().array();
  return out;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must be in (0,1)");
  }
  if (trials < 1) {
    throw ConfigError("split: trials must be positive");
  }
}

namespace {

Dataset take_rows(const Dataset& data, const std::vector<int>& idx) {
  Dataset out;
  out.features.resize(static_cast<int>(idx.size()), data.dim());
  if (data.labels) {
    out.labels = Eigen::VectorXi(static_cast<int>(idx.size()));
  }
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
    out.features.row(i) = data.features.row(idx[i]);
    if (data.labels) (*out.labels)(i) = (*data.labels)(idx[i]);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> stratified_split(const Dataset& data,
                                             const SplitSpec& spec, int trial) {
  spec.validate();
  data.validate();
  const int n = data.num_samples();
  if (n < 2) {
    throw DataError("split: need at least 2 samples");
  }
  Rng rng = make_rng(spec.seed, static_cast<std::uint64_t>(trial));
  const int train_target =
      static_cast<int>(std::llround(spec.train_fraction * n));

  std::vector<int> train_idx;
  std::vector<int> test_idx;

  if (spec.stratified) {
    if (!data.labeled()) {
      throw DataError("stratified split requires labels");
    }
    const int num_classes = data.num_classes();
    std::vector<std::vector<int>> by_class(num_classes);
    for (int i = 0; i < n; ++i) by_class[(*data.labels)(i)].push_back(i);

    // Largest-remainder quotas so per-class proportions stay within one
    // sample of train_fraction while the global train size hits the target.
    std::vector<int> quota(num_classes, 0);
    std::vector<std::pair<double, int>> remainder;  // (-frac, class)
    int assigned = 0;
    for (int c = 0; c < num_classes; ++c) {
      const auto& members = by_class[c];
      if (members.size() == 1) {
        quota[c] = 1;  // singleton class: keep its sample in train
        std::cerr << "warning: class " << c
                  << " has a single sample; assigning it to train\n";
        assigned += 1;
        continue;
      }
      double exact = spec.train_fraction * static_cast<double>(members.size());
      quota[c] = static_cast<int>(std::floor(exact));
      assigned += quota[c];
      remainder.emplace_back(-(exact - std::floor(exact)), c);
    }
    std::sort(remainder.begin(), remainder.end());
    for (const auto& [neg_frac, c] : remainder) {
      if (assigned >= train_target) break;
      if (quota[c] < static_cast<int>(by_class[c].size())) {
        ++quota[c];
        ++assigned;
      }
    }

    for (int c = 0; c < num_classes; ++c) {
      auto members = by_class[c];
      std::shuffle(members.begin(), members.end(), rng);
      for (int i = 0; i < static_cast<int>(members.size()); ++i) {
        (i < quota[c] ? train_idx : test_idx).push_back(members[i]);
      }
    }
  } else {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    train_idx.assign(order.begin(), order.begin() + train_target);
    test_idx.assign(order.begin() + train_target, order.end());
  }

  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {take_rows(data, train_idx), take_rows(data, test_idx)};
}

}  // namespace mdaml
