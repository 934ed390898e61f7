#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace dimgp {

/// Row-major so feature rows are contiguous and can be handed to the
/// evaluator as spans.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FileFormat { Auto, Tsv, Csv };

/// Tabular regression data. Immutable after construction; all values finite.
struct Dataset {
    FeatureMatrix features;                 // n x p
    Eigen::VectorXd target;                 // n
    std::vector<std::string> feature_names; // p, unique
    std::string name;
    int dropped_rows = 0; // rows removed at load time for non-finite values

    Eigen::Index n_rows() const { return features.rows(); }
    Eigen::Index n_features() const { return features.cols(); }

    std::vector<double> row(Eigen::Index i) const {
        return std::vector<double>(features.row(i).begin(), features.row(i).end());
    }
};

/// The three evaluation points used for Hessian sampling: the feature rows
/// at the minimum, nearest-to-mean, and maximum target values.
struct StrategicPoints {
    Eigen::VectorXd p_min, p_mean, p_max;
    Eigen::Index row_min = 0, row_mean = 0, row_max = 0;
};

/// Build a Dataset from in-memory values, enforcing invariants
/// (n >= 2, p >= 1, finite values, unique feature names).
Dataset make_dataset(FeatureMatrix features, Eigen::VectorXd target,
                     std::vector<std::string> feature_names, std::string name);

/// Load a delimited text file with a header row. Rows containing non-finite
/// values are dropped and counted; a cell that fails to parse as a number is
/// an error reported with its row and column.
Dataset load_dataset(const std::string& path, FileFormat format = FileFormat::Auto,
                     const std::string& target_column = "target");

/// Write a Dataset back out with shortest round-trip number formatting, so
/// a reload reproduces the values bit-for-bit.
void save_dataset(const Dataset& d, const std::string& path,
                  FileFormat format = FileFormat::Auto);

/// Deterministic shuffled partition; round(train_fraction * n) rows in
/// train, remainder in test. Both subsets keep ascending row order.
std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed);

/// Ties are broken by lowest row index.
StrategicPoints strategic_points(const Dataset& d);

} // namespace dimgp
