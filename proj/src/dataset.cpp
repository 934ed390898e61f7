#include "dimgp/dataset.hpp"
#include "dimgp/common.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

namespace dimgp {

namespace {

char delimiter_for(const std::string& path, FileFormat format) {
    if (format == FileFormat::Tsv) return '\t';
    if (format == FileFormat::Csv) return ',';
    auto ext = std::filesystem::path(path).extension().string();
    return ext == ".csv" ? ',' : '\t';
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) fields.push_back(field);
    if (!line.empty() && line.back() == delim) fields.emplace_back();
    return fields;
}

std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && issp(s[i])) ++i;
    return s.substr(i);
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    const std::string t = trim(cell);
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw DataError("non-numeric value '" + cell + "' at row " +
                        std::to_string(row) + ", column '" + col + "'");
    }
    return v;
}

} // namespace

Dataset make_dataset(FeatureMatrix features, Eigen::VectorXd target,
                     std::vector<std::string> feature_names, std::string name) {
    const auto n = features.rows();
    const auto p = features.cols();
    if (n < 2) throw DataError("dataset '" + name + "' has fewer than 2 rows");
    if (p < 1) throw DataError("dataset '" + name + "' has no feature columns");
    if (target.size() != n)
        throw DataError("dataset '" + name + "': target length does not match rows");
    if (static_cast<Eigen::Index>(feature_names.size()) != p)
        throw DataError("dataset '" + name + "': feature name count does not match columns");
    if (!features.allFinite() || !target.allFinite())
        throw DataError("dataset '" + name + "' contains non-finite values");
    std::unordered_set<std::string> seen;
    for (const auto& fn : feature_names) {
        if (!seen.insert(fn).second)
            throw DataError("dataset '" + name + "': duplicate feature name '" + fn + "'");
    }
    Dataset d;
    d.features = std::move(features);
    d.target = std::move(target);
    d.feature_names = std::move(feature_names);
    d.name = std::move(name);
    return d;
}

Dataset load_dataset(const std::string& path, FileFormat format,
                     const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file '" + path + "'");
    const char delim = delimiter_for(path, format);

    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset file '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header = split_line(line, delim);
    for (auto& h : header) h = trim(h);
    const auto target_it = std::find(header.begin(), header.end(), target_column);
    if (target_it == header.end())
        throw DataError("missing target column '" + target_column + "' in '" + path + "'");
    const std::size_t target_idx = static_cast<std::size_t>(target_it - header.begin());

    std::vector<std::string> feature_names;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != target_idx) feature_names.push_back(header[j]);
    if (feature_names.empty())
        throw DataError("dataset '" + path + "' has no feature columns");

    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    int dropped = 0;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_line(line, delim);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        std::vector<double> feat;
        feat.reserve(feature_names.size());
        double y = 0.0;
        bool finite = true;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const double v = parse_cell(fields[j], row_no, header[j]);
            if (!std::isfinite(v)) finite = false;
            if (j == target_idx) y = v;
            else feat.push_back(v);
        }
        if (!finite) {
            ++dropped;
            continue;
        }
        rows.push_back(std::move(feat));
        targets.push_back(y);
    }

    if (rows.size() < 2)
        throw DataError("dataset '" + path + "' has fewer than 2 valid rows");

    FeatureMatrix features(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(feature_names.size()));
    Eigen::VectorXd target(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        target(static_cast<Eigen::Index>(i)) = targets[i];
    }

    Dataset d = make_dataset(std::move(features), std::move(target),
                             std::move(feature_names),
                             std::filesystem::path(path).stem().string());
    d.dropped_rows = dropped;
    return d;
}

void save_dataset(const Dataset& d, const std::string& path, FileFormat format) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file '" + path + "'");
    const char delim = delimiter_for(path, format);
    for (const auto& fn : d.feature_names) out << fn << delim;
    out << "target\n";
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
        for (Eigen::Index j = 0; j < d.n_features(); ++j)
            out << format_double(d.features(i, j)) << delim;
        out << format_double(d.target(i)) << "\n";
    }
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DataError("train fraction must be in (0,1), got " +
                        format_double(train_fraction));
    const auto n = d.n_rows();
    const auto n_train = static_cast<Eigen::Index>(
        std::llround(train_fraction * static_cast<double>(n)));
    if (n_train < 2) throw DataError("train set too small (" + std::to_string(n_train) + " rows)");
    if (n_train >= n) throw DataError("empty test set");

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    // Fisher-Yates, hand-rolled so the partition is stable across standard
    // library implementations.
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(idx[i], idx[j]);
    }
    std::vector<Eigen::Index> train_idx(idx.begin(), idx.begin() + n_train);
    std::vector<Eigen::Index> test_idx(idx.begin() + n_train, idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    auto take = [&](const std::vector<Eigen::Index>& which) {
        FeatureMatrix f(static_cast<Eigen::Index>(which.size()), d.n_features());
        Eigen::VectorXd t(static_cast<Eigen::Index>(which.size()));
        for (std::size_t i = 0; i < which.size(); ++i) {
            f.row(static_cast<Eigen::Index>(i)) = d.features.row(which[i]);
            t(static_cast<Eigen::Index>(i)) = d.target(which[i]);
        }
        Dataset sub;
        sub.features = std::move(f);
        sub.target = std::move(t);
        sub.feature_names = d.feature_names;
        sub.name = d.name;
        return sub;
    };
    return {take(train_idx), take(test_idx)};
}

StrategicPoints strategic_points(const Dataset& d) {
    const auto n = d.n_rows();
    if (n < 1) throw DataError("strategic points require a non-empty dataset");

    Eigen::Index i_min = 0, i_max = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
        if (d.target(i) < d.target(i_min)) i_min = i;
        if (d.target(i) > d.target(i_max)) i_max = i;
    }
    const double mean = d.target.mean();
    Eigen::Index i_mean = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
        if (std::abs(d.target(i) - mean) < std::abs(d.target(i_mean) - mean)) i_mean = i;
    }

    StrategicPoints sp;
    sp.row_min = i_min;
    sp.row_mean = i_mean;
    sp.row_max = i_max;
    sp.p_min = d.features.row(i_min);
    sp.p_mean = d.features.row(i_mean);
    sp.p_max = d.features.row(i_max);
    return sp;
}

} // namespace dimgp
