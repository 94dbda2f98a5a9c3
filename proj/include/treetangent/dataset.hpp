#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "treetangent/errors.hpp"
#include "treetangent/format.hpp"
#include "treetangent/rng.hpp"

namespace treetangent {

// Ingested samples. When the label column is categorical (or forced to be),
// class_ids holds dense ids in first-appearance order and targets mirrors
// them as doubles; otherwise class_ids is empty and targets carries the raw
// regression values.
struct Dataset {
    Eigen::MatrixXd features;  // N x F
    Eigen::VectorXd targets;
    std::vector<int> class_ids;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
    std::string source;
    int dropped_rows = 0;  // rows rejected for non-finite values

    int n() const { return static_cast<int>(features.rows()); }
    int f() const { return static_cast<int>(features.cols()); }
    bool categorical() const { return !class_ids.empty(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }
};

enum class LabelKind { auto_detect, categorical, numeric };

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    if (b == e) return false;
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

}  // namespace detail

// Comma-separated, '.' decimal point, optional header. The label column is
// selected by header name or by 0-based index given as a number. Rows with
// any non-finite value are dropped and counted.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        bool has_header, LabelKind label_kind = LabelKind::auto_detect) {
    std::ifstream in(path);
    if (!in) throw parse_error("load_csv: cannot open '" + path + "'");

    std::string line;
    long line_no = 0;
    std::vector<std::string> header;
    if (has_header) {
        if (!std::getline(in, line)) throw parse_error("load_csv: empty file '" + path + "'");
        ++line_no;
        header = detail::split_csv_line(line);
    }

    std::vector<std::vector<std::string>> raw;
    std::size_t width = header.size();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw parse_error("load_csv: expected " + std::to_string(width) + " cells, got " +
                                  std::to_string(cells.size()),
                              line_no);
        raw.push_back(std::move(cells));
    }
    if (raw.empty()) throw parse_error("load_csv: no data rows in '" + path + "'");

    int label_idx = -1;
    if (has_header) {
        auto it = std::find(header.begin(), header.end(), label_column);
        if (it != header.end()) label_idx = static_cast<int>(it - header.begin());
    }
    if (label_idx < 0) {
        double v;
        if (detail::parse_double(label_column, v) && v == std::floor(v) && v >= 0 &&
            v < static_cast<double>(width))
            label_idx = static_cast<int>(v);
        else
            throw parse_error("load_csv: label column '" + label_column + "' not found");
    }

    Dataset d;
    d.source = path;
    const int f = static_cast<int>(width) - 1;
    if (f < 1) throw parse_error("load_csv: need at least one feature column");
    for (std::size_t j = 0; j < width; ++j)
        if (static_cast<int>(j) != label_idx)
            d.feature_names.push_back(has_header ? header[j] : "f" + std::to_string(j));

    bool labels_numeric = label_kind != LabelKind::categorical;
    if (label_kind == LabelKind::auto_detect) {
        for (const auto& row : raw) {
            double v;
            if (!detail::parse_double(row[label_idx], v)) {
                labels_numeric = false;
                break;
            }
        }
    }

    std::vector<Eigen::VectorXd> rows;
    std::vector<double> targets;
    std::vector<std::string> raw_labels;
    long data_line = has_header ? 1 : 0;
    for (const auto& cells : raw) {
        ++data_line;
        Eigen::VectorXd x(f);
        int k = 0;
        bool finite = true;
        for (std::size_t j = 0; j < width; ++j) {
            if (static_cast<int>(j) == label_idx) continue;
            double v;
            if (!detail::parse_double(cells[j], v))
                throw parse_error("load_csv: cannot parse '" + cells[j] + "'", data_line);
            if (!std::isfinite(v)) finite = false;
            x[k++] = v;
        }
        double label_value = 0.0;
        if (labels_numeric) {
            if (!detail::parse_double(cells[label_idx], label_value))
                throw parse_error("load_csv: cannot parse label '" + cells[label_idx] + "'",
                                  data_line);
            if (!std::isfinite(label_value)) finite = false;
        }
        if (!finite) {
            ++d.dropped_rows;
            continue;
        }
        rows.push_back(std::move(x));
        targets.push_back(label_value);
        raw_labels.push_back(cells[label_idx]);
    }
    if (rows.empty()) throw parse_error("load_csv: every row rejected in '" + path + "'");

    d.features.resize(static_cast<int>(rows.size()), f);
    d.targets.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.features.row(i) = rows[i].transpose();
        d.targets[i] = targets[i];
    }
    const bool as_classes = !labels_numeric || label_kind == LabelKind::categorical;
    if (as_classes) {
        std::map<std::string, int> ids;  // first-appearance order
        for (const auto& s : raw_labels) {
            auto [it, inserted] = ids.try_emplace(s, static_cast<int>(d.class_names.size()));
            if (inserted) d.class_names.push_back(s);
            d.class_ids.push_back(it->second);
        }
        for (std::size_t i = 0; i < d.class_ids.size(); ++i)
            d.targets[i] = d.class_ids[i];
    }
    return d;
}

// Writes features plus a final "label" column; load_csv(save_csv(d)) restores
// the exact values because doubles are printed round-trip exact.
inline void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("save_csv: cannot write '" + path + "'");
    for (const auto& name : d.feature_names) out << name << ",";
    out << "label\n";
    for (int i = 0; i < d.n(); ++i) {
        for (int j = 0; j < d.f(); ++j) out << format_double(d.features(i, j)) << ",";
        if (d.categorical())
            out << d.class_names[d.class_ids[i]];
        else
            out << format_double(d.targets[i]);
        out << "\n";
    }
}

// Optional constant-1 feature appended before the optional row normalization
// to unit L2 norm.
inline Dataset preprocess(const Dataset& d, bool add_bias, bool normalize) {
    if (d.f() < 1) throw std::invalid_argument("preprocess: dataset has no features");
    Dataset out = d;
    if (add_bias) {
        out.features.conservativeResize(Eigen::NoChange, d.f() + 1);
        out.features.col(d.f()).setOnes();
        out.feature_names.push_back("bias");
    }
    if (normalize) {
        for (int i = 0; i < out.n(); ++i) {
            const double norm = out.features.row(i).norm();
            if (norm == 0.0)
                throw numeric_error("preprocess: zero-norm row " + std::to_string(i) +
                                    " cannot be normalized");
            out.features.row(i) /= norm;
        }
    }
    return out;
}

// Exact duplicate feature rows (these violate the positive-definiteness
// assumption of the analytic kernels; callers skip PD assertions when > 0).
inline int duplicate_rows(const Eigen::MatrixXd& features) {
    std::set<std::vector<double>> seen;
    int dups = 0;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        std::vector<double> key(features.row(i).begin(), features.row(i).end());
        if (!seen.insert(std::move(key)).second) ++dups;
    }
    return dups;
}

// k-fold assignment, stratified per class when labels are categorical.
struct SplitPlan {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> fold_of;  // per sample
    bool stratified = false;
    std::string warning;

    std::vector<int> fold_members(int fold) const {
        std::vector<int> ids;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] == fold) ids.push_back(static_cast<int>(i));
        return ids;
    }
};

// Deterministic in (dataset order, k, seed). Samples of each class are
// shuffled and dealt to folds round-robin with a running offset, so fold
// sizes differ by at most one both globally and within every class.
inline SplitPlan make_folds(const Dataset& d, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_folds: k must be >= 2");
    if (d.n() < k) throw std::invalid_argument("make_folds: fewer samples than folds");
    SplitPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.fold_of.assign(d.n(), -1);

    std::vector<std::vector<int>> groups;
    bool stratify = d.categorical();
    if (stratify) {
        groups.resize(d.n_classes());
        for (int i = 0; i < d.n(); ++i) groups[d.class_ids[i]].push_back(i);
        for (std::size_t c = 0; c < groups.size(); ++c)
            if (static_cast<int>(groups[c].size()) < k) {
                plan.warning = "class '" + d.class_names[c] + "' has fewer members than folds; " +
                               "falling back to unstratified split";
                stratify = false;
                break;
            }
    }
    if (!stratify) {
        groups.assign(1, {});
        groups[0].resize(d.n());
        for (int i = 0; i < d.n(); ++i) groups[0][i] = i;
    }
    plan.stratified = stratify;

    const CounterRng rng = CounterRng(seed).stream(rng_stream::folds);
    std::uint64_t c = 0;
    int cursor = 0;
    for (auto& g : groups) {
        // Fisher-Yates with counter-based draws.
        for (int i = static_cast<int>(g.size()) - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.bits(c++) % static_cast<std::uint64_t>(i + 1));
            std::swap(g[i], g[j]);
        }
        for (int idx : g) plan.fold_of[idx] = cursor++ % k;
    }
    return plan;
}

// Two separable arcs on the unit circle (classes 0 and 1) with an angular
// margin; the synthetic stand-in for a small classification benchmark.
inline Dataset two_arcs_dataset(int n, std::uint64_t seed, double margin = 0.4) {
    if (n < 2) throw std::invalid_argument("two_arcs_dataset: n must be >= 2");
    const CounterRng rng = CounterRng(seed).stream(rng_stream::train_data);
    Dataset d;
    d.features.resize(n, 2);
    d.targets.resize(n);
    d.class_names = {"arc0", "arc1"};
    d.feature_names = {"x0", "x1"};
    d.source = "synthetic:two_arcs";
    const double span = M_PI - margin;
    for (int i = 0; i < n; ++i) {
        const int cls = i % 2;
        const double u = rng.uniform(i);
        const double angle = cls == 0 ? u * span : M_PI + u * span;
        d.features(i, 0) = std::cos(angle);
        d.features(i, 1) = std::sin(angle);
        d.class_ids.push_back(cls);
        d.targets[i] = cls;
    }
    return d;
}

}  // namespace treetangent
