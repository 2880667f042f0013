#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "nystrom/csv.hpp"
#include "nystrom/errors.hpp"
#include "nystrom/matrix.hpp"

namespace nystrom {

/** Feature points, one per row (n x d), finite and non-empty. */
class FeatureSet {
public:
    explicit FeatureSet(Matrix points) {
        detail::require_input(points.rows() > 0 && points.cols() > 0,
                              "FeatureSet: need at least one point and one dimension");
        detail::require_finite(points, "FeatureSet");
        mat_ = std::move(points);
    }

    Index count() const { return mat_.rows(); }
    Index dim() const { return mat_.cols(); }
    const Matrix& mat() const { return mat_; }

private:
    Matrix mat_;
};

enum class KernelKind { linear, rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double gamma = 1.0;  // rbf width parameter, must be > 0 for rbf
};

/**
 * Dense kernel Gram matrix of a feature set.
 *
 * linear: G(i,j) = <x_i, x_j>; rbf: G(i,j) = exp(-gamma * ||x_i - x_j||^2)
 * with unit diagonal by construction. The result is validated SPSD (this is
 * an ingestion boundary; downstream code assumes validity).
 */
inline GramMatrix gram_matrix(const FeatureSet& features, const KernelSpec& spec,
                              double psd_tol = Defaults::psd_tol) {
    const Matrix& x = features.mat();
    const Index n = x.rows();
    Matrix g;
    switch (spec.kind) {
        case KernelKind::linear: {
            g = Matrix::Zero(n, n);
            g.selfadjointView<Eigen::Lower>().rankUpdate(x);
            g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
            break;
        }
        case KernelKind::rbf: {
            detail::require_arg(spec.gamma > 0.0,
                                "gram_matrix: rbf gamma must be positive");
            const Vector sq = x.rowwise().squaredNorm();
            Matrix inner = Matrix::Zero(n, n);
            inner.selfadjointView<Eigen::Lower>().rankUpdate(x);
            inner.triangularView<Eigen::StrictlyUpper>() = inner.transpose();
            g.resize(n, n);
            for (Index j = 0; j < n; ++j) {
                for (Index i = 0; i < n; ++i) {
                    const double d2 =
                        std::max(sq(i) + sq(j) - 2.0 * inner(i, j), 0.0);
                    g(i, j) = std::exp(-spec.gamma * d2);
                }
                g(j, j) = 1.0;  // exact unit diagonal
            }
            g = 0.5 * (g + g.transpose()).eval();
            break;
        }
        default:
            throw InvalidArgumentError("gram_matrix: unknown kernel kind");
    }
    GramMatrix out(std::move(g));
    validate_spsd(out, psd_tol);
    return out;
}

/**
 * Load a feature CSV: one point per line, comma-separated coordinates,
 * '#' lines and blank lines ignored, no header. All rows must agree on
 * dimension; malformed content reports the offending line.
 */
inline FeatureSet load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_features: cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_skippable_line(line)) continue;
        const auto fields = detail::split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            row.push_back(detail::parse_double_field(fields[c], line_no, c));
        }
        if (rows.empty()) {
            dim = row.size();
        } else if (row.size() != dim) {
            throw ParseError("load_features: line " + std::to_string(line_no) +
                             " has " + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(dim));
        }
        rows.push_back(std::move(row));
    }
    if (in.bad()) throw IoError("load_features: read error on '" + path + "'");
    if (rows.empty()) {
        throw ParseError("load_features: no data rows in '" + path + "'");
    }

    Matrix points(static_cast<Index>(rows.size()), static_cast<Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            points(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return FeatureSet(std::move(points));
}

}  // namespace nystrom
