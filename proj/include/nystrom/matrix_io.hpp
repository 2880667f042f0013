#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "nystrom/csv.hpp"
#include "nystrom/errors.hpp"
#include "nystrom/matrix.hpp"

namespace nystrom {

/**
 * Write a dense matrix as CSV: a "# n=<rows>" comment line, then one line
 * per row. Entries use %.17g so a load reproduces the doubles bit-exactly.
 */
inline void save_matrix_csv(const std::string& path, const Matrix& m) {
    detail::require_finite(m, "save_matrix_csv");
    std::ofstream out(path);
    if (!out) throw IoError("save_matrix_csv: cannot open '" + path + "' for writing");
    out << "# n=" << m.rows() << "\n";
    char buf[40];
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
    out.flush();
    if (!out) throw IoError("save_matrix_csv: write error on '" + path + "'");
}

/**
 * Read a matrix CSV. '#' lines are comments; a "# n=<count>" comment, when
 * present, is cross-checked against the parsed row count. All rows must
 * have equal length.
 */
inline Matrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_matrix_csv: cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    long declared_n = -1;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::is_skippable_line(line)) {
            const auto pos = line.find("n=");
            if (line.find('#') != std::string::npos && pos != std::string::npos) {
                try {
                    declared_n = std::stol(line.substr(pos + 2));
                } catch (const std::exception&) {
                    throw ParseError("load_matrix_csv: malformed size comment at line " +
                                     std::to_string(line_no));
                }
            }
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            row.push_back(detail::parse_double_field(fields[c], line_no, c));
        }
        if (rows.empty()) {
            width = row.size();
        } else if (row.size() != width) {
            throw ParseError("load_matrix_csv: line " + std::to_string(line_no) +
                             " has " + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(width));
        }
        rows.push_back(std::move(row));
    }
    if (in.bad()) throw IoError("load_matrix_csv: read error on '" + path + "'");
    if (rows.empty()) throw ParseError("load_matrix_csv: no data rows in '" + path + "'");
    if (declared_n >= 0 && declared_n != static_cast<long>(rows.size())) {
        throw ParseError("load_matrix_csv: size comment declares " +
                         std::to_string(declared_n) + " rows, file has " +
                         std::to_string(rows.size()));
    }

    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return m;
}

/** Load a matrix CSV and validate it as a Gram matrix (square, symmetric). */
inline GramMatrix load_gram_csv(const std::string& path,
                                double sym_tol = Defaults::sym_tol,
                                double psd_tol = Defaults::psd_tol) {
    GramMatrix g(load_matrix_csv(path), sym_tol);
    validate_spsd(g, psd_tol);
    return g;
}

}  // namespace nystrom
