#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsevar/linmodel.hpp"

namespace sparsevar {

/// VAR(1) regression design: row t of X is y_t and row t of Y is y_{t+1}.
struct LaggedPanel {
    Matrix X;
    Matrix Y;
    std::vector<std::string> labels;

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }
};

/// Observations y_0..y_n (rows) to the lagged panel. Labels default to
/// "y1".."yp" when empty and must be unique.
LaggedPanel build_panel(const Matrix& series, std::vector<std::string> labels = {});

/// A table read from CSV: header row, first column a row label (dates),
/// remaining columns numeric.
struct SeriesTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> columns;
    Matrix values;
};

SeriesTable read_series_csv(std::istream& in, const std::string& source = "<stream>");
SeriesTable read_series_csv(const std::filesystem::path& path);
void write_series_csv(std::ostream& out, const SeriesTable& table);

/// Simple returns r_t = p_t / p_{t-1} - 1. Needs at least 3 price rows,
/// strictly positive prices and no missing cells.
SeriesTable prices_to_returns(const SeriesTable& prices);

/// Reads a price CSV and converts it to returns.
SeriesTable ingest_prices(const std::filesystem::path& path);
SeriesTable ingest_prices(std::istream& in, const std::string& source = "<stream>");

/// Sample lag-1 autocorrelation of each column.
Vector lag1_autocorrelation(const Matrix& series);

}  // namespace sparsevar
