#include "sparsevar/panel.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string_view>

#include "sparsevar/error.hpp"

namespace sparsevar {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

// Comma-separated fields; double quotes protect embedded commas.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line, const std::string& column) {
    if (is_missing(cell)) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw DataError(source + ":" + std::to_string(line) + ": column '" + column + "': cannot parse '" + cell +
                        "' as a finite number");
    return v;
}

void require_complete(const SeriesTable& table, const std::string& source) {
    for (Index k = 0; k < table.values.cols(); ++k)
        for (Index t = 0; t < table.values.rows(); ++t)
            if (std::isnan(table.values(t, k)))
                throw DataError(source + ": series '" + table.columns[static_cast<std::size_t>(k)] +
                                "' has a missing value at row " + std::to_string(t + 1) +
                                " (series with gaps must be removed)");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

LaggedPanel build_panel(const Matrix& series, std::vector<std::string> labels) {
    if (series.rows() < 2) throw DataError("a lagged panel needs at least 2 time points");
    if (series.cols() < 1) throw DataError("a lagged panel needs at least 1 series");
    if (!series.allFinite()) throw DataError("series contains non-finite values");
    if (labels.empty()) {
        for (Index k = 0; k < series.cols(); ++k) labels.push_back("y" + std::to_string(k + 1));
    }
    if (static_cast<Index>(labels.size()) != series.cols())
        throw ConfigError("label count does not match series count");
    std::set<std::string> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second) throw DataError("duplicate series label '" + l + "'");
    LaggedPanel panel;
    const Index n = series.rows() - 1;
    panel.X = series.topRows(n);
    panel.Y = series.bottomRows(n);
    panel.labels = std::move(labels);
    return panel;
}

SeriesTable read_series_csv(std::istream& in, const std::string& source) {
    SeriesTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw DataError(source + ": empty file (a header row is required)");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2) throw DataError(source + ": header needs a label column and at least one series");
    table.columns.assign(header.begin() + 1, header.end());

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(cells.size()));
        table.row_labels.push_back(cells[0]);
        std::vector<double> row(table.columns.size());
        for (std::size_t k = 0; k < table.columns.size(); ++k)
            row[k] = parse_cell(cells[k + 1], source, line_no, table.columns[k]);
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.columns.size()));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t k = 0; k < rows[t].size(); ++k)
            table.values(static_cast<Index>(t), static_cast<Index>(k)) = rows[t][k];
    return table;
}

SeriesTable read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    SeriesTable table = read_series_csv(in, path.string());
    require_complete(table, path.string());
    return table;
}

void write_series_csv(std::ostream& out, const SeriesTable& table) {
    out << "date";
    for (const auto& c : table.columns) out << ',' << c;
    out << '\n';
    for (Index t = 0; t < table.values.rows(); ++t) {
        out << table.row_labels[static_cast<std::size_t>(t)];
        for (Index k = 0; k < table.values.cols(); ++k) out << ',' << format_double(table.values(t, k));
        out << '\n';
    }
}

SeriesTable prices_to_returns(const SeriesTable& prices) {
    if (prices.values.rows() < 3)
        throw DataError("need at least 3 price rows, found " + std::to_string(prices.values.rows()));
    require_complete(prices, "prices");
    for (Index k = 0; k < prices.values.cols(); ++k)
        for (Index t = 0; t < prices.values.rows(); ++t)
            if (!(prices.values(t, k) > 0.0))
                throw DataError("non-positive price " + format_double(prices.values(t, k)) + " at row " +
                                std::to_string(t + 1) + ", column '" + prices.columns[static_cast<std::size_t>(k)] +
                                "'");
    SeriesTable out;
    out.columns = prices.columns;
    out.row_labels.assign(prices.row_labels.begin() + 1, prices.row_labels.end());
    const Index T = prices.values.rows();
    out.values = prices.values.bottomRows(T - 1).cwiseQuotient(prices.values.topRows(T - 1)).array() - 1.0;
    return out;
}

SeriesTable ingest_prices(std::istream& in, const std::string& source) {
    SeriesTable prices = read_series_csv(in, source);
    require_complete(prices, source);
    return prices_to_returns(prices);
}

SeriesTable ingest_prices(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return ingest_prices(in, path.string());
}

Vector lag1_autocorrelation(const Matrix& series) {
    Vector out(series.cols());
    for (Index k = 0; k < series.cols(); ++k) {
        const Vector x = series.col(k).array() - series.col(k).mean();
        const double denom = x.squaredNorm();
        const Index T = x.size();
        out[k] = denom > 0.0 && T > 1 ? x.head(T - 1).dot(x.tail(T - 1)) / denom
                                      : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace sparsevar
