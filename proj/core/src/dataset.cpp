#include "therapycert/dataset.hpp"

#include "therapycert/errors.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace therapycert {

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (int i = 1; i <= 6; ++i) {
            out.push_back("x" + std::to_string(i));
        }
        for (const auto& field : kModelParameterFields) {
            out.emplace_back(field.name);
        }
        for (auto n : kControlFeatureNames) {
            out.emplace_back(n);
        }
        return out;
    }();
    return names;
}

std::vector<std::string> dataset_columns() {
    std::vector<std::string> cols = feature_names();
    cols.emplace_back(kZetaColumnName);
    for (auto n : kLabelColumnNames) {
        cols.emplace_back(n);
    }
    return cols;
}

std::string_view label_column(LabelKind kind) noexcept {
    switch (kind) {
    case LabelKind::T: return "yT";
    case LabelKind::H: return "yH";
    case LabelKind::M: return "QM";
    case LabelKind::I: return "QI";
    case LabelKind::L: return "QL";
    }
    return "";
}

std::string_view surrogate_name(LabelKind kind) noexcept {
    switch (kind) {
    case LabelKind::T: return "F_T";
    case LabelKind::H: return "F_H";
    case LabelKind::M: return "F_M";
    case LabelKind::I: return "F_I";
    case LabelKind::L: return "F_L";
    }
    return "";
}

bool is_classification(LabelKind kind) noexcept {
    return kind == LabelKind::T || kind == LabelKind::H;
}

std::array<double, kFeatureCount> feature_row(const StateVector& x0, const ModelParameters& p,
                                              const ControlParameters& ctrl) {
    std::array<double, kFeatureCount> row{};
    std::size_t k = 0;
    for (std::size_t i = 0; i < StateVector::size; ++i) {
        row[k++] = x0[i];
    }
    for (const auto& field : kModelParameterFields) {
        row[k++] = p.*field.member;
    }
    row[k++] = ctrl.T_stop;
    row[k++] = ctrl.r;
    row[k++] = ctrl.mu_C;
    row[k++] = ctrl.beta_C;
    row[k++] = ctrl.c_d;
    row[k++] = ctrl.kappa;
    row[k++] = ctrl.T_s;
    return row;
}

std::array<double, kFeatureCount> feature_row(const ScenarioRecord& rec) {
    return feature_row(rec.x0, rec.params, rec.ctrl);
}

double label_value(const Labels& labels, LabelKind kind) noexcept {
    switch (kind) {
    case LabelKind::T: return labels.y_T ? 1.0 : 0.0;
    case LabelKind::H: return labels.y_H ? 1.0 : 0.0;
    case LabelKind::M: return labels.Q_M;
    case LabelKind::I: return labels.Q_I;
    case LabelKind::L: return labels.Q_L;
    }
    return 0.0;
}

FeatureMatrix Dataset::features() const {
    FeatureMatrix X(feature_names(), rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = feature_row(rows[r]);
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            X(r, c) = row[c];
        }
    }
    return X;
}

std::vector<double> Dataset::labels(LabelKind kind) const {
    std::vector<double> y;
    y.reserve(rows.size());
    for (const auto& rec : rows) {
        y.push_back(label_value(rec.labels, kind));
    }
    return y;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.rows.reserve(indices.size());
    for (std::size_t i : indices) {
        out.rows.push_back(rows.at(i));
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw SchemaError("cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    const auto cols = dataset_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out << (c ? "," : "") << cols[c];
    }
    out << '\n';
    for (const auto& rec : data.rows) {
        const auto row = feature_row(rec);
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format_double(row[c]);
        }
        const Labels& lb = rec.labels;
        out << ',' << format_double(rec.zeta) << ',' << format_double(lb.Q_M) << ','
            << format_double(lb.Q_I) << ',' << format_double(lb.Q_L) << ',' << format_double(lb.T_f)
            << ',' << (lb.y_T ? '1' : '0') << ',' << (lb.y_H ? '1' : '0') << '\n';
    }
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw MissingInputError("cannot write dataset " + file.string());
    }
    write_dataset_csv(data, out);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

bool parse_bool(std::string_view text) {
    if (text == "1") return true;
    if (text == "0") return false;
    throw SchemaError("boolean column expects 0 or 1, got '" + std::string(text) + "'");
}

} // namespace

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("dataset is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto expected = dataset_columns();
    const auto header = split_commas(line);
    if (header.size() != expected.size()) {
        throw SchemaError("dataset header has " + std::to_string(header.size()) +
                          " columns, expected " + std::to_string(expected.size()));
    }
    for (std::size_t c = 0; c < expected.size(); ++c) {
        if (header[c] != expected[c]) {
            throw SchemaError("dataset column " + std::to_string(c + 1) + " is '" +
                              std::string(header[c]) + "', expected '" + expected[c] + "'");
        }
    }

    Dataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != expected.size()) {
            throw SchemaError("dataset line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " fields");
        }
        try {
            ScenarioRecord rec;
            std::size_t k = 0;
            for (std::size_t i = 0; i < StateVector::size; ++i) {
                rec.x0[i] = parse_double(cells[k++]);
            }
            for (const auto& field : kModelParameterFields) {
                rec.params.*field.member = parse_double(cells[k++]);
            }
            rec.ctrl.T_stop = parse_double(cells[k++]);
            rec.ctrl.r = parse_double(cells[k++]);
            rec.ctrl.mu_C = parse_double(cells[k++]);
            rec.ctrl.beta_C = parse_double(cells[k++]);
            rec.ctrl.c_d = parse_double(cells[k++]);
            rec.ctrl.kappa = parse_double(cells[k++]);
            rec.ctrl.T_s = parse_double(cells[k++]);
            rec.zeta = parse_double(cells[k++]);
            rec.labels.Q_M = parse_double(cells[k++]);
            rec.labels.Q_I = parse_double(cells[k++]);
            rec.labels.Q_L = parse_double(cells[k++]);
            rec.labels.T_f = parse_double(cells[k++]);
            rec.labels.y_T = parse_bool(cells[k++]);
            rec.labels.y_H = parse_bool(cells[k++]);
            data.rows.push_back(rec);
        } catch (const SchemaError& e) {
            throw SchemaError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return data;
}

Dataset read_dataset_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open dataset " + file.string());
    }
    return read_dataset_csv(in);
}

} // namespace therapycert
