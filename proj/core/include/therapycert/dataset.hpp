#pragma once

// Dataset schema and CSV persistence. Column order: x1..x6, the 28 model coefficients,
// T_stop r mu_C beta_C c_d kappa T_s, the zeta tag, then the labels QM QI QL Tf yT yH.

#include "therapycert/feature_matrix.hpp"
#include "therapycert/sampling.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace therapycert {

inline constexpr std::string_view kFeatureSchemaVersion = "therapycert-features-v1";
inline constexpr std::size_t kFeatureCount = 6 + ModelParameters::size + 7;

inline constexpr std::array<std::string_view, 7> kControlFeatureNames = {
    "T_stop", "r", "mu_C", "beta_C", "c_d", "kappa", "T_s"};
inline constexpr std::array<std::string_view, 6> kLabelColumnNames = {"QM", "QI", "QL",
                                                                      "Tf", "yT", "yH"};
inline constexpr std::string_view kZetaColumnName = "zeta";

/// The 41 learner feature names in schema order.
const std::vector<std::string>& feature_names();
/// Every CSV column in order.
std::vector<std::string> dataset_columns();

enum class LabelKind { T, H, M, I, L };

std::string_view label_column(LabelKind kind) noexcept;
std::string_view surrogate_name(LabelKind kind) noexcept; // "F_T", ...
bool is_classification(LabelKind kind) noexcept;
inline constexpr std::array<LabelKind, 5> kAllLabels = {LabelKind::T, LabelKind::H, LabelKind::M,
                                                        LabelKind::I, LabelKind::L};

std::array<double, kFeatureCount> feature_row(const StateVector& x0, const ModelParameters& p,
                                              const ControlParameters& ctrl);
std::array<double, kFeatureCount> feature_row(const ScenarioRecord& rec);

double label_value(const Labels& labels, LabelKind kind) noexcept;

struct Dataset {
    std::vector<ScenarioRecord> rows;

    std::size_t size() const noexcept { return rows.size(); }
    FeatureMatrix features() const;
    std::vector<double> labels(LabelKind kind) const;
    Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

void write_dataset_csv(const Dataset& data, std::ostream& out);
void write_dataset_csv(const Dataset& data, const std::filesystem::path& file);
/// Throws SchemaError when the header differs from dataset_columns().
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::filesystem::path& file);

} // namespace therapycert
