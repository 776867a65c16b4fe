#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "splitplot/design.hpp"
#include "splitplot/kron.hpp"
#include "splitplot/sim.hpp"
#include "splitplot/test_engine.hpp"

namespace splitplot {

inline constexpr std::string_view kVersion = "1.0.0";

/// Wide CSV: header `group,t1,...,td`, one row per subject. Groups keep
/// their order of first appearance.
struct LabeledData {
  DataSet data;
  std::vector<std::string> labels;
};

LabeledData parse_dataset(std::string_view csv);
std::string serialize_dataset(const DataSet& data, const std::vector<std::string>& labels);
LabeledData read_dataset_file(const std::string& path);

/// "%.17g"; enough digits for an exact round trip.
std::string format_double(double v);

// Command-line list syntax: "5,50,200" or ranges "2..12".
std::vector<std::size_t> parse_size_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);
/// "identity", "ar:<rho>", "cs:<rho>".
CovarianceModel parse_covariance(std::string_view text, std::size_t d);

nlohmann::json report_json(const TestResult& result, const Design& design, const std::vector<std::string>& labels,
                           const HypothesisSpec& hypothesis);

/// SimConfig from JSON. Keys: sizes or a, d, covariance, hypothesis,
/// alternative, deltas, alpha, replications, upsilon, seed, threads.
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json sim_config_to_json(const SimConfig& config);

/// CSV header "delta,test,rate,se,reps"; with_group_count prepends "a".
std::string sim_csv_header(bool with_group_count);
std::string sim_csv_rows(const SimResult& result, bool with_group_count);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static line plot: one polyline per series, axes, labels and a legend.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label);

struct FpCell {
  std::size_t d = 0;
  std::size_t a = 0;
  double f = 0.0;
  double tau = 0.0;
};

/// f_P and tau_P = 1/f_P over the (d, a) grid with known Sigma. Each cell
/// uses the first a entries of `sizes` (paper_sizes(a) when empty).
std::vector<FpCell> fp_table(const std::vector<std::size_t>& dims, const std::vector<std::size_t>& group_counts,
                             std::string_view covariance, HypothesisKind hypothesis,
                             const std::vector<std::size_t>& sizes = {});

std::string fp_table_csv(const std::vector<FpCell>& cells);

}  // namespace splitplot
