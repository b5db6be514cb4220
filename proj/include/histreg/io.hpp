#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "histreg/dsd.hpp"
#include "histreg/simgen.hpp"

namespace histreg {
namespace io {

using json = nlohmann::ordered_json;

// In-memory form of a dataset file: every unit defines every variable.
// values[unit][variable index] parallels `variables`.
struct Dataset {
  std::vector<std::string> variables;
  std::vector<std::string> labels;
  std::vector<std::vector<HistogramValue>> values;

  Eigen::Index variable_index(const std::string& name) const;  // throws InvalidArgument
  std::vector<QuantileFunction> column(const std::string& name) const;
  Eigen::Index unit_count() const { return static_cast<Eigen::Index>(labels.size()); }
};

json histogram_to_json(const HistogramValue& h);
HistogramValue histogram_from_json(const json& j);

json dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const json& j);
Dataset load_dataset(const std::string& path);

// One invariant violation, with coordinates.
struct Diagnostic {
  std::string unit;
  std::string variable;
  std::string message;
};

// Collects every violation in a dataset document instead of stopping at the
// first. An unparseable document yields a single diagnostic.
std::vector<Diagnostic> validate_dataset_json(const json& j);

struct FitReport {
  std::string response;
  std::vector<std::string> predictors;
  DSDModel model;
  double rmse_m = 0.0, rmse_l = 0.0, rmse_u = 0.0;
  std::vector<std::string> unit_labels;
  std::vector<HistogramValue> predicted;       // per unit
  std::vector<double> mallows_sq_errors;       // per unit
};

json fit_report_to_json(const FitReport& r);
FitReport fit_report_from_json(const json& j);

json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const json& j);

json experiment_summary_to_json(const ExperimentSummary& s, const ExperimentConfig& cfg);

// Equiprobable-CSV helper: each row is `unit,variable,k0,k1,...,kK` giving the
// K+1 boundaries of K equal-weight bins. Rows may appear in any order.
Dataset dataset_from_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace io
}  // namespace histreg
