#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "histreg/io.hpp"
#include "histreg/version.hpp"

namespace {

using histreg::io::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

void emit(const json& doc, const std::string& out_path) {
  std::string text = doc.dump(2);
  text.push_back('\n');
  if (out_path.empty())
    std::cout << text;
  else
    histreg::io::write_file(out_path, text);
}

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> names;
  std::string current;
  for (char ch : csv) {
    if (ch == ',') {
      if (!current.empty()) names.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) names.push_back(current);
  return names;
}

histreg::VariableColumn load_column(const histreg::io::Dataset& data, const std::string& name,
                                    std::optional<int> equiprobable) {
  std::vector<histreg::QuantileFunction> qs = data.column(name);
  if (equiprobable) {
    for (auto& q : qs) q = histreg::requantize(q, *equiprobable);
  }
  return histreg::VariableColumn(std::move(qs));
}

int cmd_fit(const std::string& data_path, const std::string& response,
            const std::string& predictors_csv, std::optional<int> equiprobable,
            int max_iter, const std::string& out_path) {
  histreg::io::Dataset data = histreg::io::load_dataset(data_path);
  std::vector<std::string> predictor_names = split_names(predictors_csv);
  if (predictor_names.empty()) throw histreg::InvalidArgument("no predictor names given");

  histreg::VariableColumn y = load_column(data, response, equiprobable);
  std::vector<histreg::VariableColumn> xs;
  for (const auto& name : predictor_names) xs.push_back(load_column(data, name, equiprobable));

  histreg::SymbolicTable table(std::move(y), std::move(xs), data.labels);
  histreg::io::FitReport report;
  report.model = histreg::fit(table, 1e-9, max_iter > 0 ? max_iter : -1);
  report.response = response;
  report.predictors = predictor_names;
  report.unit_labels = data.labels;

  std::vector<histreg::QuantileFunction> predicted;
  for (Eigen::Index j = 0; j < table.unit_count(); ++j) {
    std::vector<histreg::QuantileFunction> row;
    for (Eigen::Index k = 0; k < table.predictor_count(); ++k)
      row.push_back(table.predictor(k).unit(j));
    predicted.push_back(histreg::predict(report.model, row));
  }
  for (Eigen::Index j = 0; j < table.unit_count(); ++j) {
    report.predicted.push_back(histreg::to_histogram(predicted[static_cast<size_t>(j)]));
    report.mallows_sq_errors.push_back(
        histreg::mallows_sq(table.response().unit(j), predicted[static_cast<size_t>(j)]));
  }
  histreg::VariableColumn pred_col(std::move(predicted));
  report.rmse_m = histreg::rmse_m(table.response(), pred_col);
  std::tie(report.rmse_l, report.rmse_u) = histreg::rmse_bounds(table.response(), pred_col);

  emit(histreg::io::fit_report_to_json(report), out_path);
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
  json model_doc;
  try {
    model_doc = json::parse(histreg::io::read_file(model_path));
  } catch (const nlohmann::json::exception& e) {
    throw histreg::ParseError(model_path + ": " + e.what());
  }
  histreg::io::FitReport fitted = histreg::io::fit_report_from_json(model_doc);
  histreg::io::Dataset data = histreg::io::load_dataset(data_path);

  std::vector<std::vector<histreg::QuantileFunction>> columns;
  for (const auto& name : fitted.predictors) {
    std::vector<histreg::QuantileFunction> qs = data.column(name);
    columns.push_back(std::move(qs));
  }
  bool has_response =
      !fitted.response.empty() &&
      std::find(data.variables.begin(), data.variables.end(), fitted.response) !=
          data.variables.end();
  std::vector<histreg::QuantileFunction> observed;
  if (has_response) observed = data.column(fitted.response);

  json units = json::array();
  std::vector<histreg::QuantileFunction> predicted;
  for (Eigen::Index j = 0; j < data.unit_count(); ++j) {
    std::vector<histreg::QuantileFunction> row;
    for (const auto& col : columns) row.push_back(col[static_cast<size_t>(j)]);
    histreg::QuantileFunction pred = histreg::predict(fitted.model, row);
    json u{{"label", data.labels[static_cast<size_t>(j)]},
           {"predicted", histreg::io::histogram_to_json(histreg::to_histogram(pred))}};
    if (has_response)
      u["rmse"] = histreg::mallows(observed[static_cast<size_t>(j)], pred);
    units.push_back(u);
    predicted.push_back(std::move(pred));
  }

  json doc{{"schema", histreg::kSchemaVersion},
           {"version", histreg::kVersion},
           {"units", units}};
  if (has_response) {
    histreg::VariableColumn obs_col(std::move(observed));
    histreg::VariableColumn pred_col(std::move(predicted));
    auto [lo, up] = histreg::rmse_bounds(obs_col, pred_col);
    doc["rmse"] = json{{"m", histreg::rmse_m(obs_col, pred_col)}, {"l", lo}, {"u", up}};
  }
  emit(doc, out_path);
  return kExitOk;
}

int cmd_distance(const std::string& data_path, const std::string& var, const std::string& unit_a,
                 const std::string& unit_b, const std::string& metric) {
  histreg::io::Dataset data = histreg::io::load_dataset(data_path);
  auto find_unit = [&](const std::string& label) -> Eigen::Index {
    for (size_t j = 0; j < data.labels.size(); ++j)
      if (data.labels[j] == label) return static_cast<Eigen::Index>(j);
    throw histreg::InvalidArgument("unknown unit '" + label + "'");
  };
  std::vector<histreg::QuantileFunction> col = data.column(var);
  histreg::QuantileFunction a = col[static_cast<size_t>(find_unit(unit_a))];
  histreg::QuantileFunction b = col[static_cast<size_t>(find_unit(unit_b))];
  double d = metric == "wasserstein" ? histreg::wasserstein(a, b) : histreg::mallows(a, b);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g\n", d);
  std::cout << buf;
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
  json config_doc;
  try {
    config_doc = json::parse(histreg::io::read_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw histreg::ParseError(config_path + ": " + e.what());
  }
  histreg::ExperimentConfig cfg = histreg::io::experiment_config_from_json(config_doc);
  int max_threads = 0;
  if (const char* env = std::getenv("HISTREG_THREADS")) max_threads = std::atoi(env);
  histreg::ExperimentSummary summary = histreg::run_experiment(cfg, max_threads);
  emit(histreg::io::experiment_summary_to_json(summary, cfg), out_path);
  return kExitOk;
}

int cmd_validate(const std::string& data_path) {
  json doc;
  try {
    doc = json::parse(histreg::io::read_file(data_path));
  } catch (const nlohmann::json::exception& e) {
    std::cout << "1 issue\n- " << e.what() << "\n";
    return kExitInput;
  }
  std::vector<histreg::io::Diagnostic> issues = histreg::io::validate_dataset_json(doc);
  if (issues.empty()) {
    std::cout << "0 issues\n";
    return kExitOk;
  }
  std::cout << issues.size() << (issues.size() == 1 ? " issue\n" : " issues\n");
  for (const auto& d : issues) {
    std::cout << "- ";
    if (!d.unit.empty()) std::cout << "unit '" << d.unit << "'";
    if (!d.variable.empty()) std::cout << ", variable '" << d.variable << "'";
    if (!d.unit.empty() || !d.variable.empty()) std::cout << ": ";
    std::cout << d.message << "\n";
  }
  return kExitInput;
}

int cmd_convert(const std::string& csv_path, const std::string& out_path) {
  histreg::io::Dataset data = histreg::io::dataset_from_csv(histreg::io::read_file(csv_path));
  emit(histreg::io::dataset_to_json(data), out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear regression for histogram-valued variables"};
  app.set_version_flag("--version", histreg::kVersion);
  app.require_subcommand(1);

  std::string data_path, out_path, response, predictors, model_path, config_path, csv_path;
  std::string var, unit_a, unit_b, metric = "mallows";
  int equiprobable = 0, max_iter = 0;

  auto* fit = app.add_subcommand("fit", "Fit the model to a dataset");
  fit->add_option("--data", data_path, "Dataset JSON file")->required();
  fit->add_option("--response", response, "Response variable name")->required();
  fit->add_option("--predictors", predictors, "Comma-separated predictor names")->required();
  fit->add_option("--equiprobable", equiprobable,
                  "Requantize every value to K equal-weight pieces before fitting");
  fit->add_option("--max-iter", max_iter, "Cap on active-set iterations (default 100*d)");
  fit->add_option("--out", out_path, "Write the report here instead of stdout");

  auto* predict = app.add_subcommand("predict", "Predict with a fitted model");
  predict->add_option("--model", model_path, "Fit report JSON")->required();
  predict->add_option("--data", data_path, "Dataset JSON with the predictor variables")
      ->required();
  predict->add_option("--out", out_path, "Write predictions here instead of stdout");

  auto* distance = app.add_subcommand("distance", "Distance between two units of a variable");
  distance->add_option("--data", data_path, "Dataset JSON file")->required();
  distance->add_option("--var", var, "Variable name")->required();
  distance->add_option("--unit-a", unit_a, "First unit label")->required();
  distance->add_option("--unit-b", unit_b, "Second unit label")->required();
  distance->add_option("--metric", metric, "mallows (default) or wasserstein")
      ->check(CLI::IsMember({"mallows", "wasserstein"}));

  auto* simulate = app.add_subcommand("simulate", "Run a simulation experiment");
  simulate->add_option("--config", config_path, "Experiment config JSON")->required();
  simulate->add_option("--out", out_path, "Write the summary here instead of stdout");

  auto* validate = app.add_subcommand("validate", "List dataset invariant violations");
  validate->add_option("--data", data_path, "Dataset JSON file")->required();

  auto* convert = app.add_subcommand("convert", "Convert equiprobable-knot CSV to dataset JSON");
  convert->add_option("--csv", csv_path, "CSV with unit,variable,knot... rows")->required();
  convert->add_option("--out", out_path, "Write the dataset here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (fit->parsed())
      return cmd_fit(data_path, response, predictors,
                     equiprobable > 0 ? std::optional<int>(equiprobable) : std::nullopt,
                     max_iter, out_path);
    if (predict->parsed()) return cmd_predict(model_path, data_path, out_path);
    if (distance->parsed()) return cmd_distance(data_path, var, unit_a, unit_b, metric);
    if (simulate->parsed()) return cmd_simulate(config_path, out_path);
    if (validate->parsed()) return cmd_validate(data_path);
    if (convert->parsed()) return cmd_convert(csv_path, out_path);
  } catch (const histreg::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const histreg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
