#include "histreg/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "histreg/version.hpp"

namespace histreg {
namespace io {

namespace {

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& x : j) {
    if (!x.is_number()) throw UnboundedBin("non-numeric bound or weight");
    v[i++] = x.get<double>();
  }
  return v;
}

json vector_to_json(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ParseError(msg);
}

}  // namespace

Eigen::Index Dataset::variable_index(const std::string& name) const {
  auto it = std::find(variables.begin(), variables.end(), name);
  if (it == variables.end()) throw InvalidArgument("unknown variable '" + name + "'");
  return static_cast<Eigen::Index>(it - variables.begin());
}

std::vector<QuantileFunction> Dataset::column(const std::string& name) const {
  Eigen::Index k = variable_index(name);
  std::vector<QuantileFunction> qs;
  qs.reserve(values.size());
  for (const auto& row : values) qs.push_back(to_quantile(row[static_cast<size_t>(k)]));
  return qs;
}

json histogram_to_json(const HistogramValue& h) {
  json bins = json::array();
  for (Eigen::Index i = 0; i < h.bin_count(); ++i)
    bins.push_back(json::array({h.lower()[i], h.upper()[i]}));
  return json{{"bins", bins}, {"weights", vector_to_json(h.weights())}};
}

HistogramValue histogram_from_json(const json& j) {
  require(j.is_object() && j.contains("bins") && j.contains("weights"),
          "histogram value needs 'bins' and 'weights'");
  const json& bins = j.at("bins");
  require(bins.is_array(), "'bins' must be an array");
  Vector lo(static_cast<Eigen::Index>(bins.size()));
  Vector hi(static_cast<Eigen::Index>(bins.size()));
  Eigen::Index i = 0;
  for (const auto& b : bins) {
    require(b.is_array() && b.size() == 2, "each bin must be a [lower, upper] pair");
    if (!b[0].is_number() || !b[1].is_number())
      throw UnboundedBin("bin bound is not a finite number");
    lo[i] = b[0].get<double>();
    hi[i] = b[1].get<double>();
    ++i;
  }
  return HistogramValue(lo, hi, vector_from_json(j.at("weights")));
}

json dataset_to_json(const Dataset& d) {
  json units = json::array();
  for (size_t j = 0; j < d.labels.size(); ++j) {
    json vals = json::object();
    for (size_t k = 0; k < d.variables.size(); ++k)
      vals[d.variables[k]] = histogram_to_json(d.values[j][k]);
    units.push_back(json{{"label", d.labels[j]}, {"values", vals}});
  }
  json vars = json::array();
  for (const auto& v : d.variables) vars.push_back(v);
  return json{{"schema", kSchemaVersion}, {"variables", vars}, {"units", units}};
}

Dataset dataset_from_json(const json& j) {
  require(j.is_object(), "dataset document must be an object");
  require(j.contains("variables") && j.contains("units"),
          "dataset needs 'variables' and 'units'");
  Dataset d;
  for (const auto& v : j.at("variables")) d.variables.push_back(v.get<std::string>());
  require(!d.variables.empty(), "dataset declares no variables");
  for (const auto& u : j.at("units")) {
    require(u.contains("label") && u.contains("values"), "unit needs 'label' and 'values'");
    std::string label = u.at("label").is_string() ? u.at("label").get<std::string>()
                                                  : u.at("label").dump();
    const json& vals = u.at("values");
    std::vector<HistogramValue> row;
    for (const auto& name : d.variables) {
      require(vals.contains(name),
              "unit '" + label + "' does not define variable '" + name + "'");
      try {
        row.push_back(histogram_from_json(vals.at(name)));
      } catch (const Error& e) {
        throw ParseError("unit '" + label + "', variable '" + name + "': " + e.what());
      }
    }
    d.labels.push_back(std::move(label));
    d.values.push_back(std::move(row));
  }
  require(!d.labels.empty(), "dataset has no units");
  return d;
}

Dataset load_dataset(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return dataset_from_json(j);
}

std::vector<Diagnostic> validate_dataset_json(const json& j) {
  std::vector<Diagnostic> out;
  if (!j.is_object() || !j.contains("variables") || !j.contains("units")) {
    out.push_back({"", "", "document is not a dataset (needs 'variables' and 'units')"});
    return out;
  }
  std::vector<std::string> variables;
  for (const auto& v : j.at("variables"))
    variables.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  size_t index = 0;
  for (const auto& u : j.at("units")) {
    std::string label = "unit #" + std::to_string(index++);
    if (u.contains("label"))
      label = u.at("label").is_string() ? u.at("label").get<std::string>() : u.at("label").dump();
    if (!u.contains("values")) {
      out.push_back({label, "", "missing 'values'"});
      continue;
    }
    for (const auto& name : variables) {
      if (!u.at("values").contains(name)) {
        out.push_back({label, name, "variable not defined for this unit"});
        continue;
      }
      try {
        histogram_from_json(u.at("values").at(name));
      } catch (const Error& e) {
        out.push_back({label, name, e.what()});
      }
    }
  }
  return out;
}

json fit_report_to_json(const FitReport& r) {
  json preds = json::array();
  for (const auto& p : r.predictors) preds.push_back(p);
  json units = json::array();
  for (size_t j = 0; j < r.unit_labels.size(); ++j) {
    units.push_back(json{{"label", r.unit_labels[j]},
                         {"predicted", histogram_to_json(r.predicted[j])},
                         {"mallows_sq_error", r.mallows_sq_errors[j]}});
  }
  return json{{"schema", kSchemaVersion},
              {"version", kVersion},
              {"response", r.response},
              {"predictors", preds},
              {"coefficients",
               json{{"alphas", vector_to_json(r.model.alphas)},
                    {"betas", vector_to_json(r.model.betas)},
                    {"gamma", r.model.gamma}}},
              {"omega", r.model.omega},
              {"se", r.model.se},
              {"kkt_residual", r.model.kkt_residual},
              {"partition", vector_to_json(r.model.partition)},
              {"rmse", json{{"m", r.rmse_m}, {"l", r.rmse_l}, {"u", r.rmse_u}}},
              {"units", units}};
}

FitReport fit_report_from_json(const json& j) {
  require(j.is_object() && j.contains("coefficients") && j.contains("partition"),
          "not a fit report");
  FitReport r;
  r.response = j.value("response", std::string());
  for (const auto& p : j.at("predictors")) r.predictors.push_back(p.get<std::string>());
  const json& co = j.at("coefficients");
  r.model.alphas = vector_from_json(co.at("alphas"));
  r.model.betas = vector_from_json(co.at("betas"));
  r.model.gamma = co.at("gamma").get<double>();
  r.model.omega = j.value("omega", 0.0);
  r.model.se = j.value("se", 0.0);
  r.model.kkt_residual = j.value("kkt_residual", 0.0);
  r.model.partition = vector_from_json(j.at("partition"));
  if (j.contains("rmse")) {
    r.rmse_m = j.at("rmse").value("m", 0.0);
    r.rmse_l = j.at("rmse").value("l", 0.0);
    r.rmse_u = j.at("rmse").value("u", 0.0);
  }
  if (j.contains("units")) {
    for (const auto& u : j.at("units")) {
      r.unit_labels.push_back(u.at("label").get<std::string>());
      r.predicted.push_back(histogram_from_json(u.at("predicted")));
      r.mallows_sq_errors.push_back(u.value("mallows_sq_error", 0.0));
    }
  }
  return r;
}

namespace {

const std::map<std::string, DistFamily>& family_names() {
  static const std::map<std::string, DistFamily> names = {
      {"uniform", DistFamily::uniform},
      {"normal", DistFamily::normal},
      {"lognormal", DistFamily::lognormal},
      {"neg_lognormal", DistFamily::neg_lognormal},
      {"chisq", DistFamily::chisq},
      {"mixture", DistFamily::mixture},
  };
  return names;
}

std::string family_to_string(DistFamily f) {
  for (const auto& [name, fam] : family_names())
    if (fam == f) return name;
  throw InvalidArgument("unknown distribution family");
}

DistributionSpec default_spec(DistFamily f) {
  switch (f) {
    case DistFamily::uniform: return DistributionSpec::uniform();
    case DistFamily::normal: return DistributionSpec::normal();
    case DistFamily::lognormal: return DistributionSpec::lognormal();
    case DistFamily::neg_lognormal: return DistributionSpec::neg_lognormal();
    case DistFamily::chisq: return DistributionSpec::chisq();
    case DistFamily::mixture: return DistributionSpec::mixture();
  }
  throw InvalidArgument("unknown distribution family");
}

DistributionSpec spec_from_json(const json& j) {
  if (j.is_string()) {
    auto it = family_names().find(j.get<std::string>());
    require(it != family_names().end(), "unknown distribution '" + j.get<std::string>() + "'");
    return default_spec(it->second);
  }
  require(j.is_object() && j.contains("family"), "distribution must be a name or an object");
  auto it = family_names().find(j.at("family").get<std::string>());
  require(it != family_names().end(), "unknown distribution family");
  DistributionSpec spec = default_spec(it->second);
  auto range = [](const json& r) {
    if (r.is_number()) return Range{r.get<double>(), r.get<double>()};
    return Range{r.at(0).get<double>(), r.at(1).get<double>()};
  };
  if (j.contains("first")) spec.first = range(j.at("first"));
  if (j.contains("second")) spec.second = range(j.at("second"));
  return spec;
}

json spec_to_json(const DistributionSpec& s) {
  return json{{"family", family_to_string(s.family)},
              {"first", json::array({s.first.min, s.first.max})},
              {"second", json::array({s.second.min, s.second.max})}};
}

std::string linearity_to_string(LinearityLevel level) {
  switch (level) {
    case LinearityLevel::high: return "high";
    case LinearityLevel::moderate: return "moderate";
    case LinearityLevel::low: return "low";
  }
  throw InvalidArgument("unknown linearity level");
}

LinearityLevel linearity_from_string(const std::string& s) {
  if (s == "high") return LinearityLevel::high;
  if (s == "moderate") return LinearityLevel::moderate;
  if (s == "low") return LinearityLevel::low;
  throw ParseError("unknown linearity level '" + s + "'");
}

json param_stats_to_json(const ParamStats& s) {
  return json{{"mean", s.mean}, {"sd", s.sd}, {"mse", s.mse}};
}

json moments_to_json(const Moments& m) { return json{{"mean", m.mean}, {"sd", m.sd}}; }

}  // namespace

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json dists = json::array();
  for (const auto& s : cfg.dist_specs) dists.push_back(spec_to_json(s));
  return json{{"schema", kSchemaVersion},
              {"true_params",
               json{{"alphas", vector_to_json(cfg.true_params.alphas)},
                    {"betas", vector_to_json(cfg.true_params.betas)},
                    {"gamma", cfg.true_params.gamma}}},
              {"distributions", dists},
              {"linearity", linearity_to_string(cfg.linearity)},
              {"m", cfg.m},
              {"bins", cfg.bins},
              {"microdata_n", cfg.microdata_n},
              {"replications", cfg.replications},
              {"base_seed", cfg.base_seed}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  require(j.is_object() && j.contains("true_params") && j.contains("distributions"),
          "config needs 'true_params' and 'distributions'");
  ExperimentConfig cfg;
  const json& tp = j.at("true_params");
  cfg.true_params.alphas = vector_from_json(tp.at("alphas"));
  cfg.true_params.betas = vector_from_json(tp.at("betas"));
  cfg.true_params.gamma = tp.at("gamma").get<double>();
  for (const auto& d : j.at("distributions")) cfg.dist_specs.push_back(spec_from_json(d));
  if (j.contains("linearity")) cfg.linearity = linearity_from_string(j.at("linearity"));
  cfg.m = j.value("m", cfg.m);
  cfg.bins = j.value("bins", cfg.bins);
  cfg.microdata_n = j.value("microdata_n", cfg.microdata_n);
  cfg.replications = j.value("replications", cfg.replications);
  cfg.base_seed = j.value("base_seed", cfg.base_seed);
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("invalid experiment config: ") + e.what());
  }
  return cfg;
}

json experiment_summary_to_json(const ExperimentSummary& s, const ExperimentConfig& cfg) {
  json alphas = json::array(), betas = json::array();
  for (const auto& a : s.alphas) alphas.push_back(param_stats_to_json(a));
  for (const auto& b : s.betas) betas.push_back(param_stats_to_json(b));
  return json{{"schema", kSchemaVersion},
              {"version", kVersion},
              {"config", experiment_config_to_json(cfg)},
              {"parameters",
               json{{"alphas", alphas}, {"betas", betas}, {"gamma", param_stats_to_json(s.gamma)}}},
              {"omega", moments_to_json(s.omega)},
              {"rmse_m", moments_to_json(s.rmse_m)},
              {"rmse_l", moments_to_json(s.rmse_l)},
              {"rmse_u", moments_to_json(s.rmse_u)},
              {"replications_completed", s.replications_completed},
              {"failures", s.failures}};
}

Dataset dataset_from_csv(const std::string& text) {
  // unit,variable,k0,...,kK : K+1 knots bounding K equal-weight bins.
  std::map<std::string, std::map<std::string, HistogramValue>> rows;
  std::vector<std::string> unit_order, var_order;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string unit, var, field;
    if (!std::getline(ls, unit, ',') || !std::getline(ls, var, ','))
      throw ParseError("line " + std::to_string(lineno) + ": expected unit,variable,knots...");
    std::vector<double> knots;
    while (std::getline(ls, field, ',')) {
      try {
        knots.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) + ": bad number '" + field + "'");
      }
    }
    if (knots.size() < 2)
      throw ParseError("line " + std::to_string(lineno) + ": need at least two knots");
    Eigen::Index k = static_cast<Eigen::Index>(knots.size()) - 1;
    Vector lo(k), hi(k), w(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      lo[i] = knots[static_cast<size_t>(i)];
      hi[i] = knots[static_cast<size_t>(i) + 1];
      w[i] = 1.0 / static_cast<double>(k);
    }
    w[k - 1] = 1.0 - w.head(k - 1).sum();
    if (rows.find(unit) == rows.end()) unit_order.push_back(unit);
    if (std::find(var_order.begin(), var_order.end(), var) == var_order.end())
      var_order.push_back(var);
    try {
      rows[unit].emplace(var, HistogramValue(lo, hi, w));
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  Dataset d;
  d.variables = var_order;
  for (const auto& unit : unit_order) {
    std::vector<HistogramValue> row;
    for (const auto& var : var_order) {
      auto it = rows[unit].find(var);
      if (it == rows[unit].end())
        throw ParseError("unit '" + unit + "' does not define variable '" + var + "'");
      row.push_back(it->second);
    }
    d.labels.push_back(unit);
    d.values.push_back(std::move(row));
  }
  if (d.labels.empty()) throw ParseError("empty CSV");
  return d;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << contents;
}

}  // namespace io
}  // namespace histreg
