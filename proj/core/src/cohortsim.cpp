#include "itc/cohortsim.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "itc/coxph.hpp"

namespace itc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

void OutcomeModelSpec::validate() const {
  if (!(baseline_rate > 0.0) || !std::isfinite(baseline_rate)) {
    throw std::invalid_argument("outcome model: baseline_rate must be positive");
  }
  if (!(censoring_rate >= 0.0) || !std::isfinite(censoring_rate)) {
    throw std::invalid_argument("outcome model: censoring_rate must be non-negative");
  }
  if (!std::isfinite(treatment_log_hr)) {
    throw std::invalid_argument("outcome model: treatment_log_hr must be finite");
  }
  std::set<std::string> seen;
  for (const auto& c : covariates) {
    if (c.name.empty()) throw std::invalid_argument("outcome model: covariate with empty name");
    if (!seen.insert(c.name).second) {
      throw std::invalid_argument("outcome model: duplicate covariate name '" + c.name + "'");
    }
    if (!std::isfinite(c.prognostic_coef) || !std::isfinite(c.interaction_coef)) {
      throw std::invalid_argument("outcome model: coefficients of '" + c.name + "' must be finite");
    }
  }
}

std::vector<std::string> OutcomeModelSpec::covariate_names() const {
  std::vector<std::string> names;
  names.reserve(covariates.size());
  for (const auto& c : covariates) names.push_back(c.name);
  return names;
}

Index TrialData::column(const std::string& name) const {
  for (std::size_t k = 0; k < covariate_names.size(); ++k) {
    if (covariate_names[k] == name) return static_cast<Index>(k);
  }
  throw std::out_of_range("trial has no covariate named '" + name + "'");
}

void TrialData::validate() const {
  const Index n = time.size();
  if (X.rows() != n || trt.size() != n || status.size() != n) {
    throw std::invalid_argument("trial data: parallel vectors differ in length");
  }
  if (X.cols() != static_cast<Index>(covariate_names.size())) {
    throw std::invalid_argument("trial data: covariate names do not match matrix columns");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(time[i] > 0.0) || !std::isfinite(time[i])) {
      throw std::invalid_argument("trial data: times must be positive");
    }
    if ((trt[i] != 0 && trt[i] != 1) || (status[i] != 0 && status[i] != 1)) {
      throw std::invalid_argument("trial data: trt and status must be binary");
    }
  }
}

MatrixXd simulate_covariates(const std::vector<CovariateSpec>& specs, Index n,
                             RandomStream& stream) {
  if (n < 1) throw std::invalid_argument("simulate_covariates: n must be positive");
  MatrixXd X(n, static_cast<Index>(specs.size()));
  for (std::size_t k = 0; k < specs.size(); ++k) {
    for (Index i = 0; i < n; ++i) X(i, static_cast<Index>(k)) = stream.draw(specs[k].marginal);
  }
  return X;
}

VectorXd linear_predictor(const MatrixXd& X, const VectorXi& trt, const OutcomeModelSpec& model) {
  const auto K = static_cast<Index>(model.covariates.size());
  if (X.cols() != K) {
    throw std::invalid_argument("linear_predictor: covariate matrix has " +
                                std::to_string(X.cols()) + " columns, model has " +
                                std::to_string(K));
  }
  if (trt.size() != X.rows()) {
    throw std::invalid_argument("linear_predictor: treatment vector length mismatch");
  }
  VectorXd prognostic(K), interaction(K);
  for (Index k = 0; k < K; ++k) {
    prognostic[k] = model.covariates[static_cast<std::size_t>(k)].prognostic_coef;
    interaction[k] = model.covariates[static_cast<std::size_t>(k)].interaction_coef;
  }
  const VectorXd effect = (X * interaction).array() + model.treatment_log_hr;
  return X * prognostic + effect.cwiseProduct(trt.cast<double>());
}

double latent_event_time(double u, double lp, double baseline_rate) {
  return -std::log(u) / (baseline_rate * std::exp(lp));
}

SurvivalOutcome simulate_survival(const VectorXd& lp, const OutcomeModelSpec& model,
                                  RandomStream& stream) {
  if (!(model.baseline_rate > 0.0)) {
    throw std::invalid_argument("simulate_survival: baseline_rate must be positive");
  }
  const Index n = lp.size();
  SurvivalOutcome out{VectorXd(n), VectorXi::Ones(n)};
  for (Index i = 0; i < n; ++i) out.time[i] = latent_event_time(stream.uniform(), lp[i], model.baseline_rate);
  if (model.censoring_rate > 0.0) {
    for (Index i = 0; i < n; ++i) {
      const double censor = exponential_from_uniform(stream.uniform(), model.censoring_rate);
      if (censor < out.time[i]) {
        out.time[i] = censor;
        out.status[i] = 0;
      }
    }
  }
  return out;
}

TrialData simulate_trial(const OutcomeModelSpec& model, Index n, RandomStream& stream) {
  model.validate();
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("simulate_trial: n must be a positive even number (1:1 allocation)");
  }
  TrialData trial;
  trial.covariate_names = model.covariate_names();
  trial.X = simulate_covariates(model.covariates, n, stream);
  trial.trt = VectorXi::Zero(n);
  trial.trt.head(n / 2).setOnes();
  SurvivalOutcome s = simulate_survival(linear_predictor(trial.X, trial.trt, model), model, stream);
  trial.time = std::move(s.time);
  trial.status = std::move(s.status);
  return trial;
}

double selection_probability(double age, double iss, const SelectionModelSpec& sel) {
  const double logit = sel.theta_age * (age - sel.age_center) + sel.theta_iss * iss;
  return 1.0 / (1.0 + std::exp(-logit));
}

VectorXi assign_study_membership(const MatrixXd& X, const std::vector<std::string>& names,
                                 const SelectionModelSpec& sel, RandomStream& stream) {
  if (X.cols() != static_cast<Index>(names.size())) {
    throw std::invalid_argument("assign_study_membership: names do not match columns");
  }
  auto find = [&](const std::string& wanted) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == wanted) return static_cast<Index>(k);
    }
    throw std::invalid_argument("assign_study_membership: missing required column '" + wanted + "'");
  };
  const Index age = find(sel.age_column);
  const Index iss = find(sel.iss_column);
  VectorXi membership(X.rows());
  for (Index i = 0; i < X.rows(); ++i) {
    const double p = selection_probability(X(i, age), X(i, iss), sel);
    membership[i] = bernoulli_from_uniform(stream.uniform(), p) ? 1 : 0;
  }
  return membership;
}

TrialData subset(const TrialData& trial, const VectorXi& mask, int keep) {
  if (mask.size() != trial.size()) throw std::invalid_argument("subset: mask length mismatch");
  std::vector<Index> rows;
  for (Index i = 0; i < mask.size(); ++i) {
    if (mask[i] == keep) rows.push_back(i);
  }
  const auto m = static_cast<Index>(rows.size());
  TrialData out;
  out.covariate_names = trial.covariate_names;
  out.X.resize(m, trial.X.cols());
  out.trt.resize(m);
  out.time.resize(m);
  out.status.resize(m);
  for (Index r = 0; r < m; ++r) {
    const Index i = rows[static_cast<std::size_t>(r)];
    out.X.row(r) = trial.X.row(i);
    out.trt[r] = trial.trt[i];
    out.time[r] = trial.time[i];
    out.status[r] = trial.status[i];
  }
  return out;
}

AggregateSummary summarize_aggregate(const TrialData& trial) {
  trial.validate();
  if (trial.size() == 0) throw std::invalid_argument("summarize_aggregate: empty trial");
  AggregateSummary s;
  s.covariate_names = trial.covariate_names;
  s.n = trial.size();
  s.mean = trial.X.colwise().mean().transpose();

  const VectorXd treated = trial.trt.cast<double>();
  const VectorXd control = VectorXd::Ones(trial.size()) - treated;
  const double n_treated = treated.sum();
  const double n_control = control.sum();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.mean_treated = n_treated > 0 ? VectorXd(trial.X.transpose() * treated / n_treated)
                                 : VectorXd::Constant(trial.X.cols(), nan);
  s.mean_control = n_control > 0 ? VectorXd(trial.X.transpose() * control / n_control)
                                 : VectorXd::Constant(trial.X.cols(), nan);

  const CoxFit fit = fit_cox(SurvivalSample::unweighted(trial.time, trial.status, treated));
  s.marginal_log_hr = fit.beta[0];
  s.marginal_se = fit.se_model[0];
  return s;
}

void write_trial_csv(std::ostream& out, const TrialData& trial) {
  trial.validate();
  out << "subject_id";
  for (const auto& name : trial.covariate_names) out << ',' << name;
  out << ",trt,time,status\n";
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < trial.size(); ++i) {
    out << (i + 1);
    for (Index k = 0; k < trial.X.cols(); ++k) out << ',' << trial.X(i, k);
    out << ',' << trial.trt[i] << ',' << trial.time[i] << ',' << trial.status[i] << '\n';
  }
  out.precision(old_precision);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::invalid_argument("trial CSV line " + std::to_string(line_no) + ": not a number: '" +
                                s + "'");
  }
  return v;
}

}  // namespace

TrialData read_trial_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trial CSV: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header.front() != "subject_id" || header[header.size() - 3] != "trt" ||
      header[header.size() - 2] != "time" || header.back() != "status") {
    throw std::invalid_argument("trial CSV: header must be subject_id,<covariates...>,trt,time,status");
  }
  const std::size_t K = header.size() - 4;

  TrialData trial;
  trial.covariate_names.assign(header.begin() + 1, header.begin() + 1 + static_cast<std::ptrdiff_t>(K));
  std::vector<double> x, time;
  std::vector<int> trt, status;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("trial CSV line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields");
    }
    for (std::size_t k = 0; k < K; ++k) x.push_back(parse_number(fields[k + 1], line_no));
    trt.push_back(static_cast<int>(parse_number(fields[K + 1], line_no)));
    time.push_back(parse_number(fields[K + 2], line_no));
    status.push_back(static_cast<int>(parse_number(fields[K + 3], line_no)));
  }
  const auto n = static_cast<Index>(time.size());
  trial.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      x.data(), n, static_cast<Index>(K));
  trial.trt = Eigen::Map<const VectorXi>(trt.data(), n);
  trial.time = Eigen::Map<const VectorXd>(time.data(), n);
  trial.status = Eigen::Map<const VectorXi>(status.data(), n);
  trial.validate();
  return trial;
}

}  // namespace itc
