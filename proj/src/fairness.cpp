#include "aldual/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace aldual {

Eigen::MatrixXd FlipTransform::apply(const Eigen::MatrixXd& protected_block) const {
  Eigen::MatrixXd out = protected_block;
  if (is_identity_) return out;
  if (column < 0 || column >= out.cols())
    throw ProblemError("flip transform '" + name + "' column out of range");
  if (rule == Rule::kToggle) {
    out.col(column) = (1.0 - protected_block.col(column).array()).matrix();
  } else {
    if (other < 0 || other >= out.cols())
      throw ProblemError("flip transform '" + name + "' partner column out of range");
    out.col(column) = protected_block.col(other);
    out.col(other) = protected_block.col(column);
  }
  return out;
}

FlipTransform FlipTransform::toggle(std::string name, Eigen::Index column) {
  FlipTransform t;
  t.name = std::move(name);
  t.rule = Rule::kToggle;
  t.column = column;
  return t;
}

FlipTransform FlipTransform::swap(std::string name, Eigen::Index reference,
                                  Eigen::Index other) {
  FlipTransform t;
  t.name = std::move(name);
  t.rule = Rule::kSwap;
  t.column = reference;
  t.other = other;
  return t;
}

FlipTransform FlipTransform::identity() {
  FlipTransform t;
  t.name = "identity";
  t.is_identity_ = true;
  return t;
}

std::vector<FlipTransform> default_flip_transforms(const TabularDataset& data) {
  std::vector<FlipTransform> out;
  for (std::size_t k = 0; k < data.protected_columns.size(); ++k) {
    const EncodedColumn& col = data.protected_columns[k];
    const ColumnSpec& spec = data.schema.columns[col.source];
    if (spec.encoding == Encoding::kBinary) {
      out.push_back(FlipTransform::toggle(spec.name, static_cast<Eigen::Index>(k)));
    } else if (col.category != spec.categories.front()) {
      // Reference level is the first indicator of this source column.
      std::size_t ref = k;
      while (ref > 0 && data.protected_columns[ref - 1].source == col.source) --ref;
      out.push_back(FlipTransform::swap(col.name, static_cast<Eigen::Index>(ref),
                                        static_cast<Eigen::Index>(k)));
    }
  }
  return out;
}

FlipTransform flip_transform_by_name(const TabularDataset& data, const std::string& name) {
  for (FlipTransform& t : default_flip_transforms(data))
    if (t.name == name) return t;
  throw ProblemError("no protected attribute flip named '" + name + "'");
}

void FairnessConstraintSpec::validate() const {
  if (!(threshold > 0.0)) throw ProblemError("fairness threshold c must be positive");
  if (transforms.empty()) throw ProblemError("fairness constraints need at least one transform");
  if (!(probability_floor > 0.0 && probability_floor < 0.5))
    throw ProblemError("probability floor must lie in (0, 0.5)");
}

namespace {

double clamp_prob(double p, double floor) { return std::clamp(p, floor, 1.0 - floor); }

// 1 where the clamp is inactive, so gradients vanish on clamped entries.
double clamp_slope(double p, double floor) {
  return (p > floor && p < 1.0 - floor) ? 1.0 : 0.0;
}

struct CrossEntropyEval {
  std::shared_ptr<const Eigen::MatrixXd> inputs;
  std::shared_ptr<const Eigen::VectorXi> labels;
  Mlp model;
  double floor;

  double value(const ParamVector& theta) const {
    const Eigen::MatrixXd probs = model.forward(theta, *inputs);
    CompensatedSum sum;
    for (Eigen::Index n = 0; n < probs.cols(); ++n)
      sum.add(-std::log(clamp_prob(probs((*labels)(n), n), floor)));
    return sum.value() / static_cast<double>(probs.cols());
  }

  ParamVector gradient(const ParamVector& theta) const {
    const ForwardCache cache = model.forward_cached(theta, *inputs);
    const Eigen::Index n_samples = cache.probs.cols();
    Eigen::MatrixXd dprobs = Eigen::MatrixXd::Zero(2, n_samples);
    for (Eigen::Index n = 0; n < n_samples; ++n) {
      const double p = cache.probs((*labels)(n), n);
      dprobs((*labels)(n), n) = -clamp_slope(p, floor) / clamp_prob(p, floor);
    }
    const Eigen::MatrixXd dlogits = softmax_backward(cache.probs, dprobs);
    return model.backward(theta, cache, dlogits) / static_cast<double>(n_samples);
  }
};

struct KlEval {
  std::shared_ptr<const Eigen::MatrixXd> inputs;
  std::shared_ptr<const Eigen::MatrixXd> flipped;
  Mlp model;
  double threshold;
  double floor;

  double value(const ParamVector& theta) const {
    const Eigen::MatrixXd p = model.forward(theta, *inputs);
    const Eigen::MatrixXd q = model.forward(theta, *flipped);
    CompensatedSum sum;
    for (Eigen::Index n = 0; n < p.cols(); ++n)
      sum.add(clamped_kl(p.col(n), q.col(n), floor));
    return sum.value() / static_cast<double>(p.cols()) - threshold;
  }

  ParamVector gradient(const ParamVector& theta) const {
    const ForwardCache pc = model.forward_cached(theta, *inputs);
    const ForwardCache qc = model.forward_cached(theta, *flipped);
    const Eigen::Index n_samples = pc.probs.cols();
    Eigen::MatrixXd dp(2, n_samples);
    Eigen::MatrixXd dq(2, n_samples);
    for (Eigen::Index n = 0; n < n_samples; ++n) {
      for (Eigen::Index k = 0; k < 2; ++k) {
        const double p = clamp_prob(pc.probs(k, n), floor);
        const double q = clamp_prob(qc.probs(k, n), floor);
        dp(k, n) = clamp_slope(pc.probs(k, n), floor) * (std::log(p / q) + 1.0);
        dq(k, n) = -clamp_slope(qc.probs(k, n), floor) * p / q;
      }
    }
    ParamVector grad = model.backward(theta, pc, softmax_backward(pc.probs, dp));
    grad += model.backward(theta, qc, softmax_backward(qc.probs, dq));
    return grad / static_cast<double>(n_samples);
  }
};

void check_labels(const TabularDataset& data) {
  if (data.rows() == 0) throw ProblemError("empty dataset");
  if ((data.labels.array() < 0).any() || (data.labels.array() > 1).any())
    throw ProblemError("labels must lie in {0, 1}");
}

}  // namespace

double clamped_kl(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                  double probability_floor) {
  double kl = 0.0;
  for (Eigen::Index k = 0; k < 2; ++k) {
    const double pk = clamp_prob(p(k), probability_floor);
    const double qk = clamp_prob(q(k), probability_floor);
    kl += pk * std::log(pk / qk);
  }
  return kl;
}

RiskFunctional cross_entropy_risk(const Mlp& model, const TabularDataset& data,
                                  double probability_floor) {
  check_labels(data);
  auto eval = std::make_shared<CrossEntropyEval>(CrossEntropyEval{
      std::make_shared<const Eigen::MatrixXd>(data.model_inputs()),
      std::make_shared<const Eigen::VectorXi>(data.labels), model, probability_floor});
  RiskFunctional r;
  r.name = "cross_entropy";
  r.kind = RiskKind::kEmpirical;
  r.sample_count = static_cast<std::size_t>(data.rows());
  r.range = LossRange{0.0, -std::log(probability_floor)};
  r.value = [eval](const ParamVector& t) { return eval->value(t); };
  r.gradient = [eval](const ParamVector& t) { return eval->gradient(t); };
  return r;
}

RiskFunctional kl_fairness_risk(const Mlp& model, const TabularDataset& data,
                                const FlipTransform& rho, double threshold,
                                double probability_floor) {
  if (data.rows() == 0) throw ProblemError("empty dataset");
  if (data.protected_attrs.cols() == 0)
    throw ProblemError("dataset has no protected block");
  auto eval = std::make_shared<KlEval>(KlEval{
      std::make_shared<const Eigen::MatrixXd>(data.model_inputs()),
      std::make_shared<const Eigen::MatrixXd>(
          data.model_inputs(rho.apply(data.protected_attrs))),
      model, threshold, probability_floor});
  RiskFunctional r;
  r.name = "kl_" + rho.name;
  r.kind = RiskKind::kEmpirical;
  r.sample_count = static_cast<std::size_t>(data.rows());
  r.range = LossRange{-threshold, -2.0 * std::log(probability_floor) - threshold};
  r.value = [eval](const ParamVector& t) { return eval->value(t); };
  r.gradient = [eval](const ParamVector& t) { return eval->gradient(t); };
  return r;
}

ConstrainedProblem make_fairness_problem(const Mlp& model, const TabularDataset& data,
                                         const FairnessConstraintSpec& spec) {
  spec.validate();
  ConstrainedProblem problem;
  problem.objective = cross_entropy_risk(model, data, spec.probability_floor);
  for (const FlipTransform& rho : spec.transforms)
    problem.constraints.push_back(
        kl_fairness_risk(model, data, rho, spec.threshold, spec.probability_floor));
  problem.domain = ParamDomain(model.num_params());
  return problem;
}

Eigen::VectorXi predict(const Mlp& model, const ParamVector& theta,
                        const Eigen::MatrixXd& inputs) {
  const Eigen::MatrixXd probs = model.forward(theta, inputs);
  return (probs.row(1).array() > probs.row(0).array()).cast<int>().transpose();
}

double accuracy(const Mlp& model, const ParamVector& theta, const TabularDataset& data) {
  if (data.rows() == 0) throw ProblemError("accuracy of an empty dataset");
  const Eigen::VectorXi pred = predict(model, theta, data.model_inputs());
  return static_cast<double>((pred.array() == data.labels.array()).count()) /
         static_cast<double>(data.rows());
}

double counterfactual_flip_rate(const Mlp& model, const ParamVector& theta,
                                const TabularDataset& data, const FlipTransform& rho) {
  if (data.rows() == 0) throw ProblemError("flip rate of an empty dataset");
  const Eigen::VectorXi a = predict(model, theta, data.model_inputs());
  const Eigen::VectorXi b =
      predict(model, theta, data.model_inputs(rho.apply(data.protected_attrs)));
  return static_cast<double>((a.array() != b.array()).count()) /
         static_cast<double>(data.rows());
}

namespace {

// Draws one archive index per sample, then scores each drawn iterate once.
Eigen::VectorXi randomized_predict(const Mlp& model, const std::vector<std::size_t>& draws,
                                   const std::map<std::size_t, ParamVector>& thetas,
                                   const Eigen::MatrixXd& inputs) {
  Eigen::VectorXi out(inputs.cols());
  for (const auto& [index, theta] : thetas) {
    std::vector<Eigen::Index> cols;
    for (std::size_t n = 0; n < draws.size(); ++n)
      if (draws[n] == index) cols.push_back(static_cast<Eigen::Index>(n));
    Eigen::MatrixXd batch(inputs.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
      batch.col(static_cast<Eigen::Index>(k)) = inputs.col(cols[k]);
    const Eigen::VectorXi pred = predict(model, theta, batch);
    for (std::size_t k = 0; k < cols.size(); ++k)
      out(cols[k]) = pred(static_cast<Eigen::Index>(k));
  }
  return out;
}

void draw_all(RandomizedPredictor& predictor, Eigen::Index n,
              std::vector<std::size_t>& draws, std::map<std::size_t, ParamVector>& thetas) {
  draws.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const ParamVector& theta = predictor.draw();
    draws[static_cast<std::size_t>(k)] = predictor.last_index();
    thetas.emplace(predictor.last_index(), theta);
  }
}

}  // namespace

double randomized_accuracy(const Mlp& model, RandomizedPredictor& predictor,
                           const TabularDataset& data) {
  if (data.rows() == 0) throw ProblemError("accuracy of an empty dataset");
  std::vector<std::size_t> draws;
  std::map<std::size_t, ParamVector> thetas;
  draw_all(predictor, data.rows(), draws, thetas);
  const Eigen::VectorXi pred =
      randomized_predict(model, draws, thetas, data.model_inputs());
  return static_cast<double>((pred.array() == data.labels.array()).count()) /
         static_cast<double>(data.rows());
}

double randomized_flip_rate(const Mlp& model, RandomizedPredictor& predictor,
                            const TabularDataset& data, const FlipTransform& rho) {
  if (data.rows() == 0) throw ProblemError("flip rate of an empty dataset");
  std::vector<std::size_t> draws;
  std::map<std::size_t, ParamVector> thetas;
  draw_all(predictor, data.rows(), draws, thetas);
  const Eigen::VectorXi a =
      randomized_predict(model, draws, thetas, data.model_inputs());
  const Eigen::VectorXi b = randomized_predict(
      model, draws, thetas, data.model_inputs(rho.apply(data.protected_attrs)));
  return static_cast<double>((a.array() != b.array()).count()) /
         static_cast<double>(data.rows());
}

}  // namespace aldual
