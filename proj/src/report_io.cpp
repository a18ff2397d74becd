#include "aldual/report_io.hpp"

#include <fstream>

#include "aldual/run_config.hpp"

namespace aldual {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

json duality_report_json(const DualityReport& r) {
  return {{"inf_P", r.inf_P},
          {"primal_argmin", vector_json(r.primal_argmin)},
          {"sup_D_augmented", r.sup_D_augmented},
          {"sup_D_standard", r.sup_D_standard},
          {"gap_augmented", r.gap_augmented},
          {"gap_standard", r.gap_standard},
          {"lambda_bar", vector_json(r.lambda_bar)},
          {"alpha_bar", r.alpha_bar},
          {"lambda_bar_standard", vector_json(r.lambda_bar_standard)},
          {"resolution", r.resolution},
          {"weak_duality_violations", r.weak_duality_violations},
          {"dominance_violations", r.dominance_violations},
          {"alpha_monotonicity_violations", r.alpha_monotonicity_violations}};
}

json stability_json(const StabilityCheck& c) {
  return {{"pass", c.pass},
          {"max_violation", c.max_violation},
          {"points_checked", c.points_checked}};
}

json dual_surface_json(const DualSurface& s) {
  return {{"lambdas", matrix_json(s.lambdas)},
          {"alphas", vector_json(s.alphas)},
          {"augmented", matrix_json(s.augmented)},
          {"standard", vector_json(s.standard)}};
}

json pacc_bound_json(const PaccBound& b) {
  return {{"delta", b.delta},
          {"zeta", vector_json(b.zeta)},
          {"zeta_bar", b.zeta_bar},
          {"delta_lambda", b.delta_lambda},
          {"delta_alpha", b.delta_alpha},
          {"num_constraints", b.num_constraints},
          {"optimality_bound", b.optimality_bound},
          {"feasibility_bounds", vector_json(b.feasibility_bounds)},
          {"total_confidence", b.total_confidence}};
}

json harness_report_json(const HarnessReport& r) {
  json rows = json::array();
  for (const HarnessRow& row : r.rows) {
    rows.push_back({{"samples", row.samples},
                    {"trials", row.trials},
                    {"failures", row.failures},
                    {"median_abs_gap", row.median_abs_gap},
                    {"median_max_violation", row.median_max_violation},
                    {"median_constraint_deviation", row.median_constraint_deviation},
                    {"median_optimality_bound", row.median_optimality_bound},
                    {"zeta", vector_json(row.zeta)},
                    {"fraction_feasible_within_zeta", row.fraction_feasible_within_zeta},
                    {"fraction_within_bounds", row.fraction_within_bounds},
                    {"abs_gaps", row.abs_gaps},
                    {"max_violations", row.max_violations}});
  }
  return {{"note", r.note},
          {"delta", r.delta},
          {"target_confidence", r.target_confidence},
          {"num_constraints", r.num_constraints},
          {"monte_carlo_samples", r.monte_carlo_samples},
          {"population_optimum", r.population_optimum},
          {"analytic_optimum", r.analytic_optimum},
          {"monte_carlo_error", r.monte_carlo_error},
          {"lambda_star", vector_json(r.lambda_star)},
          {"alpha_star", r.alpha_star},
          {"rows", rows}};
}

json trace_record_json(const TraceRecord& t) {
  json j;
  j["iter"] = t.iter;
  j["lambda"] = vector_json(t.lambda);
  j["alpha"] = t.alpha;
  j["slack"] = vector_json(t.slack);
  j["objective"] = t.objective;
  j["inner_steps"] = t.inner_steps;
  j["inner_grad_norm"] = t.inner_grad_norm;
  j["lagrangian"] = t.lagrangian;
  return j;
}

void write_trace_jsonl(std::ostream& out, const TrainingTrace& trace) {
  for (const TraceRecord& t : trace) out << trace_record_json(t).dump() << '\n';
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_trace_file(const std::string& path, const TrainingTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_trace_jsonl(out, trace);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace aldual
