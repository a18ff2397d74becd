#pragma once

#include <ostream>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "aldual/dual_ascent.hpp"
#include "aldual/oracle.hpp"
#include "aldual/pacc.hpp"

namespace aldual {

nlohmann::json vector_json(const Eigen::VectorXd& v);
nlohmann::json matrix_json(const Eigen::MatrixXd& m);

nlohmann::json duality_report_json(const DualityReport& report);
nlohmann::json stability_json(const StabilityCheck& check);
nlohmann::json dual_surface_json(const DualSurface& surface);
nlohmann::json pacc_bound_json(const PaccBound& bound);
nlohmann::json harness_report_json(const HarnessReport& report);

/// One trace line: iter, lambda, alpha, slack, objective, inner_steps,
/// inner_grad_norm, lagrangian.
nlohmann::json trace_record_json(const TraceRecord& record);
void write_trace_jsonl(std::ostream& out, const TrainingTrace& trace);

/// Pretty-printed JSON with a trailing newline. Throws IoError on failure.
void write_json_file(const std::string& path, const nlohmann::json& doc);
void write_trace_file(const std::string& path, const TrainingTrace& trace);

}  // namespace aldual
