#pragma once

#include <nlohmann/json_fwd.hpp>

#include "trirobust/nhemp.hpp"

namespace trirobust {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Locale-independent shortest round-trip formatting (dot decimal).
std::string format_double(double v);

// ---- case bundles (JSON) ----
NhempCase load_case(const std::string& path);
void save_case(const NhempCase& c, const std::string& path);
NhempCase case_from_json(const nlohmann::json& j);
nlohmann::json case_to_json(const NhempCase& c);

// ---- compact instances (JSON or sparse-triplet binary container) ----
struct CompactDocument {
  CompactInstance inst;
  std::vector<oracle::IntRange> x_bounds;  // empty when the file carries none
  EngineConfig config;
  bool has_config = false;
};

CompactDocument load_compact_doc(const std::string& path);
CompactInstance load_compact(const std::string& path);
/// binary=true writes the sparse-triplet container; otherwise JSON.
void save_compact(const CompactInstance& inst, const std::string& path, bool binary = false,
                  std::span<const oracle::IntRange> x_bounds = {});
CompactInstance compact_from_json(const nlohmann::json& j);
nlohmann::json compact_to_json(const CompactInstance& inst,
                               std::span<const oracle::IntRange> x_bounds = {});

// ---- engine configuration ----
/// Parses the nested config object {engine:{...}, bigm:{...}, milp:{...}}.
EngineConfig parse_engine_config(const nlohmann::json& j);
nlohmann::json engine_config_to_json(const EngineConfig& cfg);
/// Applies the TRIROBUST_MILP_BACKEND environment override.
std::string resolve_backend(const std::string& configured);

// ---- results ----
/// CSV `iter,lb,ub,gap,master_s,sp_total_s`, one row per iteration.
void emit_trace(const EngineResult& result, const std::string& path);
/// Machine-readable solution; investment section included when a layout is given.
void emit_solution(const EngineResult& result, const std::string& path,
                   const NhempLayout* layout = nullptr);
PlanningSolution load_solution(const std::string& path);
void emit_metrics_csv(const PlanningMetrics& m, const std::string& path);
void emit_sweep_csv(std::span<const SweepRow> rows, const std::string& path);

}  // namespace trirobust
