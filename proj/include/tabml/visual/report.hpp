#ifndef TABML_VISUAL_REPORT_HPP_
#define TABML_VISUAL_REPORT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/pipeline/run.hpp"
#include "tabml/visual/plot.hpp"

namespace tabml::visual {

struct Report {
  nlohmann::json document;
  std::vector<PlotArtifact> plots;
};

// One plot per applicable kind. Kinds that cannot be drawn add a note
// instead of failing.
std::vector<PlotArtifact> RenderPlots(const pipeline::RunResult& result, std::vector<std::string>& notes);

// Pure: the same RunResult always gives the same document and plot bytes.
// Wall-clock seconds are left out (null) for that reason.
Report RenderReport(const pipeline::RunResult& result, const std::string& log_path = "log.jsonl");

// Final model with its preprocessing; null when the run has no final model.
nlohmann::json ModelDocument(const pipeline::RunResult& result);

struct ReportFiles {
  std::filesystem::path report;
  std::vector<std::filesystem::path> plots;
  std::optional<std::filesystem::path> model;
};

// Writes report.json, plots/<kind>.svg and model.json under `out_dir`.
ReportFiles WriteReport(const Report& report, const pipeline::RunResult& result,
                        const std::filesystem::path& out_dir);

// Structural check of a report document. Returns one message per problem.
std::vector<std::string> ValidateReport(const nlohmann::json& report);

}  // namespace tabml::visual

#endif  // TABML_VISUAL_REPORT_HPP_
