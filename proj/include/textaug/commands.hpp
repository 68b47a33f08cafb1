#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "textaug/clock.hpp"
#include "textaug/config.hpp"

namespace textaug {

// Builds the augmentation callable for any known method, including the
// service-backed ones and the "raw" pseudo-method (no variants). Service
// clients are created once and shared across calls.
Augmenter make_augmenter(const PipelineConfig& config, const std::string& method,
                         ResourceSet& resources, Clock& clock);

// `augment`: writes an AugmentedSet JSONL with full provenance traces.
void cmd_augment(const PipelineConfig& config, const std::string& method,
                 const std::filesystem::path& out_file, Clock& clock);

// `evaluate`: reads an AugmentedSet file, scores it against the reference
// dataset, writes <method>.report.json and <method>.report.csv.
void cmd_evaluate(const PipelineConfig& config, const std::filesystem::path& augmented_file,
                  const std::filesystem::path& out_dir, Clock& clock);

// `train`: k-shot draw, augmentation, the two-phase schedule; writes the
// TrainRun JSON.
void cmd_train(const PipelineConfig& config, const std::filesystem::path& out_file, Clock& clock);

// `compare`: per method augment -> evaluate -> train (lambda = 0 and
// lambda = configured), one CSV row each plus a table on table_out.
// "raw" is always included as the baseline row.
void cmd_compare(const PipelineConfig& config, std::vector<std::string> methods,
                 const std::filesystem::path& out_dir, std::ostream& table_out, Clock& clock);

// `mock-serve`: runs the scripted fixture server until interrupted.
[[noreturn]] void cmd_mock_serve(const std::filesystem::path& fixture_file, int port,
                                 std::ostream& log);

}  // namespace textaug
