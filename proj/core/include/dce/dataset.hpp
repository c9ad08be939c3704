#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dce/schema.hpp"

namespace dce {

inline constexpr std::size_t kNoLevel = std::numeric_limits<std::size_t>::max();

/// One answered choice task. Levels are indexed by schema attribute;
/// kNoLevel marks attributes that do not apply.
struct Observation {
  int task_id = 0;
  int block_id = 0;
  std::vector<std::vector<std::size_t>> alt_levels; // [alternative][attribute]
  std::vector<std::size_t> context_levels;          // [attribute]
  std::size_t chosen = 0;                           // alternative index

  bool operator==(const Observation&) const = default;
};

struct RespondentRecord {
  std::string id;
  std::vector<std::size_t> demographics;    // [attribute]
  std::map<std::string, std::string> extra; // pass-through fields (income, area, ...)
  std::optional<double> duration_seconds;
  std::vector<Observation> tasks;

  bool operator==(const RespondentRecord&) const = default;
};

struct ChoiceDataset {
  ExperimentSchema schema;
  std::vector<RespondentRecord> respondents;

  std::size_t n_tasks() const;
  bool operator==(const ChoiceDataset&) const = default;
};

/// Long format: one row per (task, alternative). `respondents`, when given,
/// supplies demographics (and pass-through fields) per respondent_id.
/// Errors carry distinct codes: empty_dataset, missing_column, missing_chosen,
/// multiple_chosen, unknown_level, unknown_alternative, invalid_demographic,
/// incomplete_task, inconsistent_row.
ChoiceDataset ingest_choices(std::istream& choices, const ExperimentSchema& schema,
                             std::istream* respondents = nullptr);
ChoiceDataset load_choices(const std::string& path, const ExperimentSchema& schema,
                           const std::string& respondents_path = {});

void write_choices_csv(const ChoiceDataset& ds, std::ostream& out);
void write_respondents_csv(const ChoiceDataset& ds, std::ostream& out);

// ---------------------------------------------------------------------------

struct ScreeningRules {
  bool incomplete = true;
  std::size_t block_size = 8;
  bool straight_line = false;
  std::optional<double> fast_completion_seconds;
};

/// Parses "incomplete,straight_line,fast_completion=300".
ScreeningRules parse_screening_rules(const std::string& spec, std::size_t block_size = 8);

struct ScreeningReport {
  std::size_t n_input = 0;
  std::size_t n_kept = 0;
  std::size_t incomplete = 0;
  std::size_t straight_line = 0;
  std::size_t fast_completion = 0;
  std::vector<std::string> removed_ids;
};

struct ScreeningResult {
  ChoiceDataset dataset;
  ScreeningReport report;
};

ScreeningResult screen_responses(const ChoiceDataset& ds, const ScreeningRules& rules);

// ---------------------------------------------------------------------------

struct CodedTask {
  Eigen::MatrixXd rows; // alternatives x fixed-parameter columns
  std::size_t chosen = 0;
};

struct CodedRespondent {
  std::string id;
  std::vector<CodedTask> tasks;
};

struct CodedPanel {
  std::size_t width = 0;
  std::size_t n_alternatives = 0;
  std::vector<CodedRespondent> respondents;

  std::size_t n_tasks() const;
};

/// Builds coded utility rows aligned to a parameter index.
class RowCoder {
public:
  /// Throws Error("index_mismatch") if `index` was not built from `schema`.
  RowCoder(const ExperimentSchema& schema, const ParameterIndex& index);

  std::size_t width() const { return columns_.size(); }
  void code(const Observation& obs, const std::vector<std::size_t>& demographics, std::size_t alternative,
            std::span<double> out) const;
  Eigen::MatrixXd code_task(const Observation& obs, const std::vector<std::size_t>& demographics) const;

private:
  struct Column {
    ParamKind kind;
    std::size_t attribute;   // schema attribute index (unused for ASC)
    std::size_t alternative; // owning alternative, or kNoLevel if shared
    std::size_t slot;
  };
  std::size_t n_alternatives_;
  std::vector<Column> columns_;
  std::vector<std::vector<std::vector<double>>> codes_; // [attribute][level] -> coded row
};

CodedPanel code_dataset(const ChoiceDataset& ds, const ParameterIndex& index);

/// Recovers the levels encoded in a task's rows. Context and demographic
/// levels are recovered only where an interaction column carries them.
struct DecodedTask {
  std::vector<std::vector<std::size_t>> alt_levels;
  std::vector<std::size_t> context_levels;
  std::vector<std::size_t> demographics;
};
DecodedTask decode_task(const ExperimentSchema& schema, const ParameterIndex& index, const CodedTask& task);

} // namespace dce
