#include "dce/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "csv.hpp"
#include "dce/error.hpp"

namespace dce {

std::size_t ChoiceDataset::n_tasks() const {
  std::size_t n = 0;
  for (const auto& r : respondents) n += r.tasks.size();
  return n;
}

std::size_t CodedPanel::n_tasks() const {
  std::size_t n = 0;
  for (const auto& r : respondents) n += r.tasks.size();
  return n;
}

namespace {

std::string column_of(const AttributeDef& attr) { return attr.column.empty() ? attr.name : attr.column; }

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int parse_int(const std::string& s, const char* what, std::size_t line) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("inconsistent_row", "line " + std::to_string(line) + ": " + what + " '" + s + "' is not an integer");
  }
  return v;
}

std::optional<double> parse_duration(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("inconsistent_row", "line " + std::to_string(line) + ": duration '" + s + "' is not a number");
  }
  return v;
}

class Header {
public:
  explicit Header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) pos_.emplace(names[i], i);
  }
  std::optional<std::size_t> find(const std::string& name) const {
    auto it = pos_.find(name);
    if (it == pos_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t require(const std::string& name, const char* file) const {
    auto p = find(name);
    if (!p) throw Error("missing_column", std::string(file) + " lacks required column '" + name + "'");
    return *p;
  }

private:
  std::unordered_map<std::string, std::size_t> pos_;
};

std::size_t demographic_level(const AttributeDef& attr, const std::string& value, std::size_t line,
                              const std::string& respondent) {
  auto lv = attr.find_level(value);
  if (!lv) {
    throw Error("invalid_demographic", "line " + std::to_string(line) + ": respondent " + respondent + " has " +
                                           attr.name + " '" + value + "', not one of the schema's groups");
  }
  return *lv;
}

struct RespondentInfo {
  std::vector<std::size_t> demographics;
  std::map<std::string, std::string> extra;
  std::optional<double> duration;
};

std::unordered_map<std::string, RespondentInfo> read_respondents(std::istream& in, const ExperimentSchema& schema) {
  std::string line;
  if (!csv::read_line(in, line)) throw Error("empty_dataset", "respondent file is empty");
  const auto names = csv::split(line);
  const Header header(names);
  const std::size_t id_col = header.require("respondent_id", "respondent file");
  std::vector<std::pair<std::size_t, std::size_t>> demo_cols; // attribute, column
  std::set<std::size_t> used{id_col};
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    if (schema.attributes[a].scope != AttributeScope::demographic) continue;
    const std::size_t c = header.require(column_of(schema.attributes[a]), "respondent file");
    demo_cols.emplace_back(a, c);
    used.insert(c);
  }
  const auto dur_col = header.find("duration_seconds");
  if (dur_col) used.insert(*dur_col);

  std::unordered_map<std::string, RespondentInfo> out;
  std::size_t lineno = 1;
  while (csv::read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = csv::split(line);
    if (f.size() != names.size()) {
      throw Error("inconsistent_row", "respondent file line " + std::to_string(lineno) + " has " +
                                          std::to_string(f.size()) + " fields, expected " + std::to_string(names.size()));
    }
    RespondentInfo info;
    info.demographics.assign(schema.attributes.size(), kNoLevel);
    for (auto [a, c] : demo_cols) info.demographics[a] = demographic_level(schema.attributes[a], f[c], lineno, f[id_col]);
    if (dur_col) info.duration = parse_duration(f[*dur_col], lineno);
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (!used.count(c)) info.extra[names[c]] = f[c];
    }
    if (!out.emplace(f[id_col], std::move(info)).second) {
      throw Error("inconsistent_row", "respondent file line " + std::to_string(lineno) + ": duplicate respondent_id '" +
                                          f[id_col] + "'");
    }
  }
  return out;
}

struct PendingRow {
  std::size_t alt;
  bool chosen;
  std::size_t line;
};

struct PendingTask {
  Observation obs;
  std::vector<PendingRow> rows;
  std::size_t first_line = 0;
};

struct PendingRespondent {
  RespondentRecord record;
  std::vector<PendingTask> tasks;
  std::unordered_map<int, std::size_t> task_pos;
};

} // namespace

ChoiceDataset ingest_choices(std::istream& in, const ExperimentSchema& schema, std::istream* respondents) {
  require_valid(schema);
  const std::size_t n_alts = schema.alternatives.size();
  const std::size_t n_attrs = schema.attributes.size();

  std::unordered_map<std::string, RespondentInfo> side;
  if (respondents) side = read_respondents(*respondents, schema);

  std::string line;
  if (!csv::read_line(in, line)) throw Error("empty_dataset", "choice file is empty (no header)");
  const auto names = csv::split(line);
  const Header header(names);
  const char* file = "choice file";
  const std::size_t c_resp = header.require("respondent_id", file);
  const std::size_t c_task = header.require("task_id", file);
  const std::size_t c_block = header.require("block_id", file);
  const std::size_t c_alt = header.require("alt_id", file);
  const std::size_t c_chosen = header.require("chosen", file);
  std::vector<std::optional<std::size_t>> attr_col(n_attrs);
  for (std::size_t a = 0; a < n_attrs; ++a) {
    const auto& attr = schema.attributes[a];
    if (attr.scope == AttributeScope::demographic && respondents) {
      attr_col[a] = header.find(column_of(attr));
    } else {
      attr_col[a] = header.require(column_of(attr), file);
    }
  }
  const auto c_duration = header.find("duration_seconds");

  std::vector<PendingRespondent> pending;
  std::unordered_map<std::string, std::size_t> resp_pos;
  std::size_t lineno = 1;
  std::size_t n_rows = 0;

  while (csv::read_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ++n_rows;
    const auto f = csv::split(line);
    if (f.size() != names.size()) {
      throw Error("inconsistent_row", "line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                                          " fields, expected " + std::to_string(names.size()));
    }
    const std::string& rid = f[c_resp];
    if (rid.empty()) throw Error("inconsistent_row", "line " + std::to_string(lineno) + ": empty respondent_id");
    const int task_id = parse_int(f[c_task], "task_id", lineno);
    const int block_id = parse_int(f[c_block], "block_id", lineno);
    const auto alt = schema.find_alternative(f[c_alt]);
    if (!alt) {
      throw Error("unknown_alternative", "line " + std::to_string(lineno) + ": unknown alternative '" + f[c_alt] + "'");
    }
    bool chosen = false;
    if (f[c_chosen] == "1") {
      chosen = true;
    } else if (f[c_chosen] != "0") {
      throw Error("missing_chosen", "line " + std::to_string(lineno) + ": chosen flag must be 0 or 1, got '" +
                                        f[c_chosen] + "'");
    }

    auto [rit, fresh] = resp_pos.emplace(rid, pending.size());
    if (fresh) {
      PendingRespondent pr;
      pr.record.id = rid;
      pr.record.demographics.assign(n_attrs, kNoLevel);
      pending.push_back(std::move(pr));
    }
    PendingRespondent& resp = pending[rit->second];

    auto [tit, new_task] = resp.task_pos.emplace(task_id, resp.tasks.size());
    if (new_task) {
      PendingTask t;
      t.obs.task_id = task_id;
      t.obs.block_id = block_id;
      t.obs.alt_levels.assign(n_alts, std::vector<std::size_t>(n_attrs, kNoLevel));
      t.obs.context_levels.assign(n_attrs, kNoLevel);
      t.first_line = lineno;
      resp.tasks.push_back(std::move(t));
    }
    PendingTask& task = resp.tasks[tit->second];
    if (task.obs.block_id != block_id) {
      throw Error("inconsistent_row", "line " + std::to_string(lineno) + ": block_id differs within respondent " + rid +
                                          " task " + std::to_string(task_id));
    }
    for (const auto& row : task.rows) {
      if (row.alt == *alt) {
        throw Error("inconsistent_row", "line " + std::to_string(lineno) + ": alternative '" + f[c_alt] +
                                            "' repeated in respondent " + rid + " task " + std::to_string(task_id));
      }
    }
    task.rows.push_back({*alt, chosen, lineno});

    for (std::size_t a = 0; a < n_attrs; ++a) {
      const auto& attr = schema.attributes[a];
      if (!attr_col[a]) continue;
      const std::string& value = f[*attr_col[a]];
      if (attr.is_design_attribute()) {
        if (!schema.applies(a, *alt)) continue;
        auto lv = attr.find_level(value);
        if (!lv) {
          throw Error("unknown_level", "line " + std::to_string(lineno) + ": '" + value + "' is not a level of " +
                                           attr.name + " for " + f[c_alt]);
        }
        task.obs.alt_levels[*alt][a] = *lv;
      } else if (attr.scope == AttributeScope::context) {
        auto lv = attr.find_level(value);
        if (!lv) {
          throw Error("unknown_level", "line " + std::to_string(lineno) + ": '" + value + "' is not a level of " + attr.name);
        }
        if (task.obs.context_levels[a] != kNoLevel && task.obs.context_levels[a] != *lv) {
          throw Error("inconsistent_row", "line " + std::to_string(lineno) + ": " + attr.name +
                                              " differs between rows of respondent " + rid + " task " +
                                              std::to_string(task_id));
        }
        task.obs.context_levels[a] = *lv;
      } else if (attr.scope == AttributeScope::demographic) {
        if (value.empty() && respondents) continue;
        const std::size_t lv = demographic_level(attr, value, lineno, rid);
        auto& slot = resp.record.demographics[a];
        if (slot != kNoLevel && slot != lv) {
          throw Error("inconsistent_row", "line " + std::to_string(lineno) + ": " + attr.name +
                                              " changes between rows of respondent " + rid);
        }
        slot = lv;
      }
    }
    if (c_duration) {
      auto d = parse_duration(f[*c_duration], lineno);
      if (d) resp.record.duration_seconds = d;
    }
  }

  if (n_rows == 0) throw Error("empty_dataset", "choice file has a header but no rows");

  ChoiceDataset ds;
  ds.schema = schema;
  ds.respondents.reserve(pending.size());
  for (auto& pr : pending) {
    RespondentRecord rec = std::move(pr.record);
    if (auto it = side.find(rec.id); it != side.end()) {
      for (std::size_t a = 0; a < n_attrs; ++a) {
        const std::size_t lv = it->second.demographics[a];
        if (lv == kNoLevel) continue;
        if (rec.demographics[a] != kNoLevel && rec.demographics[a] != lv) {
          throw Error("inconsistent_row", "respondent " + rec.id + ": " + schema.attributes[a].name +
                                              " disagrees between the choice and respondent files");
        }
        rec.demographics[a] = lv;
      }
      rec.extra = it->second.extra;
      if (it->second.duration) rec.duration_seconds = it->second.duration;
    }
    for (std::size_t a = 0; a < n_attrs; ++a) {
      if (schema.attributes[a].scope == AttributeScope::demographic && rec.demographics[a] == kNoLevel) {
        throw Error("invalid_demographic", "respondent " + rec.id + " has no " + schema.attributes[a].name + " value");
      }
    }
    for (auto& t : pr.tasks) {
      const std::string where = "respondent " + rec.id + " task " + std::to_string(t.obs.task_id) + " (line " +
                                std::to_string(t.first_line) + ")";
      if (t.rows.size() != n_alts) {
        throw Error("incomplete_task", where + " lists " + std::to_string(t.rows.size()) + " of " +
                                           std::to_string(n_alts) + " alternatives");
      }
      std::size_t n_chosen = 0;
      for (const auto& r : t.rows) {
        if (!r.chosen) continue;
        ++n_chosen;
        t.obs.chosen = r.alt;
        if (n_chosen > 1) {
          throw Error("multiple_chosen", where + " has more than one chosen alternative (line " +
                                             std::to_string(r.line) + ")");
        }
      }
      if (n_chosen == 0) throw Error("missing_chosen", where + " has no chosen alternative");
      rec.tasks.push_back(std::move(t.obs));
    }
    ds.respondents.push_back(std::move(rec));
  }
  return ds;
}

ChoiceDataset load_choices(const std::string& path, const ExperimentSchema& schema, const std::string& respondents_path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open choice file '" + path + "'");
  if (respondents_path.empty()) return ingest_choices(in, schema);
  std::ifstream side(respondents_path);
  if (!side) throw Error("io_error", "cannot open respondent file '" + respondents_path + "'");
  return ingest_choices(in, schema, &side);
}

void write_choices_csv(const ChoiceDataset& ds, std::ostream& out) {
  const auto& schema = ds.schema;
  // One CSV column may hold several attributes with disjoint alternatives.
  std::vector<std::string> columns;
  std::vector<std::vector<std::size_t>> column_attrs;
  auto add = [&](std::size_t a) {
    const std::string c = column_of(schema.attributes[a]);
    auto it = std::find(columns.begin(), columns.end(), c);
    if (it == columns.end()) {
      columns.push_back(c);
      column_attrs.push_back({a});
    } else {
      column_attrs[static_cast<std::size_t>(it - columns.begin())].push_back(a);
    }
  };
  for (auto scope : {AttributeScope::alternative_specific, AttributeScope::context, AttributeScope::demographic}) {
    for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
      const auto s = schema.attributes[a].scope;
      const bool design = s == AttributeScope::alternative_specific || s == AttributeScope::shared_across_alternatives;
      if (scope == AttributeScope::alternative_specific ? design : s == scope) add(a);
    }
  }

  out << "respondent_id,task_id,block_id,alt_id,chosen";
  for (const auto& c : columns) out << ',' << csv::escape(c);
  out << '\n';
  for (const auto& r : ds.respondents) {
    for (const auto& t : r.tasks) {
      for (std::size_t j = 0; j < schema.alternatives.size(); ++j) {
        out << csv::escape(r.id) << ',' << t.task_id << ',' << t.block_id << ',' << schema.alternatives[j].id << ','
            << (t.chosen == j ? 1 : 0);
        for (const auto& attrs : column_attrs) {
          out << ',';
          for (std::size_t a : attrs) {
            const auto& attr = schema.attributes[a];
            std::size_t lv = kNoLevel;
            if (attr.is_design_attribute()) {
              if (schema.applies(a, j)) lv = t.alt_levels[j][a];
            } else if (attr.scope == AttributeScope::context) {
              lv = t.context_levels[a];
            } else {
              lv = r.demographics[a];
            }
            if (lv != kNoLevel) {
              out << csv::escape(attr.levels[lv].label);
              break;
            }
          }
        }
        out << '\n';
      }
    }
  }
}

void write_respondents_csv(const ChoiceDataset& ds, std::ostream& out) {
  const auto& schema = ds.schema;
  std::vector<std::size_t> demo;
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    if (schema.attributes[a].scope == AttributeScope::demographic) demo.push_back(a);
  }
  std::set<std::string> extra_keys;
  bool any_duration = false;
  for (const auto& r : ds.respondents) {
    for (const auto& [k, v] : r.extra) extra_keys.insert(k);
    any_duration = any_duration || r.duration_seconds.has_value();
  }
  out << "respondent_id";
  for (std::size_t a : demo) out << ',' << csv::escape(column_of(schema.attributes[a]));
  if (any_duration) out << ",duration_seconds";
  for (const auto& k : extra_keys) out << ',' << csv::escape(k);
  out << '\n';
  for (const auto& r : ds.respondents) {
    out << csv::escape(r.id);
    for (std::size_t a : demo) out << ',' << csv::escape(schema.attributes[a].levels[r.demographics[a]].label);
    if (any_duration) out << ',' << (r.duration_seconds ? format_number(*r.duration_seconds) : "");
    for (const auto& k : extra_keys) {
      auto it = r.extra.find(k);
      out << ',' << (it == r.extra.end() ? "" : csv::escape(it->second));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

ScreeningRules parse_screening_rules(const std::string& spec, std::size_t block_size) {
  ScreeningRules rules;
  rules.block_size = block_size;
  rules.incomplete = false;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty() || tok == "none") continue;
    if (tok == "incomplete") {
      rules.incomplete = true;
    } else if (tok == "straight_line") {
      rules.straight_line = true;
    } else if (tok.rfind("fast_completion=", 0) == 0) {
      const std::string v = tok.substr(16);
      double threshold = 0.0;
      auto res = std::from_chars(v.data(), v.data() + v.size(), threshold);
      if (res.ec != std::errc() || res.ptr != v.data() + v.size() || threshold <= 0.0) {
        throw Error("invalid_rule", "fast_completion threshold '" + v + "' must be a positive number of seconds");
      }
      rules.fast_completion_seconds = threshold;
    } else {
      throw Error("invalid_rule", "unknown screening rule '" + tok +
                                      "' (expected incomplete, straight_line, fast_completion=<seconds>)");
    }
  }
  return rules;
}

ScreeningResult screen_responses(const ChoiceDataset& ds, const ScreeningRules& rules) {
  ScreeningResult res;
  res.dataset.schema = ds.schema;
  res.report.n_input = ds.respondents.size();
  for (const auto& r : ds.respondents) {
    bool drop = false;
    if (rules.incomplete && r.tasks.size() < rules.block_size) {
      ++res.report.incomplete;
      drop = true;
    }
    if (rules.straight_line && r.tasks.size() >= 2 &&
        std::all_of(r.tasks.begin(), r.tasks.end(), [&](const Observation& t) { return t.chosen == r.tasks[0].chosen; })) {
      ++res.report.straight_line;
      drop = true;
    }
    if (rules.fast_completion_seconds && r.duration_seconds && *r.duration_seconds < *rules.fast_completion_seconds) {
      ++res.report.fast_completion;
      drop = true;
    }
    if (drop) {
      res.report.removed_ids.push_back(r.id);
    } else {
      res.dataset.respondents.push_back(r);
    }
  }
  res.report.n_kept = res.dataset.respondents.size();
  return res;
}

// ---------------------------------------------------------------------------

RowCoder::RowCoder(const ExperimentSchema& schema, const ParameterIndex& index) : n_alternatives_(schema.alternatives.size()) {
  const ParameterIndex expected = build_parameter_index(schema);
  bool match = expected.size() == index.fixed_size();
  for (std::size_t i = 0; match && i < expected.size(); ++i) match = expected[i] == index[i];
  if (!match) {
    throw Error("index_mismatch", "parameter index does not match schema '" + schema.name + "' (" +
                                      std::to_string(index.fixed_size()) + " fixed columns, schema implies " +
                                      std::to_string(expected.size()) + ")");
  }
  codes_.resize(schema.attributes.size());
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    for (std::size_t l = 0; l < schema.attributes[a].levels.size(); ++l) {
      codes_[a].push_back(code_level(schema.attributes[a], l));
    }
  }
  for (std::size_t i = 0; i < index.fixed_size(); ++i) {
    const auto& p = index[i];
    Column c{p.kind, 0, kNoLevel, p.level_slot};
    if (!p.alternative.empty()) c.alternative = schema.alternative_index(p.alternative);
    if (p.kind != ParamKind::asc) c.attribute = schema.attribute_index(p.attribute);
    columns_.push_back(c);
  }
}

void RowCoder::code(const Observation& obs, const std::vector<std::size_t>& demographics, std::size_t j,
                    std::span<double> out) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const Column& c = columns_[i];
    double v = 0.0;
    switch (c.kind) {
    case ParamKind::asc:
      v = c.alternative == j ? 1.0 : 0.0;
      break;
    case ParamKind::attribute:
      if (c.alternative == kNoLevel || c.alternative == j) {
        const std::size_t lv = obs.alt_levels[j][c.attribute];
        if (lv != kNoLevel) v = codes_[c.attribute][lv][c.slot];
      }
      break;
    case ParamKind::context_interaction:
      if (c.alternative == j) v = codes_[c.attribute][obs.context_levels[c.attribute]][c.slot];
      break;
    case ParamKind::demographic_interaction:
      if (c.alternative == j) v = codes_[c.attribute][demographics[c.attribute]][c.slot];
      break;
    case ParamKind::sd:
      break;
    }
    out[i] = v;
  }
}

Eigen::MatrixXd RowCoder::code_task(const Observation& obs, const std::vector<std::size_t>& demographics) const {
  const std::size_t n_alts = n_alternatives_;
  // Row-major scratch so each alternative's row is contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(n_alts, width());
  for (std::size_t j = 0; j < n_alts; ++j) code(obs, demographics, j, std::span<double>(m.row(j).data(), width()));
  return m;
}

CodedPanel code_dataset(const ChoiceDataset& ds, const ParameterIndex& index) {
  const RowCoder coder(ds.schema, index);
  CodedPanel panel;
  panel.width = coder.width();
  panel.n_alternatives = ds.schema.alternatives.size();
  panel.respondents.reserve(ds.respondents.size());
  for (const auto& r : ds.respondents) {
    CodedRespondent cr;
    cr.id = r.id;
    for (const auto& t : r.tasks) cr.tasks.push_back({coder.code_task(t, r.demographics), t.chosen});
    panel.respondents.push_back(std::move(cr));
  }
  return panel;
}

DecodedTask decode_task(const ExperimentSchema& schema, const ParameterIndex& index, const CodedTask& task) {
  const std::size_t n_alts = schema.alternatives.size();
  const std::size_t n_attrs = schema.attributes.size();
  DecodedTask out;
  out.alt_levels.assign(n_alts, std::vector<std::size_t>(n_attrs, kNoLevel));
  out.context_levels.assign(n_attrs, kNoLevel);
  out.demographics.assign(n_attrs, kNoLevel);

  auto match = [&](std::size_t a, const std::vector<double>& coded) {
    for (std::size_t l = 0; l < schema.attributes[a].levels.size(); ++l) {
      if (code_level(schema.attributes[a], l) == coded) return l;
    }
    throw Error("decode_error", "coded values do not correspond to any level of " + schema.attributes[a].name);
  };

  // Gather the columns of (kind, attribute, owning alternative) in slot order.
  auto gather = [&](ParamKind kind, std::size_t a, const std::string& alt, std::size_t row) {
    std::vector<double> coded(schema.attributes[a].width(), 0.0);
    bool found = false;
    for (std::size_t i = 0; i < index.fixed_size(); ++i) {
      const auto& p = index[i];
      if (p.kind != kind || p.attribute != schema.attributes[a].name || p.alternative != alt) continue;
      coded[p.level_slot] = task.rows(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i));
      found = true;
    }
    return found ? std::optional<std::vector<double>>(coded) : std::nullopt;
  };

  for (std::size_t a = 0; a < n_attrs; ++a) {
    const auto& attr = schema.attributes[a];
    if (attr.is_design_attribute()) {
      for (std::size_t j = 0; j < n_alts; ++j) {
        if (!schema.applies(a, j)) continue;
        const std::string owner = attr.scope == AttributeScope::shared_across_alternatives ? "" : schema.alternatives[j].id;
        if (auto coded = gather(ParamKind::attribute, a, owner, j)) out.alt_levels[j][a] = match(a, *coded);
      }
    }
  }
  for (const auto& ia : schema.context_interactions) {
    const std::size_t a = schema.attribute_index(ia.attribute);
    const std::size_t j = schema.alternative_index(ia.alternative);
    if (auto coded = gather(ParamKind::context_interaction, a, ia.alternative, j)) out.context_levels[a] = match(a, *coded);
  }
  for (const auto& ia : schema.demographic_interactions) {
    const std::size_t a = schema.attribute_index(ia.attribute);
    const std::size_t j = schema.alternative_index(ia.alternative);
    if (auto coded = gather(ParamKind::demographic_interaction, a, ia.alternative, j)) out.demographics[a] = match(a, *coded);
  }
  return out;
}

} // namespace dce
