#include "botgate/dataset.hpp"

#include "botgate/errors.hpp"

#include <fstream>
#include <sstream>

namespace botgate {

namespace {

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

std::size_t parse_count(const std::string &text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw DomainError("not a non-negative integer: '" + text + "'");
  }
  return std::stoull(text);
}

double parse_real(const std::string &text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw DomainError("not a number: '" + text + "'");
  }
  return v;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError("cannot open " + path.string());
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Lines without the trailing CR of CRLF files; blank lines are skipped.
std::vector<std::pair<std::size_t, std::string>> lines_of(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string line(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    ++number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty()) {
      out.emplace_back(number, std::move(line));
    }
    if (end == std::string_view::npos) {
      break;
    }
    start = end + 1;
  }
  return out;
}

void check_field(const std::string &value, const char *what) {
  if (value.find_first_of(",\"\r\n") != std::string::npos) {
    throw DomainError(std::string(what) + " cannot be written to CSV: '" + value + "'");
  }
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << content;
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

} // namespace

std::vector<LabeledExample> FeatureTable::examples() const {
  if (labels.size() != rows.size()) {
    throw TrainingDataError("feature table has no label column");
  }
  std::vector<LabeledExample> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back({rows[i], labels[i]});
  }
  return out;
}

FeatureTable parse_feature_csv(std::string_view text, std::string_view source) {
  const auto lines = lines_of(text);
  if (lines.empty()) {
    throw LoadError(std::string(source) + ": missing header");
  }
  const std::string &header = lines.front().second;
  bool with_label = false;
  if (header == feature_csv_header(true)) {
    with_label = true;
  } else if (header != feature_csv_header(false)) {
    throw LoadError(std::string(source) + ": unexpected header '" + header + "' (expected '" +
                    feature_csv_header(true) + "' or without the label column)");
  }
  FeatureTable table;
  std::set<std::string> seen;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto &[number, line] = lines[k];
    const std::string where = std::string(source) + ":" + std::to_string(number);
    const auto fields = split_csv(line);
    if (fields.size() != (with_label ? 6u : 5u)) {
      throw LoadError(where + ": expected " + std::to_string(with_label ? 6 : 5) + " fields");
    }
    try {
      FeatureVector fv;
      fv.account = fields[0];
      fv.total_comments = parse_count(fields[1]);
      fv.empty_comments = parse_count(fields[2]);
      fv.pattern_count = parse_count(fields[3]);
      fv.gini_patterns = parse_real(fields[4]);
      if (fv.account.empty()) {
        throw DomainError("empty account name");
      }
      if (fv.empty_comments > fv.total_comments || fv.pattern_count > fv.total_comments ||
          fv.gini_patterns < 0.0 || fv.gini_patterns > 1.0) {
        throw DomainError("feature values out of range");
      }
      if (!seen.insert(fv.account).second) {
        throw DomainError("duplicate account '" + fv.account + "'");
      }
      if (with_label) {
        table.labels.push_back(label_from_string(fields[5]));
      }
      table.rows.push_back(std::move(fv));
    } catch (const DomainError &e) {
      throw LoadError(where + ": " + e.what());
    }
  }
  return table;
}

FeatureTable load_feature_csv(const std::filesystem::path &path) {
  return parse_feature_csv(read_file(path), path.string());
}

void save_feature_csv(const std::filesystem::path &path, const FeatureTable &table) {
  const bool with_label = !table.labels.empty();
  if (with_label && table.labels.size() != table.rows.size()) {
    throw DomainError("label column does not match the rows");
  }
  std::string out = feature_csv_header(with_label) + "\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    check_field(table.rows[i].account, "account name");
    out += with_label ? feature_csv_row(table.rows[i], to_string(table.labels[i]))
                      : feature_csv_row(table.rows[i]);
    out += '\n';
  }
  write_file(path, out);
}

std::map<std::string, Label> load_ground_truth(const std::filesystem::path &path) {
  const auto lines = lines_of(read_file(path));
  if (lines.empty() || lines.front().second != "repository,account,label") {
    throw LoadError(path.string() + ": expected header 'repository,account,label'");
  }
  std::map<std::string, Label> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto &[number, line] = lines[k];
    const std::string where = path.string() + ":" + std::to_string(number);
    const auto fields = split_csv(line);
    if (fields.size() != 3 || fields[1].empty()) {
      throw LoadError(where + ": expected repository,account,label");
    }
    Label label;
    try {
      label = label_from_string(fields[2]);
    } catch (const DomainError &e) {
      throw LoadError(where + ": " + e.what());
    }
    const auto [it, inserted] = out.emplace(fields[1], label);
    if (!inserted && it->second != label) {
      throw LoadError(where + ": conflicting labels for '" + fields[1] + "'");
    }
  }
  return out;
}

void save_ground_truth(const std::filesystem::path &path, std::span<const GroundTruthRow> rows) {
  std::string out = "repository,account,label\n";
  for (const auto &r : rows) {
    check_field(r.repository, "repository");
    check_field(r.account, "account name");
    out += r.repository + ',' + r.account + ',' + std::string(to_string(r.label)) + '\n';
  }
  write_file(path, out);
}

} // namespace botgate
