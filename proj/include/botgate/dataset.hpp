#pragma once

#include "botgate/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace botgate {

// Rows of a feature CSV. `labels` is empty when the file has no label column.
struct FeatureTable {
  std::vector<FeatureVector> rows;
  std::vector<Label> labels;

  bool labeled() const { return !labels.empty() || rows.empty(); }
  std::vector<LabeledExample> examples() const;
};

// Throws LoadError naming the line on a malformed row or duplicate account.
FeatureTable load_feature_csv(const std::filesystem::path &path);
FeatureTable parse_feature_csv(std::string_view text, std::string_view source = "<memory>");
void save_feature_csv(const std::filesystem::path &path, const FeatureTable &table);

// Ground truth as repository,account,label rows. An account may appear once
// per repository; its label must agree across rows.
struct GroundTruthRow {
  std::string repository;
  std::string account;
  Label label = Label::human;
};

std::map<std::string, Label> load_ground_truth(const std::filesystem::path &path);
void save_ground_truth(const std::filesystem::path &path, std::span<const GroundTruthRow> rows);

} // namespace botgate
