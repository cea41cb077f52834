#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace botgate {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]" followed by "Z" or a "+hh:mm" offset.
// Throws DomainError on anything else.
Timestamp parse_timestamp(std::string_view text);

// Canonical UTC form; milliseconds are written only when non-zero.
std::string format_timestamp(Timestamp t);

enum class ThreadKind { issue, pull_request };

std::string_view to_string(ThreadKind kind);
ThreadKind thread_kind_from_string(std::string_view text);

// One issue/PR comment, or the description body of a PR.
struct RawComment {
  std::string id;
  std::string repository;
  ThreadKind thread_kind = ThreadKind::issue;
  bool is_description = false;
  std::string author;
  Timestamp created_at{};
  std::string body;

  bool operator==(const RawComment &) const = default;
};

// Everything one account said, most recent first.
struct AccountActivity {
  std::string account;
  std::vector<RawComment> comments;
  std::set<std::string> repositories;

  bool operator==(const AccountActivity &) const = default;
};

struct CorpusFilter {
  std::size_t min_comments = 10;
  std::size_t max_comments = 100;
  std::optional<Timestamp> start_date;
  std::optional<std::vector<std::string>> accounts;

  void validate() const;
};

// "owner/name" with GitHub's allowed characters.
bool is_valid_repository_name(std::string_view repository);

// Reads a JSON Lines corpus. Throws LoadError naming the line and record id
// on a missing file, a schema violation or a duplicate id.
std::vector<RawComment> load_corpus(const std::filesystem::path &path);
std::vector<RawComment> parse_corpus(std::string_view jsonl, std::string_view source = "<memory>");

// Writes one object per line with keys in a fixed order.
void save_corpus(const std::filesystem::path &path, std::span<const RawComment> comments);
std::string to_json_line(const RawComment &comment);

// Sort order for "most recent": created_at descending, then id descending.
bool more_recent(const RawComment &a, const RawComment &b);

// Groups by author, drops comments before start_date, keeps the
// max_comments most recent per account, then drops accounts with fewer than
// min_comments or missing from the allow-list. Output is sorted by account.
std::vector<AccountActivity> group_and_filter(std::span<const RawComment> comments,
                                              const CorpusFilter &filter);

// True iff the body is empty after trimming Unicode whitespace.
bool is_empty_comment(std::string_view body);

} // namespace botgate
