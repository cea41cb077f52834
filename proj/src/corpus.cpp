#include "botgate/corpus.hpp"

#include "botgate/errors.hpp"
#include "botgate/unicode.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

namespace botgate {

using json = nlohmann::json;

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) {
    throw DomainError("truncated timestamp: " + std::string(text));
  }
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      throw DomainError("malformed timestamp: " + std::string(text));
    }
    value = value * 10 + (text[i] - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw DomainError("malformed timestamp: " + std::string(text));
  }
}

} // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int y = parse_digits(text, 0, 4);
  expect_char(text, 4, '-');
  const int mo = parse_digits(text, 5, 2);
  expect_char(text, 7, '-');
  const int d = parse_digits(text, 8, 2);
  if (text.size() <= 10 || (text[10] != 'T' && text[10] != 't')) {
    throw DomainError("malformed timestamp: " + std::string(text));
  }
  const int hh = parse_digits(text, 11, 2);
  expect_char(text, 13, ':');
  const int mm = parse_digits(text, 14, 2);
  expect_char(text, 16, ':');
  const int ss = parse_digits(text, 17, 2);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw DomainError("timestamp out of range: " + std::string(text));
  }

  std::size_t pos = 19;
  long long millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (digits < 3) {
        millis = millis * 10 + (text[pos] - '0');
      }
      ++digits;
      ++pos;
    }
    if (digits == 0) {
      throw DomainError("malformed timestamp fraction: " + std::string(text));
    }
    for (int k = digits; k < 3; ++k) {
      millis *= 10;
    }
  }

  long long offset_minutes = 0;
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '-' ? -1 : 1;
    const int oh = parse_digits(text, pos + 1, 2);
    expect_char(text, pos + 3, ':');
    const int om = parse_digits(text, pos + 4, 2);
    offset_minutes = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw DomainError("timestamp lacks a UTC designator: " + std::string(text));
  }
  if (pos != text.size()) {
    throw DomainError("trailing characters in timestamp: " + std::string(text));
  }

  const sys_days days{ymd};
  return time_point_cast<milliseconds>(days) + hours{hh} + minutes{mm} + seconds{ss} +
         milliseconds{millis} - minutes{offset_minutes};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(t);
  const year_month_day ymd{days};
  auto rest = t - days;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto m = duration_cast<minutes>(rest);
  rest -= m;
  const auto s = duration_cast<seconds>(rest);
  rest -= s;
  const auto ms = rest.count();

  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h.count()), static_cast<int>(m.count()),
                static_cast<long long>(s.count()));
  std::string out = buf;
  if (ms != 0) {
    std::snprintf(buf, sizeof buf, ".%03lld", static_cast<long long>(ms));
    out += buf;
  }
  out += 'Z';
  return out;
}

std::string_view to_string(ThreadKind kind) {
  return kind == ThreadKind::issue ? "issue" : "pull_request";
}

ThreadKind thread_kind_from_string(std::string_view text) {
  if (text == "issue") {
    return ThreadKind::issue;
  }
  if (text == "pull_request") {
    return ThreadKind::pull_request;
  }
  throw DomainError("unknown thread_kind: " + std::string(text));
}

void CorpusFilter::validate() const {
  if (min_comments < 1) {
    throw DomainError("min_comments must be at least 1");
  }
  if (max_comments < min_comments) {
    throw DomainError("max_comments must be >= min_comments");
  }
}

bool is_valid_repository_name(std::string_view repository) {
  const auto slash = repository.find('/');
  if (slash == std::string_view::npos || repository.find('/', slash + 1) != std::string_view::npos) {
    return false;
  }
  const auto owner = repository.substr(0, slash);
  const auto name = repository.substr(slash + 1);
  if (owner.empty() || owner.size() > 39 || name.empty() || name.size() > 100) {
    return false;
  }
  if (owner.front() == '-' || name == "." || name == "..") {
    return false;
  }
  auto owner_char = [](unsigned char c) { return std::isalnum(c) || c == '-'; };
  auto name_char = [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_' || c == '.'; };
  return std::all_of(owner.begin(), owner.end(), owner_char) &&
         std::all_of(name.begin(), name.end(), name_char);
}

namespace {

RawComment comment_from_json(const json &obj) {
  if (!obj.is_object()) {
    throw DomainError("record is not a JSON object");
  }
  static constexpr const char *kStringKeys[] = {"id", "repository", "thread_kind", "author",
                                                "created_at", "body"};
  for (const char *key : kStringKeys) {
    if (!obj.contains(key) || !obj[key].is_string()) {
      throw DomainError(std::string("missing or non-string field '") + key + "'");
    }
  }
  if (!obj.contains("is_description") || !obj["is_description"].is_boolean()) {
    throw DomainError("missing or non-boolean field 'is_description'");
  }
  RawComment c;
  c.id = obj["id"].get<std::string>();
  c.repository = obj["repository"].get<std::string>();
  c.thread_kind = thread_kind_from_string(obj["thread_kind"].get<std::string>());
  c.is_description = obj["is_description"].get<bool>();
  c.author = obj["author"].get<std::string>();
  c.created_at = parse_timestamp(obj["created_at"].get<std::string>());
  c.body = obj["body"].get<std::string>();
  if (c.id.empty()) {
    throw DomainError("empty id");
  }
  return c;
}

} // namespace

std::vector<RawComment> parse_corpus(std::string_view jsonl, std::string_view source) {
  std::vector<RawComment> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) {
      end = jsonl.size();
    }
    auto line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      continue;
    }
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception &e) {
      throw LoadError(where + ": invalid JSON: " + e.what());
    }
    RawComment c;
    try {
      c = comment_from_json(obj);
    } catch (const Error &e) {
      std::string id = obj.is_object() && obj.contains("id") && obj["id"].is_string()
                           ? obj["id"].get<std::string>()
                           : std::string("?");
      throw LoadError(where + ": record '" + id + "': " + e.what());
    }
    if (!seen.insert(c.id).second) {
      throw LoadError(where + ": duplicate id '" + c.id + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<RawComment> load_corpus(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError("cannot open corpus file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), path.string());
}

std::string to_json_line(const RawComment &comment) {
  // nlohmann's ordered_json keeps insertion order for a stable layout.
  nlohmann::ordered_json obj;
  obj["id"] = comment.id;
  obj["repository"] = comment.repository;
  obj["thread_kind"] = to_string(comment.thread_kind);
  obj["is_description"] = comment.is_description;
  obj["author"] = comment.author;
  obj["created_at"] = format_timestamp(comment.created_at);
  obj["body"] = comment.body;
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

void save_corpus(const std::filesystem::path &path, std::span<const RawComment> comments) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write corpus file " + path.string());
  }
  for (const auto &c : comments) {
    out << to_json_line(c) << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

bool more_recent(const RawComment &a, const RawComment &b) {
  if (a.created_at != b.created_at) {
    return a.created_at > b.created_at;
  }
  return a.id > b.id;
}

std::vector<AccountActivity> group_and_filter(std::span<const RawComment> comments,
                                              const CorpusFilter &filter) {
  filter.validate();
  std::map<std::string, std::vector<RawComment>> by_author;
  for (const auto &c : comments) {
    if (filter.start_date && c.created_at < *filter.start_date) {
      continue;
    }
    by_author[c.author].push_back(c);
  }

  std::set<std::string> allowed;
  if (filter.accounts) {
    allowed.insert(filter.accounts->begin(), filter.accounts->end());
  }

  std::vector<AccountActivity> out;
  for (auto &[author, list] : by_author) {
    if (filter.accounts && !allowed.contains(author)) {
      continue;
    }
    std::sort(list.begin(), list.end(), more_recent);
    if (list.size() > filter.max_comments) {
      list.resize(filter.max_comments);
    }
    if (list.size() < filter.min_comments) {
      continue;
    }
    AccountActivity activity;
    activity.account = author;
    for (const auto &c : list) {
      activity.repositories.insert(c.repository);
    }
    activity.comments = std::move(list);
    out.push_back(std::move(activity));
  }
  return out;
}

bool is_empty_comment(std::string_view body) {
  const auto text = unicode::decode_utf8(body);
  return std::all_of(text.begin(), text.end(), unicode::is_whitespace);
}

} // namespace botgate
