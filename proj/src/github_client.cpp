#include "botgate/github_client.hpp"

#include "botgate/errors.hpp"

#include "httplib.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <thread>

namespace botgate {

using json = nlohmann::json;

namespace {

constexpr const char *kIssuesQuery = R"(query($owner: String!, $name: String!, $first: Int!, $after: String, $comments: Int!) {
  repository(owner: $owner, name: $name) {
    threads: issues(first: $first, after: $after, orderBy: {field: CREATED_AT, direction: DESC}) {
      pageInfo { hasNextPage endCursor }
      nodes {
        comments(last: $comments) { nodes { id author { login } createdAt body } }
      }
    }
  }
})";

constexpr const char *kPullRequestsQuery = R"(query($owner: String!, $name: String!, $first: Int!, $after: String, $comments: Int!) {
  repository(owner: $owner, name: $name) {
    threads: pullRequests(first: $first, after: $after, orderBy: {field: CREATED_AT, direction: DESC}) {
      pageInfo { hasNextPage endCursor }
      nodes {
        id author { login } createdAt body
        comments(last: $comments) { nodes { id author { login } createdAt body } }
      }
    }
  }
})";

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<long long> header_number(const HttpResponse &r, const std::string &name) {
  const auto it = r.headers.find(name);
  if (it == r.headers.end()) {
    return std::nullopt;
  }
  long long value = 0;
  const auto &text = it->second;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

// Wait requested by the server through retry-after or an exhausted quota.
std::optional<std::chrono::milliseconds> rate_limit_wait(const HttpResponse &r,
                                                         std::chrono::system_clock::time_point now) {
  if (auto seconds = header_number(r, "retry-after")) {
    return std::chrono::seconds(std::max(0LL, *seconds));
  }
  const auto remaining = header_number(r, "x-ratelimit-remaining");
  const auto reset = header_number(r, "x-ratelimit-reset");
  if (remaining && *remaining == 0 && reset) {
    const auto at = std::chrono::system_clock::time_point(std::chrono::seconds(*reset));
    return std::max(std::chrono::milliseconds(0),
                    std::chrono::duration_cast<std::chrono::milliseconds>(at - now));
  }
  return std::nullopt;
}

bool has_error_type(const json &body, std::string_view type) {
  if (!body.contains("errors") || !body["errors"].is_array()) {
    return false;
  }
  for (const auto &e : body["errors"]) {
    if (e.contains("type") && e["type"].is_string() && e["type"].get<std::string>() == type) {
      return true;
    }
  }
  return false;
}

std::string first_error_message(const json &body) {
  for (const auto &e : body["errors"]) {
    if (e.contains("message") && e["message"].is_string()) {
      return e["message"].get<std::string>();
    }
  }
  return "unknown GraphQL error";
}

std::string string_or(const json &node, const char *key, std::string fallback) {
  if (node.contains(key) && node[key].is_string()) {
    return node[key].get<std::string>();
  }
  return fallback;
}

std::string author_of(const json &node) {
  // Deleted accounts come back as a null author; GitHub shows them as "ghost".
  if (node.contains("author") && node["author"].is_object()) {
    return string_or(node["author"], "login", "ghost");
  }
  return "ghost";
}

RawComment to_comment(const json &node, const std::string &repository, ThreadKind kind,
                      bool is_description) {
  RawComment c;
  c.id = string_or(node, "id", "");
  if (c.id.empty()) {
    throw TransportError("GraphQL response node without an id");
  }
  c.repository = repository;
  c.thread_kind = kind;
  c.is_description = is_description;
  c.author = author_of(node);
  try {
    c.created_at = parse_timestamp(string_or(node, "createdAt", ""));
  } catch (const DomainError &e) {
    throw TransportError("GraphQL response node " + c.id + ": " + e.what());
  }
  c.body = string_or(node, "body", "");
  return c;
}

const json &require(const json &node, const char *key) {
  if (!node.is_object() || !node.contains(key)) {
    throw TransportError(std::string("unexpected GraphQL response: missing '") + key + "'");
  }
  return node[key];
}

} // namespace

HttpResponse HttplibTransport::post(const std::string &url, const HttpHeaders &headers,
                                    const std::string &body) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportError("malformed endpoint URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid()) {
    throw TransportError("unsupported endpoint URL: " + url);
  }
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers h;
  std::string content_type = "application/json";
  for (const auto &[k, v] : headers) {
    if (lower(k) == "content-type") {
      content_type = v;
    } else {
      h.emplace(k, v);
    }
  }
  auto result = client.Post(path, h, body, content_type);
  if (!result) {
    throw TransportError("request to " + url + " failed: " + httplib::to_string(result.error()));
  }
  HttpResponse out;
  out.status = result->status;
  out.body = result->body;
  for (const auto &[k, v] : result->headers) {
    out.headers[lower(k)] = v;
  }
  return out;
}

void FetchLimits::validate() const {
  if (comments_per_thread < 1 || comments_per_thread > 100) {
    throw DomainError("comments_per_thread must lie in [1, 100]");
  }
  if (page_size < 1 || page_size > 100) {
    throw DomainError("page_size must lie in [1, 100]");
  }
}

std::chrono::milliseconds RetryPolicy::backoff(std::size_t retry) const {
  auto delay = initial_backoff;
  for (std::size_t i = 0; i < retry && delay < max_backoff; ++i) {
    delay *= 2;
  }
  return std::min(delay, max_backoff);
}

GitHubClient::GitHubClient(std::string token, std::shared_ptr<HttpTransport> transport,
                           GitHubClientOptions options)
    : token_(std::move(token)), transport_(std::move(transport)), options_(std::move(options)) {
  if (token_.empty()) {
    throw CredentialError("a GitHub API token is required");
  }
  if (!transport_) {
    throw DomainError("GitHubClient needs a transport");
  }
  options_.limits.validate();
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (!options_.now) {
    options_.now = [] { return std::chrono::system_clock::now(); };
  }
}

json GitHubClient::query(const std::string &document, const json &variables) {
  const HttpHeaders headers = {{"Authorization", "bearer " + token_},
                               {"Content-Type", "application/json"},
                               {"Accept", "application/json"},
                               {"User-Agent", "botgate"}};
  const std::string payload = json{{"query", document}, {"variables", variables}}.dump();

  std::string last_failure;
  for (std::size_t attempt = 0;; ++attempt) {
    std::optional<std::chrono::milliseconds> server_wait;
    std::optional<HttpResponse> response;
    ++requests_;
    try {
      response = transport_->post(options_.endpoint, headers, payload);
    } catch (const TransportError &e) {
      last_failure = e.what();
    }
    if (response) {
      const HttpResponse &r = *response;
      if (r.status == 401) {
        throw CredentialError("GitHub rejected the API token (HTTP 401)");
      }
      if (r.status == 403 || r.status == 429) {
        server_wait = rate_limit_wait(r, options_.now());
        const bool limited = r.status == 429 || server_wait.has_value() ||
                             lower(r.body).find("rate limit") != std::string::npos;
        if (!limited) {
          throw CredentialError("GitHub refused access (HTTP 403); check the token's scopes");
        }
        last_failure = "rate limited (HTTP " + std::to_string(r.status) + ")";
      } else if (r.status >= 500) {
        last_failure = "server error (HTTP " + std::to_string(r.status) + ")";
      } else if (r.status == 404) {
        throw NotFoundError("GraphQL endpoint not found: " + options_.endpoint);
      } else if (r.status != 200) {
        throw TransportError("unexpected HTTP status " + std::to_string(r.status));
      } else {
        json body;
        try {
          body = json::parse(r.body);
        } catch (const json::parse_error &) {
          throw TransportError("GitHub returned a body that is not JSON");
        }
        if (has_error_type(body, "RATE_LIMITED")) {
          server_wait = rate_limit_wait(r, options_.now());
          last_failure = "rate limited (GraphQL)";
        } else if (has_error_type(body, "NOT_FOUND")) {
          throw NotFoundError("repository not found: " + first_error_message(body));
        } else if (body.contains("errors") && !body["errors"].empty()) {
          throw TransportError("GraphQL error: " + first_error_message(body));
        } else {
          return require(body, "data");
        }
      }
    }

    if (attempt >= options_.retry.max_retries) {
      throw TransportError("giving up after " + std::to_string(attempt + 1) + " attempts: " + last_failure);
    }
    auto delay = options_.retry.backoff(attempt);
    if (server_wait) {
      if (*server_wait > options_.retry.max_rate_limit_wait) {
        throw TransportError("rate limit resets in " +
                             std::to_string(std::chrono::duration_cast<std::chrono::seconds>(*server_wait).count()) +
                             "s, longer than the configured maximum wait");
      }
      delay = std::max(delay, *server_wait);
    }
    options_.sleep(delay);
  }
}

std::vector<RawComment> GitHubClient::fetch_threads(const std::string &owner, const std::string &name,
                                                    ThreadKind kind) {
  const std::string repository = owner + "/" + name;
  const auto &limits = options_.limits;
  const bool pulls = kind == ThreadKind::pull_request;
  std::vector<RawComment> out;
  std::size_t threads_seen = 0;
  json cursor = nullptr;
  while (threads_seen < limits.threads) {
    const std::size_t want = std::min(limits.page_size, limits.threads - threads_seen);
    const json variables = {{"owner", owner},
                            {"name", name},
                            {"first", want},
                            {"after", cursor},
                            {"comments", limits.comments_per_thread}};
    const json data = query(pulls ? kPullRequestsQuery : kIssuesQuery, variables);
    const json &repo = require(data, "repository");
    if (repo.is_null()) {
      throw NotFoundError("repository not found: " + repository);
    }
    const json &connection = require(repo, "threads");
    const json &nodes = require(connection, "nodes");
    for (const auto &thread : nodes) {
      if (threads_seen == limits.threads) {
        break;
      }
      ++threads_seen;
      if (thread.is_null()) {
        continue;
      }
      if (pulls) {
        out.push_back(to_comment(thread, repository, kind, true));
      }
      const json &comments = require(require(thread, "comments"), "nodes");
      // "last: n" returns the newest n oldest-first; keep the newest n if a
      // server sends more than asked.
      const std::size_t n = comments.size();
      const std::size_t skip = n > limits.comments_per_thread ? n - limits.comments_per_thread : 0;
      for (std::size_t i = skip; i < n; ++i) {
        if (!comments[i].is_null()) {
          out.push_back(to_comment(comments[i], repository, kind, false));
        }
      }
    }
    const json &page = require(connection, "pageInfo");
    if (nodes.empty() || !page.value("hasNextPage", false)) {
      break;
    }
    cursor = require(page, "endCursor");
  }
  return out;
}

std::vector<RawComment> GitHubClient::fetch_repository_comments(std::string_view repository) {
  if (!is_valid_repository_name(repository)) {
    throw DomainError("repository must look like owner/name: " + std::string(repository));
  }
  const auto slash = repository.find('/');
  const std::string owner(repository.substr(0, slash));
  const std::string name(repository.substr(slash + 1));

  auto comments = fetch_threads(owner, name, ThreadKind::issue);
  auto pulls = fetch_threads(owner, name, ThreadKind::pull_request);
  comments.insert(comments.end(), std::make_move_iterator(pulls.begin()),
                  std::make_move_iterator(pulls.end()));
  std::sort(comments.begin(), comments.end(), more_recent);
  return comments;
}

std::vector<RawComment> fetch_repository_comments(std::string_view repository, const std::string &token,
                                                  const FetchLimits &limits) {
  if (!is_valid_repository_name(repository)) {
    throw DomainError("repository must look like owner/name: " + std::string(repository));
  }
  GitHubClientOptions options;
  options.limits = limits;
  GitHubClient client(token, std::make_shared<HttplibTransport>(), options);
  return client.fetch_repository_comments(repository);
}

} // namespace botgate
