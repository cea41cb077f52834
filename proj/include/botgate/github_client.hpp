#pragma once

#include "botgate/corpus.hpp"

#include "json.hpp"

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace botgate {

inline constexpr std::string_view kGitHubGraphqlEndpoint = "https://api.github.com/graphql";
inline constexpr std::string_view kTokenEnvVar = "BOTGATE_GITHUB_TOKEN";

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers; // names lower-cased
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
public:
  virtual ~HttpTransport() = default;
  // Throws TransportError when no response was received.
  virtual HttpResponse post(const std::string &url, const HttpHeaders &headers,
                            const std::string &body) = 0;
};

// cpp-httplib backed transport; supports http:// and https:// URLs.
class HttplibTransport : public HttpTransport {
public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(60))
      : timeout_(timeout) {}
  HttpResponse post(const std::string &url, const HttpHeaders &headers,
                    const std::string &body) override;

private:
  std::chrono::seconds timeout_;
};

struct FetchLimits {
  std::size_t threads = 100;             // issues, and separately pull requests
  std::size_t comments_per_thread = 100; // most recent comments per thread, at most 100
  std::size_t page_size = 25;            // threads per request, at most 100

  void validate() const;
};

struct RetryPolicy {
  std::size_t max_retries = 5;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds max_backoff{60000};
  // A rate-limit reset further away than this fails fast instead of sleeping.
  std::chrono::milliseconds max_rate_limit_wait{std::chrono::minutes(15)};

  // Backoff before retry number `retry` (0-based): initial * 2^retry, capped.
  std::chrono::milliseconds backoff(std::size_t retry) const;
};

struct GitHubClientOptions {
  std::string endpoint{kGitHubGraphqlEndpoint};
  FetchLimits limits;
  RetryPolicy retry;
  std::function<void(std::chrono::milliseconds)> sleep;       // default: this_thread::sleep_for
  std::function<std::chrono::system_clock::time_point()> now; // default: system_clock::now
};

class GitHubClient {
public:
  // Throws CredentialError for an empty token.
  GitHubClient(std::string token, std::shared_ptr<HttpTransport> transport,
               GitHubClientOptions options = {});

  // Comments of the most recent issues and pull requests of `repository`,
  // plus each pull request's description, sorted most recent first.
  // Throws DomainError for a malformed name (before any request),
  // CredentialError, NotFoundError or TransportError.
  std::vector<RawComment> fetch_repository_comments(std::string_view repository);

  std::size_t requests_sent() const { return requests_; }

private:
  // One GraphQL round trip with retries; returns the "data" member.
  nlohmann::json query(const std::string &document, const nlohmann::json &variables);
  std::vector<RawComment> fetch_threads(const std::string &owner, const std::string &name,
                                        ThreadKind kind);

  std::string token_;
  std::shared_ptr<HttpTransport> transport_;
  GitHubClientOptions options_;
  std::size_t requests_ = 0;
};

// Convenience wrapper over GitHubClient with an HttplibTransport.
std::vector<RawComment> fetch_repository_comments(std::string_view repository, const std::string &token,
                                                  const FetchLimits &limits = {});

} // namespace botgate
