#pragma once

#include "botgate/corpus.hpp"
#include "botgate/dataset.hpp"
#include "botgate/stats.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace botgate {

enum class Verdict { bot, human, unknown };
enum class Difficulty { very_easy, easy, difficult, very_difficult };
// Round-2 resolution. Mixed accounts never reach a training export.
enum class Resolution { bot, human, mixed };
enum class TimestampPolicy { never, round2, always };

std::string_view to_string(Verdict v);
std::string_view to_string(Difficulty d);
std::string_view to_string(Resolution r);
std::string_view to_string(TimestampPolicy p);
// These throw ValidationError on anything outside the enumeration.
Verdict verdict_from_string(std::string_view text);
Difficulty difficulty_from_string(std::string_view text);
Resolution resolution_from_string(std::string_view text);
TimestampPolicy timestamp_policy_from_string(std::string_view text);

struct Rater {
  std::string id;
  std::string token;
  bool adjudicator = false;
};

struct RatingConfig {
  std::vector<Rater> raters;
  std::size_t raters_per_account = 2;
  std::size_t batch_size = 20;
  std::size_t snapshot_every = 100; // log records between snapshots, 0 = never
  TimestampPolicy timestamps = TimestampPolicy::round2;
  std::string salt; // mixed into account references

  // Throws ValidationError.
  void validate() const;
};

// JSON: {"raters":[{"id":..,"token":..,"adjudicator":bool}], "raters_per_account":2,
// "batch_size":20, "snapshot_every":100, "timestamps":"round2", "salt":""}.
// Throws LoadError.
RatingConfig parse_rating_config(std::string_view text, std::string_view source = "<memory>");
RatingConfig load_rating_config(const std::filesystem::path &path);

struct RatingRecord {
  std::string rater_id;
  std::string account_ref;
  Verdict verdict = Verdict::unknown;
  Difficulty difficulty = Difficulty::easy;
  int round = 1;
  Timestamp timestamp{};

  bool operator==(const RatingRecord &) const = default;
};

struct AdjudicationRecord {
  std::string rater_id;
  std::string account_ref;
  Resolution label = Resolution::mixed;
  Timestamp timestamp{};

  bool operator==(const AdjudicationRecord &) const = default;
};

struct BatchComment {
  std::string body; // account and repository names redacted
  std::string kind; // issue_comment, pr_comment or pr_description
  std::optional<Timestamp> created_at;
};

struct Batch {
  bool done = false; // nothing left for this rater in this round
  int round = 1;
  std::string account_ref;
  std::size_t offset = 0;
  std::size_t total_comments = 0;
  std::vector<BatchComment> comments;
  bool has_more = false;
  std::string next_cursor; // empty unless has_more
};

struct Acknowledgment {
  std::string account_ref;
  int round = 1;
  std::size_t revision = 1; // submissions so far for (rater, account, round)
};

enum class AccountStatus { pending, agreed, queued, resolved };
std::string_view to_string(AccountStatus s);

struct PairAgreement {
  std::string rater_a;
  std::string rater_b;
  std::size_t shared_accounts = 0;
  KappaResult kappa;
};

struct AgreementReport {
  std::vector<PairAgreement> pairs; // pairs sharing at least one account
  std::size_t agreed_bot = 0;
  std::size_t agreed_human = 0;
  std::size_t agreed_unknown = 0;
  std::size_t disagreements = 0;
  std::size_t flagged_difficult = 0; // concordant bot/human but rated difficult
  std::size_t pending = 0;
  std::size_t resolved = 0;
  std::vector<std::string> round2_queue; // account refs awaiting adjudication
};

struct ExcludedRow {
  std::string repository;
  std::string account;
  std::string reason; // mixed or unresolved
};

struct GroundTruthExport {
  std::vector<GroundTruthRow> rows;  // one per (account, repository)
  std::vector<ExcludedRow> excluded; // sidecar rows
};

// Stable opaque key for an account: "acct-" and 16 hex digits of FNV-1a.
std::string make_account_ref(std::string_view account, std::string_view salt = "");

// Sidecar path for an export: ground_truth.csv -> ground_truth.excluded.csv.
std::filesystem::path excluded_sidecar_path(const std::filesystem::path &export_path);

// Two-round rating workflow over a fixed set of accounts. Every state change
// is appended to a JSON Lines log before it is applied, so replaying the log
// (optionally from a snapshot) rebuilds the same state. All members are safe
// to call concurrently.
class RatingService {
public:
  using Clock = std::function<Timestamp()>;

  // Replays `log_path` (and its snapshot, if present and consistent).
  // Throws ValidationError for a bad config, LoadError for a malformed log,
  // IoError when the log cannot be opened.
  RatingService(std::vector<AccountActivity> accounts, RatingConfig config,
                std::filesystem::path log_path, Clock clock = {});
  ~RatingService();
  RatingService(const RatingService &) = delete;
  RatingService &operator=(const RatingService &) = delete;

  // Throws AuthError for an unknown token.
  const Rater &authenticate(std::string_view token) const;

  // Next unrated account for this rater in `round`, 20 comments at a time.
  // A cursor from a previous batch continues with older comments. Throws
  // ValidationError for a malformed cursor or round, UnknownAccountError,
  // ForbiddenError when the account is not available to the rater.
  Batch next_batch(const std::string &rater_id, int round, const std::string &cursor = "") const;

  // Round 1 accepts accounts assigned to the rater; round 2 accepts any
  // account in the round-2 queue. Resubmission replaces the verdict and
  // keeps the earlier records in the log.
  Acknowledgment submit_rating(const std::string &rater_id, const std::string &account_ref,
                               Verdict verdict, Difficulty difficulty, int round = 1);

  // Adjudicators only (ForbiddenError); the account must be queued for or
  // already through round 2 (ConflictError).
  Acknowledgment adjudicate(const std::string &rater_id, const std::string &account_ref,
                            Resolution label);

  AgreementReport agreement() const;
  AccountStatus status(const std::string &account_ref) const;
  GroundTruthExport ground_truth() const;
  // Writes the CSV and its sidecar. Throws IoError.
  void export_ground_truth(const std::filesystem::path &path) const;

  // Every submission for (rater, account, round), oldest first, read back
  // from the log.
  std::vector<RatingRecord> history(const std::string &rater_id, const std::string &account_ref,
                                    int round) const;

  std::vector<std::string> assigned_refs(const std::string &rater_id) const;
  // Accounts this rater has rated in `round`.
  std::size_t rated_count(const std::string &rater_id, int round) const;
  std::string account_ref(std::string_view account) const;
  std::size_t log_records() const;
  void write_snapshot() const;
  static std::filesystem::path snapshot_path(const std::filesystem::path &log_path);

private:
  struct Account {
    std::string name;
    std::string ref;
    std::vector<RawComment> comments;
    std::set<std::string> repositories;
    std::vector<std::string> raters;
  };
  struct Latest {
    RatingRecord record;
    std::size_t revisions = 0;
  };
  struct LatestAdjudication {
    AdjudicationRecord record;
    std::size_t revisions = 0;
  };
  using RatingKey = std::tuple<std::string, std::string, int>; // rater, ref, round

  const Account &find(const std::string &ref) const;
  const Rater &rater(const std::string &id) const;
  AccountStatus status_locked(const Account &a) const;
  bool queued_locked(const Account &a) const;
  bool rated_locked(const std::string &rater_id, const std::string &ref, int round) const;
  Batch make_batch(const Account &a, int round, std::size_t offset) const;
  void apply(const nlohmann::json &event);
  void append(nlohmann::json event);
  void replay();
  void write_snapshot_locked() const;

  RatingConfig config_;
  std::filesystem::path log_path_;
  Clock clock_;
  std::vector<Account> accounts_; // sorted by name
  std::map<std::string, std::size_t> by_ref_;
  std::map<RatingKey, Latest> ratings_;
  std::map<std::string, LatestAdjudication> adjudications_;
  std::size_t records_ = 0;
  std::uint64_t log_hash_; // FNV-1a over every log byte so far
  std::FILE *log_ = nullptr;
  mutable std::mutex mutex_;
};

// HTTP front end. Routes: GET /api/next, POST /api/ratings,
// POST /api/adjudications, GET /api/agreement, GET /api/export,
// GET /api/progress. Requests carry "Authorization: Bearer <token>".
// Errors are JSON {"code", "message"}.
class RatingServer {
public:
  // `static_dir`, when set, is served at "/" (the rating UI build).
  explicit RatingServer(RatingService &service, std::optional<std::filesystem::path> static_dir = {});
  ~RatingServer();
  RatingServer(const RatingServer &) = delete;
  RatingServer &operator=(const RatingServer &) = delete;

  // Returns the bound port; port 0 picks a free one. Throws IoError.
  int bind(const std::string &host, int port);
  // Blocks until stop().
  void listen();
  void wait_until_ready();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace botgate
