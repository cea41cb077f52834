#include "botgate/rating.hpp"

#include "botgate/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace botgate {

using json = nlohmann::json;

namespace {

constexpr std::string_view kSnapshotFormat = "botgate-rating-snapshot";
constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

template <class E, std::size_t N>
E enum_from(std::string_view text, const std::array<std::string_view, N> &names, const char *what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) {
      return static_cast<E>(i);
    }
  }
  throw ValidationError(std::string("invalid ") + what + " '" + std::string(text) + "'");
}

constexpr std::array<std::string_view, 3> kVerdicts = {"bot", "human", "unknown"};
constexpr std::array<std::string_view, 4> kDifficulties = {"very_easy", "easy", "difficult", "very_difficult"};
constexpr std::array<std::string_view, 3> kResolutions = {"bot", "human", "mixed"};
constexpr std::array<std::string_view, 3> kPolicies = {"never", "round2", "always"};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '-';
}

struct RedactTerm {
  std::string needle; // lower-case
  bool whole_word = false;
};

// Case-insensitive replacement of every term, longest match first.
std::string redact(const std::string &body, std::vector<RedactTerm> terms) {
  std::sort(terms.begin(), terms.end(),
            [](const RedactTerm &a, const RedactTerm &b) { return a.needle.size() > b.needle.size(); });
  const std::string lower = ascii_lower(body);
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size();) {
    bool hit = false;
    for (const auto &t : terms) {
      if (t.needle.empty() || lower.compare(i, t.needle.size(), t.needle) != 0) {
        continue;
      }
      const std::size_t end = i + t.needle.size();
      if (t.whole_word && ((i > 0 && word_char(body[i - 1])) || (end < body.size() && word_char(body[end])))) {
        continue;
      }
      out += "[redacted]";
      i = end;
      hit = true;
      break;
    }
    if (!hit) {
      out += body[i++];
    }
  }
  return out;
}

std::vector<RedactTerm> redact_terms(const std::string &account, const std::set<std::string> &repositories) {
  std::vector<RedactTerm> terms{{ascii_lower(account), false}};
  constexpr std::string_view kBotSuffix = "[bot]";
  if (account.size() > kBotSuffix.size() + 2 && account.ends_with(kBotSuffix)) {
    terms.push_back({ascii_lower(account.substr(0, account.size() - kBotSuffix.size())), false});
  }
  for (const auto &repo : repositories) {
    terms.push_back({ascii_lower(repo), false});
    const auto slash = repo.find('/');
    const std::string owner = repo.substr(0, slash);
    const std::string name = repo.substr(slash + 1);
    for (const auto &part : {owner, name}) {
      if (part.size() >= 3) {
        terms.push_back({ascii_lower(part), true});
      }
    }
  }
  return terms;
}

std::string comment_kind(const RawComment &c) {
  if (c.is_description) {
    return "pr_description";
  }
  return c.thread_kind == ThreadKind::pull_request ? "pr_comment" : "issue_comment";
}

json rating_json(const RatingRecord &r) {
  return {{"rater", r.rater_id},
          {"account_ref", r.account_ref},
          {"round", r.round},
          {"verdict", to_string(r.verdict)},
          {"difficulty", to_string(r.difficulty)},
          {"timestamp", format_timestamp(r.timestamp)}};
}

RatingRecord rating_from_json(const json &j) {
  RatingRecord r;
  r.rater_id = j.at("rater").get<std::string>();
  r.account_ref = j.at("account_ref").get<std::string>();
  r.round = j.at("round").get<int>();
  r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  r.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
  r.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
  return r;
}

json adjudication_json(const AdjudicationRecord &a) {
  return {{"rater", a.rater_id},
          {"account_ref", a.account_ref},
          {"label", to_string(a.label)},
          {"timestamp", format_timestamp(a.timestamp)}};
}

AdjudicationRecord adjudication_from_json(const json &j) {
  AdjudicationRecord a;
  a.rater_id = j.at("rater").get<std::string>();
  a.account_ref = j.at("account_ref").get<std::string>();
  a.label = resolution_from_string(j.at("label").get<std::string>());
  a.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
  return a;
}

std::vector<std::string> read_lines(const std::filesystem::path &path) {
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return lines;
  }
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  return lines;
}

std::string csv_field(const std::string &value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) {
    return value;
  }
  std::string out = "\"";
  for (char c : value) {
    out += c;
    if (c == '"') {
      out += '"';
    }
  }
  return out + "\"";
}

void write_text(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) {
    throw IoError("cannot write " + path.string());
  }
}

} // namespace

std::string_view to_string(Verdict v) { return kVerdicts[static_cast<std::size_t>(v)]; }
std::string_view to_string(Difficulty d) { return kDifficulties[static_cast<std::size_t>(d)]; }
std::string_view to_string(Resolution r) { return kResolutions[static_cast<std::size_t>(r)]; }
std::string_view to_string(TimestampPolicy p) { return kPolicies[static_cast<std::size_t>(p)]; }

std::string_view to_string(AccountStatus s) {
  switch (s) {
  case AccountStatus::pending:
    return "pending";
  case AccountStatus::agreed:
    return "agreed";
  case AccountStatus::queued:
    return "queued";
  case AccountStatus::resolved:
    return "resolved";
  }
  return "pending";
}

Verdict verdict_from_string(std::string_view text) { return enum_from<Verdict>(text, kVerdicts, "verdict"); }
Difficulty difficulty_from_string(std::string_view text) {
  return enum_from<Difficulty>(text, kDifficulties, "difficulty");
}
Resolution resolution_from_string(std::string_view text) {
  return enum_from<Resolution>(text, kResolutions, "resolution");
}
TimestampPolicy timestamp_policy_from_string(std::string_view text) {
  return enum_from<TimestampPolicy>(text, kPolicies, "timestamp policy");
}

void RatingConfig::validate() const {
  if (raters_per_account < 2) {
    throw ValidationError("every account needs at least two raters");
  }
  if (raters.size() < raters_per_account) {
    throw ValidationError("raters_per_account exceeds the number of configured raters");
  }
  if (batch_size == 0) {
    throw ValidationError("batch_size must be positive");
  }
  std::set<std::string> ids;
  std::set<std::string> tokens;
  for (const auto &r : raters) {
    if (r.id.empty() || r.token.empty()) {
      throw ValidationError("rater entries need a non-empty id and token");
    }
    if (!ids.insert(r.id).second) {
      throw ValidationError("duplicate rater id '" + r.id + "'");
    }
    if (!tokens.insert(r.token).second) {
      throw ValidationError("rater '" + r.id + "' reuses another rater's token");
    }
  }
}

RatingConfig parse_rating_config(std::string_view text, std::string_view source) {
  const std::string where(source);
  RatingConfig c;
  try {
    const json j = json::parse(text);
    for (const auto &r : j.at("raters")) {
      c.raters.push_back({r.at("id").get<std::string>(), r.at("token").get<std::string>(),
                          r.value("adjudicator", false)});
    }
    c.raters_per_account = j.value("raters_per_account", c.raters_per_account);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
    c.salt = j.value("salt", c.salt);
    if (j.contains("timestamps")) {
      c.timestamps = timestamp_policy_from_string(j["timestamps"].get<std::string>());
    }
    c.validate();
  } catch (const json::exception &e) {
    throw LoadError(where + ": invalid rating config: " + e.what());
  } catch (const ValidationError &e) {
    throw LoadError(where + ": " + e.what());
  }
  return c;
}

RatingConfig load_rating_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError("cannot read rating config " + path.string());
  }
  std::ostringstream s;
  s << in.rdbuf();
  return parse_rating_config(s.str(), path.string());
}

std::string make_account_ref(std::string_view account, std::string_view salt) {
  std::uint64_t h = fnv1a(salt);
  h = fnv1a(std::string_view("\0", 1), h);
  return "acct-" + hex64(fnv1a(account, h));
}

std::filesystem::path excluded_sidecar_path(const std::filesystem::path &export_path) {
  auto p = export_path;
  const auto ext = p.extension().string();
  p.replace_filename(p.stem().string() + ".excluded" + (ext.empty() ? ".csv" : ext));
  return p;
}

std::filesystem::path RatingService::snapshot_path(const std::filesystem::path &log_path) {
  auto p = log_path;
  p += ".snapshot.json";
  return p;
}

RatingService::RatingService(std::vector<AccountActivity> accounts, RatingConfig config,
                             std::filesystem::path log_path, Clock clock)
    : config_(std::move(config)), log_path_(std::move(log_path)), clock_(std::move(clock)),
      log_hash_(kFnvOffset) {
  config_.validate();
  if (!clock_) {
    clock_ = [] { return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now()); };
  }
  std::sort(accounts.begin(), accounts.end(),
            [](const AccountActivity &a, const AccountActivity &b) { return a.account < b.account; });
  const std::size_t n_raters = config_.raters.size();
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    Account a;
    a.name = accounts[i].account;
    a.ref = make_account_ref(a.name, config_.salt);
    a.comments = std::move(accounts[i].comments);
    std::sort(a.comments.begin(), a.comments.end(), more_recent);
    a.repositories = accounts[i].repositories;
    for (const auto &c : a.comments) {
      a.repositories.insert(c.repository);
    }
    for (std::size_t j = 0; j < config_.raters_per_account; ++j) {
      a.raters.push_back(config_.raters[(i + j) % n_raters].id);
    }
    if (i > 0 && a.name == accounts_.back().name) {
      throw ValidationError("account '" + a.name + "' appears twice");
    }
    if (!by_ref_.emplace(a.ref, accounts_.size()).second) {
      throw ValidationError("account reference collision for '" + a.name + "'; change the salt");
    }
    accounts_.push_back(std::move(a));
  }
  replay();
  log_ = std::fopen(log_path_.c_str(), "ab");
  if (!log_) {
    throw IoError("cannot open rating log " + log_path_.string());
  }
}

RatingService::~RatingService() {
  if (log_) {
    std::fclose(log_);
  }
}

void RatingService::replay() {
  const auto lines = read_lines(log_path_);
  std::size_t start = 0;

  // A snapshot is only trusted when the log still starts with the bytes it
  // was taken from; otherwise the whole log is replayed.
  const auto snap_path = snapshot_path(log_path_);
  std::ifstream snap_in(snap_path, std::ios::binary);
  if (snap_in) {
    try {
      const json snap = json::parse(snap_in);
      const auto n = snap.at("records").get<std::size_t>();
      if (snap.at("format") == kSnapshotFormat && n <= lines.size()) {
        std::uint64_t h = kFnvOffset;
        for (std::size_t i = 0; i < n; ++i) {
          h = fnv1a(lines[i], h);
          h = fnv1a("\n", h);
        }
        if (hex64(h) == snap.at("log_hash").get<std::string>()) {
          std::map<RatingKey, Latest> ratings;
          std::map<std::string, LatestAdjudication> adjudications;
          for (const auto &r : snap.at("ratings")) {
            auto rec = rating_from_json(r);
            auto key = RatingKey{rec.rater_id, rec.account_ref, rec.round};
            ratings[key] = {std::move(rec), r.at("revisions").get<std::size_t>()};
          }
          for (const auto &a : snap.at("adjudications")) {
            auto rec = adjudication_from_json(a);
            auto ref = rec.account_ref;
            adjudications[ref] = {std::move(rec), a.at("revisions").get<std::size_t>()};
          }
          ratings_ = std::move(ratings);
          adjudications_ = std::move(adjudications);
          records_ = n;
          log_hash_ = h;
          start = n;
        }
      }
    } catch (const std::exception &) {
      // unusable snapshot; the log is authoritative
    }
  }

  for (std::size_t i = start; i < lines.size(); ++i) {
    const std::string where = log_path_.string() + ":" + std::to_string(i + 1);
    if (lines[i].empty()) {
      throw LoadError(where + ": empty line in rating log");
    }
    try {
      apply(json::parse(lines[i]));
    } catch (const json::exception &e) {
      throw LoadError(where + ": " + e.what());
    } catch (const Error &e) {
      throw LoadError(where + ": " + e.what());
    }
    log_hash_ = fnv1a(lines[i], log_hash_);
    log_hash_ = fnv1a("\n", log_hash_);
  }
}

void RatingService::apply(const json &event) {
  const auto type = event.at("type").get<std::string>();
  if (type == "rating") {
    auto rec = rating_from_json(event);
    find(rec.account_ref);
    rater(rec.rater_id);
    auto &slot = ratings_[RatingKey{rec.rater_id, rec.account_ref, rec.round}];
    slot.record = std::move(rec);
    ++slot.revisions;
  } else if (type == "adjudication") {
    auto rec = adjudication_from_json(event);
    find(rec.account_ref);
    rater(rec.rater_id);
    auto &slot = adjudications_[rec.account_ref];
    slot.record = std::move(rec);
    ++slot.revisions;
  } else {
    throw ValidationError("unknown event type '" + type + "'");
  }
  ++records_;
}

void RatingService::append(json event) {
  const std::string line = event.dump() + "\n";
  if (std::fputs(line.c_str(), log_) < 0 || std::fflush(log_) != 0 || ::fsync(::fileno(log_)) != 0) {
    throw IoError("cannot append to rating log " + log_path_.string());
  }
  log_hash_ = fnv1a(line, log_hash_);
  apply(event);
  if (config_.snapshot_every > 0 && records_ % config_.snapshot_every == 0) {
    write_snapshot_locked();
  }
}

void RatingService::write_snapshot() const {
  std::lock_guard lock(mutex_);
  write_snapshot_locked();
}

void RatingService::write_snapshot_locked() const {
  json ratings = json::array();
  for (const auto &[key, latest] : ratings_) {
    auto j = rating_json(latest.record);
    j["revisions"] = latest.revisions;
    ratings.push_back(std::move(j));
  }
  json adjudications = json::array();
  for (const auto &[ref, latest] : adjudications_) {
    auto j = adjudication_json(latest.record);
    j["revisions"] = latest.revisions;
    adjudications.push_back(std::move(j));
  }
  const json snap = {{"format", kSnapshotFormat},
                     {"records", records_},
                     {"log_hash", hex64(log_hash_)},
                     {"ratings", std::move(ratings)},
                     {"adjudications", std::move(adjudications)}};
  const auto path = snapshot_path(log_path_);
  auto tmp = path;
  tmp += ".tmp";
  write_text(tmp, snap.dump(1) + "\n");
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot replace snapshot " + path.string() + ": " + ec.message());
  }
}

const Rater &RatingService::authenticate(std::string_view token) const {
  for (const auto &r : config_.raters) {
    if (!token.empty() && r.token == token) {
      return r;
    }
  }
  throw AuthError("unknown or missing rater token");
}

const RatingService::Account &RatingService::find(const std::string &ref) const {
  const auto it = by_ref_.find(ref);
  if (it == by_ref_.end()) {
    throw UnknownAccountError("unknown account_ref '" + ref + "'");
  }
  return accounts_[it->second];
}

const Rater &RatingService::rater(const std::string &id) const {
  for (const auto &r : config_.raters) {
    if (r.id == id) {
      return r;
    }
  }
  throw ValidationError("unknown rater '" + id + "'");
}

bool RatingService::rated_locked(const std::string &rater_id, const std::string &ref, int round) const {
  return ratings_.count(RatingKey{rater_id, ref, round}) > 0;
}

AccountStatus RatingService::status_locked(const Account &a) const {
  if (adjudications_.count(a.ref)) {
    return AccountStatus::resolved;
  }
  std::vector<const RatingRecord *> round1;
  for (const auto &r : a.raters) {
    const auto it = ratings_.find(RatingKey{r, a.ref, 1});
    if (it == ratings_.end()) {
      return AccountStatus::pending;
    }
    round1.push_back(&it->second.record);
  }
  const Verdict first = round1.front()->verdict;
  for (const auto *r : round1) {
    if (r->verdict != first || r->difficulty >= Difficulty::difficult) {
      return AccountStatus::queued;
    }
  }
  return first == Verdict::unknown ? AccountStatus::queued : AccountStatus::agreed;
}

bool RatingService::queued_locked(const Account &a) const {
  return status_locked(a) == AccountStatus::queued;
}

AccountStatus RatingService::status(const std::string &account_ref) const {
  std::lock_guard lock(mutex_);
  return status_locked(find(account_ref));
}

Batch RatingService::make_batch(const Account &a, int round, std::size_t offset) const {
  Batch b;
  b.round = round;
  b.account_ref = a.ref;
  b.offset = offset;
  b.total_comments = a.comments.size();
  const bool stamps = config_.timestamps == TimestampPolicy::always ||
                      (config_.timestamps == TimestampPolicy::round2 && round == 2);
  const auto terms = redact_terms(a.name, a.repositories);
  const std::size_t end = std::min(a.comments.size(), offset + config_.batch_size);
  for (std::size_t i = offset; i < end; ++i) {
    const auto &c = a.comments[i];
    BatchComment bc;
    bc.body = redact(c.body, terms);
    bc.kind = comment_kind(c);
    if (stamps) {
      bc.created_at = c.created_at;
    }
    b.comments.push_back(std::move(bc));
  }
  b.has_more = end < a.comments.size();
  if (b.has_more) {
    b.next_cursor = a.ref + ":" + std::to_string(end);
  }
  return b;
}

Batch RatingService::next_batch(const std::string &rater_id, int round, const std::string &cursor) const {
  std::lock_guard lock(mutex_);
  rater(rater_id);
  if (round != 1 && round != 2) {
    throw ValidationError("round must be 1 or 2");
  }
  auto available = [&](const Account &a) {
    if (round == 1) {
      return std::find(a.raters.begin(), a.raters.end(), rater_id) != a.raters.end();
    }
    return queued_locked(a);
  };

  if (!cursor.empty()) {
    const auto colon = cursor.rfind(':');
    std::size_t offset = 0;
    if (colon == std::string::npos) {
      throw ValidationError("malformed cursor");
    }
    const std::string digits = cursor.substr(colon + 1);
    if (digits.empty() || digits.size() > 9 ||
        !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
      throw ValidationError("malformed cursor");
    }
    offset = std::stoul(digits);
    const Account &a = find(cursor.substr(0, colon));
    if (!available(a)) {
      throw ForbiddenError("account " + a.ref + " is not available to rater '" + rater_id + "' in round " +
                           std::to_string(round));
    }
    if (offset == 0 || offset >= a.comments.size()) {
      throw ValidationError("cursor offset out of range");
    }
    return make_batch(a, round, offset);
  }

  for (const auto &a : accounts_) {
    if (available(a) && !rated_locked(rater_id, a.ref, round)) {
      return make_batch(a, round, 0);
    }
  }
  Batch done;
  done.done = true;
  done.round = round;
  return done;
}

Acknowledgment RatingService::submit_rating(const std::string &rater_id, const std::string &account_ref,
                                            Verdict verdict, Difficulty difficulty, int round) {
  std::lock_guard lock(mutex_);
  rater(rater_id);
  if (round != 1 && round != 2) {
    throw ValidationError("round must be 1 or 2");
  }
  const Account &a = find(account_ref);
  if (round == 1 && std::find(a.raters.begin(), a.raters.end(), rater_id) == a.raters.end()) {
    throw ForbiddenError("account " + a.ref + " is not assigned to rater '" + rater_id + "'");
  }
  if (round == 2 && !queued_locked(a)) {
    throw ConflictError("account " + a.ref + " is not in the round-2 queue");
  }
  RatingRecord rec{rater_id, account_ref, verdict, difficulty, round, clock_()};
  auto event = rating_json(rec);
  event["type"] = "rating";
  append(std::move(event));
  return {account_ref, round, ratings_.at(RatingKey{rater_id, account_ref, round}).revisions};
}

Acknowledgment RatingService::adjudicate(const std::string &rater_id, const std::string &account_ref,
                                         Resolution label) {
  std::lock_guard lock(mutex_);
  if (!rater(rater_id).adjudicator) {
    throw ForbiddenError("rater '" + rater_id + "' is not an adjudicator");
  }
  const Account &a = find(account_ref);
  const auto s = status_locked(a);
  if (s != AccountStatus::queued && s != AccountStatus::resolved) {
    throw ConflictError("account " + a.ref + " is " + std::string(to_string(s)) + ", not awaiting round 2");
  }
  AdjudicationRecord rec{rater_id, account_ref, label, clock_()};
  auto event = adjudication_json(rec);
  event["type"] = "adjudication";
  append(std::move(event));
  return {account_ref, 2, adjudications_.at(account_ref).revisions};
}

AgreementReport RatingService::agreement() const {
  std::lock_guard lock(mutex_);
  AgreementReport report;
  for (const auto &a : accounts_) {
    const auto s = status_locked(a);
    if (s == AccountStatus::resolved) {
      ++report.resolved;
    }
    if (s == AccountStatus::queued) {
      report.round2_queue.push_back(a.ref);
    }
    std::vector<const RatingRecord *> round1;
    for (const auto &r : a.raters) {
      const auto it = ratings_.find(RatingKey{r, a.ref, 1});
      if (it != ratings_.end()) {
        round1.push_back(&it->second.record);
      }
    }
    if (round1.size() < a.raters.size()) {
      ++report.pending;
      continue;
    }
    const Verdict first = round1.front()->verdict;
    const bool concordant = std::all_of(round1.begin(), round1.end(),
                                        [&](const RatingRecord *r) { return r->verdict == first; });
    const bool difficult = std::any_of(round1.begin(), round1.end(), [](const RatingRecord *r) {
      return r->difficulty >= Difficulty::difficult;
    });
    if (!concordant) {
      ++report.disagreements;
    } else if (first == Verdict::unknown) {
      ++report.agreed_unknown;
    } else if (difficult) {
      ++report.flagged_difficult;
    } else if (first == Verdict::bot) {
      ++report.agreed_bot;
    } else {
      ++report.agreed_human;
    }
  }

  const auto &raters = config_.raters;
  for (std::size_t i = 0; i < raters.size(); ++i) {
    for (std::size_t j = i + 1; j < raters.size(); ++j) {
      std::vector<Verdict> va;
      std::vector<Verdict> vb;
      for (const auto &a : accounts_) {
        const auto ia = ratings_.find(RatingKey{raters[i].id, a.ref, 1});
        const auto ib = ratings_.find(RatingKey{raters[j].id, a.ref, 1});
        if (ia != ratings_.end() && ib != ratings_.end()) {
          va.push_back(ia->second.record.verdict);
          vb.push_back(ib->second.record.verdict);
        }
      }
      if (va.empty()) {
        continue;
      }
      PairAgreement p;
      p.rater_a = raters[i].id;
      p.rater_b = raters[j].id;
      p.shared_accounts = va.size();
      p.kappa = cohens_kappa<Verdict>(va, vb);
      report.pairs.push_back(std::move(p));
    }
  }
  return report;
}

GroundTruthExport RatingService::ground_truth() const {
  std::lock_guard lock(mutex_);
  GroundTruthExport out;
  for (const auto &a : accounts_) {
    const auto s = status_locked(a);
    std::optional<Label> label;
    std::string reason = "unresolved";
    if (s == AccountStatus::agreed) {
      const auto &r = ratings_.at(RatingKey{a.raters.front(), a.ref, 1}).record;
      label = r.verdict == Verdict::bot ? Label::bot : Label::human;
    } else if (s == AccountStatus::resolved) {
      const auto res = adjudications_.at(a.ref).record.label;
      if (res == Resolution::mixed) {
        reason = "mixed";
      } else {
        label = res == Resolution::bot ? Label::bot : Label::human;
      }
    }
    for (const auto &repo : a.repositories) {
      if (label) {
        out.rows.push_back({repo, a.name, *label});
      } else {
        out.excluded.push_back({repo, a.name, reason});
      }
    }
  }
  return out;
}

void RatingService::export_ground_truth(const std::filesystem::path &path) const {
  const auto gt = ground_truth();
  save_ground_truth(path, gt.rows);
  std::string sidecar = "repository,account,reason\n";
  for (const auto &e : gt.excluded) {
    sidecar += csv_field(e.repository) + ',' + csv_field(e.account) + ',' + e.reason + '\n';
  }
  write_text(excluded_sidecar_path(path), sidecar);
}

std::vector<RatingRecord> RatingService::history(const std::string &rater_id, const std::string &account_ref,
                                                 int round) const {
  std::lock_guard lock(mutex_);
  std::vector<RatingRecord> out;
  for (const auto &line : read_lines(log_path_)) {
    const json j = json::parse(line);
    if (j.at("type") == "rating" && j.at("rater") == rater_id && j.at("account_ref") == account_ref &&
        j.at("round") == round) {
      out.push_back(rating_from_json(j));
    }
  }
  return out;
}

std::vector<std::string> RatingService::assigned_refs(const std::string &rater_id) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto &a : accounts_) {
    if (std::find(a.raters.begin(), a.raters.end(), rater_id) != a.raters.end()) {
      out.push_back(a.ref);
    }
  }
  return out;
}

std::size_t RatingService::rated_count(const std::string &rater_id, int round) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto &[key, latest] : ratings_) {
    n += std::get<0>(key) == rater_id && std::get<2>(key) == round ? 1 : 0;
  }
  return n;
}

std::string RatingService::account_ref(std::string_view account) const {
  return make_account_ref(account, config_.salt);
}

std::size_t RatingService::log_records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

} // namespace botgate
