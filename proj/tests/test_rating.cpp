#include "doctest.h"

#include "botgate/errors.hpp"
#include "botgate/rating.hpp"

#include "httplib.h"
#include "json.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

using namespace botgate;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("botgate_rating_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Timestamp at(int day) { return parse_timestamp("2023-05-01T00:00:00Z") + std::chrono::days(day); }

AccountActivity account(const std::string &name, std::size_t n, std::vector<std::string> repos = {"acme/widgets"},
                        const std::string &body_prefix = "comment") {
  AccountActivity a;
  a.account = name;
  for (std::size_t i = 0; i < n; ++i) {
    RawComment c;
    c.id = name + "-" + std::to_string(i);
    c.repository = repos[i % repos.size()];
    c.thread_kind = i % 2 ? ThreadKind::pull_request : ThreadKind::issue;
    c.author = name;
    c.created_at = at(static_cast<int>(i));
    c.body = body_prefix + " " + std::to_string(i);
    a.comments.push_back(c);
    a.repositories.insert(c.repository);
  }
  std::sort(a.comments.begin(), a.comments.end(), more_recent);
  return a;
}

RatingConfig two_raters() {
  RatingConfig c;
  c.raters = {{"ana", "tok-ana", true}, {"ben", "tok-ben", false}};
  return c;
}

std::string read(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const fs::path &p) {
  const auto text = read(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Ten accounts whose bodies quote their own names and repositories.
std::vector<AccountActivity> session_accounts() {
  const std::vector<std::string> names = {"alpha-ci[bot]", "beta-deploy", "gamma-sync", "delta-ann",  "echo-ben",
                                          "foxtrot-li",    "golf-omar",   "hotel-kim",  "india-raj", "juliet-sam"};
  std::vector<AccountActivity> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string repo = "acme/repo" + std::to_string(i);
    auto a = account(names[i], 25, {repo}, "Hi from " + names[i] + " in " + repo + ", cc @" + names[i]);
    out.push_back(std::move(a));
  }
  return out;
}

} // namespace

TEST_CASE("enumerations parse strictly") {
  CHECK(verdict_from_string("bot") == Verdict::bot);
  CHECK(to_string(Verdict::unknown) == "unknown");
  CHECK(difficulty_from_string("very_difficult") == Difficulty::very_difficult);
  CHECK(resolution_from_string("mixed") == Resolution::mixed);
  CHECK_THROWS_AS(verdict_from_string("maybe"), ValidationError);
  CHECK_THROWS_AS(verdict_from_string("Bot"), ValidationError);
  CHECK_THROWS_AS(difficulty_from_string("hard"), ValidationError);
  CHECK_THROWS_AS(resolution_from_string("unknown"), ValidationError);
}

TEST_CASE("rating config parsing and validation") {
  const auto c = parse_rating_config(
      R"({"raters":[{"id":"a","token":"x","adjudicator":true},{"id":"b","token":"y"}],"timestamps":"always","batch_size":5})");
  CHECK(c.raters.size() == 2);
  CHECK(c.raters[0].adjudicator);
  CHECK_FALSE(c.raters[1].adjudicator);
  CHECK(c.timestamps == TimestampPolicy::always);
  CHECK(c.batch_size == 5);
  CHECK(c.raters_per_account == 2);

  CHECK_THROWS_AS(parse_rating_config(R"({"raters":[{"id":"a","token":"x"}]})"), LoadError);
  CHECK_THROWS_AS(parse_rating_config(R"({"raters":[{"id":"a","token":"x"},{"id":"a","token":"y"}]})"), LoadError);
  CHECK_THROWS_AS(parse_rating_config(R"({"raters":[{"id":"a","token":"x"},{"id":"b","token":"x"}]})"), LoadError);
  CHECK_THROWS_AS(parse_rating_config("{"), LoadError);
  CHECK_THROWS_AS(load_rating_config("/nonexistent/raters.json"), LoadError);
}

TEST_CASE("account references are opaque and stable") {
  const auto r = make_account_ref("octocat");
  CHECK(r.rfind("acct-", 0) == 0);
  CHECK(r.size() == 21);
  CHECK(r.find("octocat") == std::string::npos);
  CHECK(make_account_ref("octocat") == r);
  CHECK(make_account_ref("octocat", "pepper") != r);
  CHECK(make_account_ref("octocaT") != r);
  CHECK(excluded_sidecar_path("out/gt.csv") == fs::path("out/gt.excluded.csv"));
}

TEST_CASE("batches of twenty, most recent first") {
  TempDir dir;
  RatingService svc({account("user35", 35)}, two_raters(), dir.path / "log.jsonl");
  const auto first = svc.next_batch("ben", 1);
  REQUIRE_FALSE(first.done);
  CHECK(first.comments.size() == 20);
  CHECK(first.has_more);
  CHECK(first.total_comments == 35);
  CHECK(first.comments.front().body == "comment 34");
  CHECK(first.comments.back().body == "comment 15");
  const auto second = svc.next_batch("ben", 1, first.next_cursor);
  CHECK(second.comments.size() == 15);
  CHECK_FALSE(second.has_more);
  CHECK(second.next_cursor.empty());
  CHECK(second.offset == 20);
  CHECK(second.comments.back().body == "comment 0");

  // unrated accounts stay at the head of the queue
  CHECK(svc.next_batch("ben", 1).account_ref == first.account_ref);
  svc.submit_rating("ben", first.account_ref, Verdict::human, Difficulty::easy);
  CHECK(svc.next_batch("ben", 1).done);

  CHECK_THROWS_AS(svc.next_batch("ben", 1, "garbage"), ValidationError);
  CHECK_THROWS_AS(svc.next_batch("ben", 1, first.account_ref + ":x"), ValidationError);
  CHECK_THROWS_AS(svc.next_batch("ben", 1, first.account_ref + ":35"), ValidationError);
  CHECK_THROWS_AS(svc.next_batch("ben", 1, "acct-0000000000000000:20"), UnknownAccountError);
  CHECK_THROWS_AS(svc.next_batch("ben", 3), ValidationError);
}

TEST_CASE("batches never carry account or repository names") {
  TempDir dir;
  auto a = account("Wobble-Bot[bot]", 12, {"acme/widgets", "acme/gizmo-kit"},
                   "wobble-bot[bot] says: WOBBLE-BOT ran on acme/widgets and Acme/Gizmo-Kit (gizmo-kit)");
  RatingService svc({a}, two_raters(), dir.path / "log.jsonl");
  const auto b = svc.next_batch("ana", 1);
  for (const auto &c : b.comments) {
    const std::string lower = [&] {
      std::string s = c.body;
      std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
      return s;
    }();
    CHECK(lower.find("wobble") == std::string::npos);
    CHECK(lower.find("acme/") == std::string::npos);
    CHECK(lower.find("gizmo-kit") == std::string::npos);
    CHECK(c.body.find("[redacted]") != std::string::npos);
    CHECK_FALSE(c.created_at.has_value());
  }
}

TEST_CASE("each account reaches at least two raters, each rater sees it once") {
  TempDir dir;
  RatingConfig c;
  c.raters = {{"r1", "t1", false}, {"r2", "t2", false}, {"r3", "t3", true}};
  std::vector<AccountActivity> accounts;
  for (int i = 0; i < 7; ++i) {
    accounts.push_back(account("acct" + std::to_string(i), 10));
  }
  RatingService svc(accounts, c, dir.path / "log.jsonl");
  std::map<std::string, int> seen;
  for (const auto &r : c.raters) {
    std::set<std::string> mine;
    for (;;) {
      const auto b = svc.next_batch(r.id, 1);
      if (b.done) {
        break;
      }
      CHECK(mine.insert(b.account_ref).second);
      svc.submit_rating(r.id, b.account_ref, Verdict::human, Difficulty::easy);
    }
    CHECK(mine.size() == svc.assigned_refs(r.id).size());
    for (const auto &ref : mine) {
      ++seen[ref];
    }
  }
  CHECK(seen.size() == 7);
  for (const auto &[ref, n] : seen) {
    CHECK(n == 2);
  }
  // round 1 is closed to raters an account was not assigned to
  const auto ref = svc.account_ref("acct0");
  std::string outsider;
  for (const auto &r : c.raters) {
    const auto mine = svc.assigned_refs(r.id);
    if (std::find(mine.begin(), mine.end(), ref) == mine.end()) {
      outsider = r.id;
    }
  }
  REQUIRE_FALSE(outsider.empty());
  CHECK_THROWS_AS(svc.submit_rating(outsider, ref, Verdict::bot, Difficulty::easy), ForbiddenError);
}

TEST_CASE("resubmission: latest wins and history is kept") {
  TempDir dir;
  RatingService svc({account("someone", 10)}, two_raters(), dir.path / "log.jsonl");
  const auto ref = svc.account_ref("someone");
  CHECK(svc.submit_rating("ana", ref, Verdict::bot, Difficulty::easy).revision == 1);
  CHECK(svc.submit_rating("ben", ref, Verdict::human, Difficulty::easy).revision == 1);
  CHECK(svc.status(ref) == AccountStatus::queued);
  CHECK(svc.submit_rating("ana", ref, Verdict::human, Difficulty::easy).revision == 2);
  CHECK(svc.status(ref) == AccountStatus::agreed);
  const auto h = svc.history("ana", ref, 1);
  REQUIRE(h.size() == 2);
  CHECK(h[0].verdict == Verdict::bot);
  CHECK(h[1].verdict == Verdict::human);
  CHECK(svc.history("ben", ref, 1).size() == 1);
  CHECK(svc.log_records() == 3);
  CHECK(count_lines(dir.path / "log.jsonl") == 3);

  CHECK_THROWS_AS(svc.submit_rating("ana", "acct-ffffffffffffffff", Verdict::bot, Difficulty::easy),
                  UnknownAccountError);
  CHECK_THROWS_AS(svc.submit_rating("ana", ref, Verdict::bot, Difficulty::easy, 3), ValidationError);
  // only queued accounts take round-2 ratings
  CHECK_THROWS_AS(svc.submit_rating("ana", ref, Verdict::bot, Difficulty::easy, 2), ConflictError);
  CHECK(svc.log_records() == 3);
}

TEST_CASE("agreement rules") {
  TempDir dir;
  std::vector<AccountActivity> accounts = {account("a1", 10), account("a2", 10), account("a3", 10)};
  RatingService svc(accounts, two_raters(), dir.path / "log.jsonl");
  const auto r1 = svc.account_ref("a1");
  const auto r2 = svc.account_ref("a2");
  const auto r3 = svc.account_ref("a3");

  for (const auto &ref : {r1, r2, r3}) {
    svc.submit_rating("ana", ref, Verdict::bot, Difficulty::easy);
  }
  auto rep = svc.agreement();
  CHECK(rep.pending == 3);
  CHECK(rep.pairs.empty());

  for (const auto &ref : {r1, r2, r3}) {
    svc.submit_rating("ben", ref, Verdict::bot, Difficulty::very_easy);
  }
  rep = svc.agreement();
  REQUIRE(rep.pairs.size() == 1);
  CHECK(rep.pairs[0].kappa.kappa == 1.0);
  CHECK(rep.pairs[0].shared_accounts == 3);
  CHECK(rep.agreed_bot == 3);
  CHECK(rep.round2_queue.empty());
  CHECK(svc.ground_truth().rows.size() == 3);

  // agreed, but one rater found it very difficult
  svc.submit_rating("ben", r2, Verdict::bot, Difficulty::very_difficult);
  rep = svc.agreement();
  CHECK(rep.flagged_difficult == 1);
  CHECK(rep.round2_queue == std::vector<std::string>{r2});
  CHECK(svc.status(r2) == AccountStatus::queued);
  CHECK(svc.ground_truth().rows.size() == 2);
}

TEST_CASE("adjudication and export") {
  TempDir dir;
  std::vector<AccountActivity> accounts = {account("bot-two-repos", 10, {"acme/a", "acme/b"}),
                                           account("mixed-one", 10, {"acme/a"}),
                                           account("pending-one", 10, {"acme/b"})};
  RatingService svc(accounts, two_raters(), dir.path / "log.jsonl");
  const auto gt_path = dir.path / "gt.csv";

  svc.export_ground_truth(gt_path);
  CHECK(read(gt_path) == "repository,account,label\n");
  CHECK(read(excluded_sidecar_path(gt_path)) ==
        "repository,account,reason\nacme/a,bot-two-repos,unresolved\nacme/b,bot-two-repos,unresolved\n"
        "acme/a,mixed-one,unresolved\nacme/b,pending-one,unresolved\n");

  const auto bot = svc.account_ref("bot-two-repos");
  const auto mixed = svc.account_ref("mixed-one");
  svc.submit_rating("ana", bot, Verdict::bot, Difficulty::easy);
  svc.submit_rating("ben", bot, Verdict::bot, Difficulty::easy);
  svc.submit_rating("ana", mixed, Verdict::bot, Difficulty::difficult);
  svc.submit_rating("ben", mixed, Verdict::human, Difficulty::difficult);

  CHECK_THROWS_AS(svc.adjudicate("ben", mixed, Resolution::mixed), ForbiddenError);
  CHECK_THROWS_AS(svc.adjudicate("ana", bot, Resolution::human), ConflictError);
  CHECK_THROWS_AS(svc.adjudicate("ana", svc.account_ref("pending-one"), Resolution::bot), ConflictError);

  // a third opinion in round 2 does not finalize anything by itself
  svc.submit_rating("ben", mixed, Verdict::human, Difficulty::difficult, 2);
  CHECK(svc.status(mixed) == AccountStatus::queued);
  CHECK(svc.adjudicate("ana", mixed, Resolution::mixed).revision == 1);
  CHECK(svc.status(mixed) == AccountStatus::resolved);
  CHECK_THROWS_AS(svc.submit_rating("ben", mixed, Verdict::bot, Difficulty::easy, 2), ConflictError);

  svc.export_ground_truth(gt_path);
  CHECK(read(gt_path) == "repository,account,label\nacme/a,bot-two-repos,bot\nacme/b,bot-two-repos,bot\n");
  CHECK(read(excluded_sidecar_path(gt_path)) ==
        "repository,account,reason\nacme/a,mixed-one,mixed\nacme/b,pending-one,unresolved\n");

  // a later adjudication replaces the earlier one
  CHECK(svc.adjudicate("ana", mixed, Resolution::human).revision == 2);
  CHECK(svc.ground_truth().rows.size() == 3);
}

TEST_CASE("replaying the log rebuilds the state; snapshots agree with full replay") {
  TempDir dir;
  const auto log = dir.path / "log.jsonl";
  auto accounts = session_accounts();
  RatingConfig config = two_raters();
  config.snapshot_every = 4;
  int tick = 0;
  auto clock = [&tick] { return at(100) + std::chrono::milliseconds(1234 * ++tick); };

  AgreementReport before;
  GroundTruthExport gt_before;
  {
    RatingService svc(accounts, config, log, clock);
    for (std::size_t i = 0; i < accounts.size(); ++i) {
      const auto ref = svc.account_ref(accounts[i].account);
      svc.submit_rating("ana", ref, i % 3 ? Verdict::human : Verdict::bot, Difficulty::easy);
      svc.submit_rating("ben", ref, i % 4 ? Verdict::human : Verdict::bot, Difficulty::easy);
    }
    svc.adjudicate("ana", svc.account_ref(accounts[3].account), Resolution::mixed);
    before = svc.agreement();
    gt_before = svc.ground_truth();
    CHECK(svc.log_records() == 21);
  }
  REQUIRE(fs::exists(RatingService::snapshot_path(log)));
  const auto snap = json::parse(read(RatingService::snapshot_path(log)));
  CHECK(snap["records"] == 20);

  auto same = [&](const RatingService &svc) {
    const auto after = svc.agreement();
    CHECK(after.round2_queue == before.round2_queue);
    CHECK(after.agreed_bot == before.agreed_bot);
    CHECK(after.agreed_human == before.agreed_human);
    CHECK(after.disagreements == before.disagreements);
    CHECK(after.resolved == before.resolved);
    REQUIRE(after.pairs.size() == before.pairs.size());
    CHECK(after.pairs[0].kappa.kappa == before.pairs[0].kappa.kappa);
    const auto gt = svc.ground_truth();
    REQUIRE(gt.rows.size() == gt_before.rows.size());
    for (std::size_t i = 0; i < gt.rows.size(); ++i) {
      CHECK(gt.rows[i].account == gt_before.rows[i].account);
      CHECK(gt.rows[i].label == gt_before.rows[i].label);
    }
    CHECK(gt.excluded.size() == gt_before.excluded.size());
    CHECK(svc.log_records() == 21);
  };

  // snapshot plus one trailing record
  {
    RatingService svc(accounts, config, log, clock);
    same(svc);
    // revision counts survive the snapshot
    CHECK(svc.submit_rating("ana", svc.account_ref(accounts[0].account), Verdict::bot, Difficulty::easy).revision ==
          2);
  }
  // the log alone
  fs::remove(RatingService::snapshot_path(log));
  {
    RatingService svc(accounts, config, log, clock);
    CHECK(svc.log_records() == 22);
    CHECK(svc.history("ana", svc.account_ref(accounts[0].account), 1).size() == 2);
  }
  // a snapshot that no longer matches the log is ignored
  {
    std::ofstream out(RatingService::snapshot_path(log), std::ios::binary | std::ios::trunc);
    auto bogus = snap;
    bogus["ratings"] = json::array();
    bogus["log_hash"] = "0000000000000000";
    out << bogus.dump();
  }
  {
    RatingService svc(accounts, config, log, clock);
    CHECK(svc.log_records() == 22);
    CHECK(svc.agreement().pending == 0);
  }
  // a corrupt log line is reported with its position
  {
    std::ofstream out(log, std::ios::binary | std::ios::app);
    out << "{not json\n";
  }
  fs::remove(RatingService::snapshot_path(log));
  try {
    RatingService svc(accounts, config, log, clock);
    FAIL("expected a LoadError");
  } catch (const LoadError &e) {
    CHECK(std::string(e.what()).find("log.jsonl:23") != std::string::npos);
  }
}

TEST_CASE("concurrent submissions are all logged") {
  TempDir dir;
  std::vector<AccountActivity> accounts;
  for (int i = 0; i < 20; ++i) {
    accounts.push_back(account("acct" + std::to_string(i), 10));
  }
  RatingConfig config = two_raters();
  config.snapshot_every = 7;
  const auto log = dir.path / "log.jsonl";
  {
    RatingService svc(accounts, config, log);
    std::vector<std::thread> workers;
    for (const std::string rater : {"ana", "ben"}) {
      workers.emplace_back([&svc, &accounts, rater] {
        for (int pass = 0; pass < 5; ++pass) {
          for (const auto &a : accounts) {
            svc.submit_rating(rater, svc.account_ref(a.account), pass % 2 ? Verdict::bot : Verdict::human,
                              Difficulty::easy);
          }
        }
      });
    }
    for (auto &w : workers) {
      w.join();
    }
    CHECK(svc.log_records() == 200);
    CHECK(svc.agreement().agreed_human == 20);
  }
  CHECK(count_lines(log) == 200);
  RatingService replayed(accounts, config, log);
  CHECK(replayed.agreement().agreed_human == 20);
  CHECK(replayed.history("ben", replayed.account_ref("acct7"), 1).size() == 5);
}

namespace {

struct LiveServer {
  RatingServer server;
  std::thread worker;
  int port = 0;

  explicit LiveServer(RatingService &svc) : server(svc) {
    port = server.bind("127.0.0.1", 0);
    worker = std::thread([this] { server.listen(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    worker.join();
  }
};

struct Api {
  httplib::Client client;
  std::string token;
  std::vector<std::string> bodies; // every payload received

  Api(int port, std::string t) : client("127.0.0.1", port), token(std::move(t)) {}

  httplib::Headers auth() const { return {{"Authorization", "Bearer " + token}}; }

  std::pair<int, json> get(const std::string &path) {
    auto r = client.Get(path, auth());
    REQUIRE(r);
    bodies.push_back(r->body);
    CHECK(r->get_header_value("Content-Type") == "application/json");
    return {r->status, json::parse(r->body)};
  }
  std::pair<int, json> post(const std::string &path, const json &body) {
    auto r = client.Post(path, auth(), body.dump(), "application/json");
    REQUIRE(r);
    bodies.push_back(r->body);
    return {r->status, json::parse(r->body)};
  }
};

} // namespace

TEST_CASE("scripted two-rater session over HTTP") {
  TempDir dir;
  const auto accounts = session_accounts();
  RatingService svc(accounts, two_raters(), dir.path / "log.jsonl");
  LiveServer live(svc);
  Api ana(live.port, "tok-ana");
  Api ben(live.port, "tok-ben");

  // Per account index: verdicts of ana and ben. 0-2 bot, 3-7 human, 8 split, 9 unknown.
  auto verdict = [](const std::string &rater, std::size_t i) -> std::string {
    if (i < 3) {
      return "bot";
    }
    if (i < 8) {
      return "human";
    }
    if (i == 8) {
      return rater == "ana" ? "bot" : "human";
    }
    return "unknown";
  };
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    index_of[make_account_ref(accounts[i].account)] = i;
  }

  for (auto *api : {&ana, &ben}) {
    const std::string rater = api == &ana ? "ana" : "ben";
    std::size_t rated = 0;
    for (;;) {
      auto [status, batch] = api->get("/api/next");
      REQUIRE(status == 200);
      if (batch["done"].get<bool>()) {
        break;
      }
      CHECK(batch["comments"].size() == 20);
      CHECK(batch["has_more"] == true);
      CHECK_FALSE(batch["comments"][0].contains("created_at"));
      CHECK_FALSE(batch["comments"][0].contains("author"));
      auto [s2, more] = api->get("/api/next?cursor=" + batch["cursor"].get<std::string>());
      CHECK(s2 == 200);
      CHECK(more["comments"].size() == 5);
      CHECK(more["cursor"].is_null());

      const auto ref = batch["account_ref"].get<std::string>();
      auto [s3, ack] = api->post("/api/ratings", {{"account_ref", ref},
                                                  {"verdict", verdict(rater, index_of.at(ref))},
                                                  {"difficulty", "easy"}});
      CHECK(s3 == 200);
      CHECK(ack["status"] == "recorded");
      ++rated;
    }
    CHECK(rated == 10);
  }

  // Round-1 payloads never mention an account or repository.
  for (const auto *api : {&ana, &ben}) {
    for (const auto &body : api->bodies) {
      for (const auto &a : accounts) {
        CHECK(body.find(a.account) == std::string::npos);
        for (const auto &repo : a.repositories) {
          CHECK(body.find(repo) == std::string::npos);
        }
      }
    }
  }

  auto [status, agreement] = ben.get("/api/agreement");
  REQUIRE(status == 200);
  REQUIRE(agreement["pairs"].size() == 1);
  // Hand computation: ana uses bot 4, human 5, unknown 1; ben bot 3,
  // human 6, unknown 1; 9 of 10 verdicts match.
  const double p_o = 9.0 / 10.0;
  const double p_e = (4.0 * 3.0 + 5.0 * 6.0 + 1.0 * 1.0) / 100.0;
  CHECK(std::abs(agreement["pairs"][0]["kappa"].get<double>() - (p_o - p_e) / (1.0 - p_e)) < 1e-9);
  CHECK(agreement["agreed_bot"] == 3);
  CHECK(agreement["agreed_human"] == 5);
  CHECK(agreement["disagreements"] == 1);
  CHECK(agreement["agreed_unknown"] == 1);
  REQUIRE(agreement["round2_queue"].size() == 2);
  const std::set<std::string> queue = agreement["round2_queue"];
  CHECK(queue == std::set<std::string>{make_account_ref(accounts[8].account), make_account_ref(accounts[9].account)});

  // Round 2 shows timestamps by default.
  auto [s4, r2] = ben.get("/api/next?round=2");
  CHECK(s4 == 200);
  CHECK(r2["round"] == 2);
  CHECK(r2["comments"][0].contains("created_at"));

  auto [s5, forbidden] = ben.get("/api/export");
  CHECK(s5 == 403);
  CHECK(forbidden["code"] == "forbidden");
  auto [s6, exported] = ana.get("/api/export");
  REQUIRE(s6 == 200);
  CHECK(exported["rows"].size() == 8);
  CHECK(exported["unresolved"].size() == 2);
  CHECK(exported["unresolved"][0].get<std::string>().rfind("acct-", 0) == 0);

  const auto gt_path = dir.path / "ground_truth.csv";
  svc.export_ground_truth(gt_path);
  CHECK(count_lines(gt_path) == 1 + 8);
  CHECK(count_lines(excluded_sidecar_path(gt_path)) == 1 + 2);

  auto [s7, adj] = ana.post("/api/adjudications",
                            {{"account_ref", make_account_ref(accounts[8].account)}, {"label", "mixed"}});
  CHECK(s7 == 200);
  CHECK(adj["revision"] == 1);
  auto [s8, progress] = ana.get("/api/progress");
  CHECK(s8 == 200);
  CHECK(progress["rated"] == 10);
  CHECK(progress["round2_queue"] == 1);
}

TEST_CASE("HTTP errors are JSON with code and message") {
  TempDir dir;
  RatingService svc({account("someone", 10)}, two_raters(), dir.path / "log.jsonl");
  LiveServer live(svc);
  Api ben(live.port, "tok-ben");
  const auto ref = svc.account_ref("someone");

  auto expect = [](std::pair<int, json> r, int status, const std::string &code) {
    CHECK(r.first == status);
    CHECK(r.second["code"] == code);
    CHECK(r.second["message"].is_string());
  };
  expect(ben.post("/api/ratings", {{"account_ref", ref}, {"verdict", "maybe"}, {"difficulty", "easy"}}), 400,
         "validation_error");
  expect(ben.post("/api/ratings", {{"account_ref", ref}, {"verdict", "bot"}, {"difficulty", "impossible"}}), 400,
         "validation_error");
  expect(ben.post("/api/ratings", {{"account_ref", ref}, {"verdict", "bot"}}), 400, "validation_error");
  expect(ben.post("/api/ratings", {{"account_ref", ref}, {"verdict", "bot"}, {"difficulty", "easy"}, {"round", "1"}}),
         400, "validation_error");
  expect(ben.post("/api/ratings", {{"account_ref", "acct-0123456789abcdef"}, {"verdict", "bot"}, {"difficulty", "easy"}}),
         404, "unknown_account");
  expect(ben.post("/api/adjudications", {{"account_ref", ref}, {"label", "bot"}}), 403, "forbidden");
  expect(ben.get("/api/next?round=7"), 400, "validation_error");
  expect(ben.get("/api/nowhere"), 404, "not_found");

  auto r = ben.client.Post("/api/ratings", ben.auth(), "{oops", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["code"] == "validation_error");

  Api stranger(live.port, "wrong");
  expect(stranger.get("/api/next"), 401, "unauthorized");
  auto anonymous = stranger.client.Get("/api/agreement");
  REQUIRE(anonymous);
  CHECK(anonymous->status == 401);
  CHECK(svc.log_records() == 0);
}
