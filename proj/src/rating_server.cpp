#include "botgate/rating.hpp"

#include "botgate/errors.hpp"

#include "httplib.h"

namespace botgate {

using json = nlohmann::json;

namespace {

void send_json(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response &res, int status, std::string_view code, const std::string &message) {
  send_json(res, status, json{{"code", code}, {"message", message}});
}

std::string bearer_token(const httplib::Request &req) {
  const auto header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.size() <= kPrefix.size()) {
    return "";
  }
  std::string scheme = header.substr(0, kPrefix.size());
  std::transform(scheme.begin(), scheme.end(), scheme.begin(), [](unsigned char c) { return std::tolower(c); });
  return scheme == "bearer " ? header.substr(kPrefix.size()) : "";
}

json parse_body(const httplib::Request &req) {
  try {
    auto body = json::parse(req.body);
    if (!body.is_object()) {
      throw ValidationError("request body must be a JSON object");
    }
    return body;
  } catch (const json::parse_error &) {
    throw ValidationError("request body is not valid JSON");
  }
}

std::string string_field(const json &body, const char *key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

int round_field(const json &body) {
  if (!body.contains("round")) {
    return 1;
  }
  if (!body["round"].is_number_integer()) {
    throw ValidationError("field 'round' must be 1 or 2");
  }
  return body["round"].get<int>();
}

json batch_json(const Batch &b) {
  if (b.done) {
    return {{"done", true}, {"round", b.round}};
  }
  json comments = json::array();
  for (const auto &c : b.comments) {
    json item = {{"body", c.body}, {"kind", c.kind}};
    if (c.created_at) {
      item["created_at"] = format_timestamp(*c.created_at);
    }
    comments.push_back(std::move(item));
  }
  json out = {{"done", false},
              {"round", b.round},
              {"account_ref", b.account_ref},
              {"offset", b.offset},
              {"total_comments", b.total_comments},
              {"comments", std::move(comments)},
              {"has_more", b.has_more}};
  out["cursor"] = b.has_more ? json(b.next_cursor) : json(nullptr);
  return out;
}

json ack_json(const Acknowledgment &a) {
  return {{"status", "recorded"}, {"account_ref", a.account_ref}, {"round", a.round}, {"revision", a.revision}};
}

json agreement_json(const AgreementReport &r) {
  json pairs = json::array();
  for (const auto &p : r.pairs) {
    pairs.push_back({{"rater_a", p.rater_a},
                     {"rater_b", p.rater_b},
                     {"shared_accounts", p.shared_accounts},
                     {"kappa", p.kappa.kappa},
                     {"observed", p.kappa.observed},
                     {"expected", p.kappa.expected},
                     {"degenerate", p.kappa.degenerate}});
  }
  return {{"pairs", std::move(pairs)},
          {"agreed_bot", r.agreed_bot},
          {"agreed_human", r.agreed_human},
          {"agreed_unknown", r.agreed_unknown},
          {"disagreements", r.disagreements},
          {"flagged_difficult", r.flagged_difficult},
          {"pending", r.pending},
          {"resolved", r.resolved},
          {"round2_queue", r.round2_queue}};
}

} // namespace

struct RatingServer::Impl {
  RatingService &service;
  httplib::Server server;

  explicit Impl(RatingService &s) : service(s) {}

  // Authenticates, runs the handler and maps library errors onto statuses.
  template <class F> auto guarded(F handler) {
    return [this, handler](const httplib::Request &req, httplib::Response &res) {
      try {
        const Rater &rater = service.authenticate(bearer_token(req));
        handler(rater, req, res);
      } catch (const AuthError &e) {
        send_error(res, 401, "unauthorized", e.what());
      } catch (const ValidationError &e) {
        send_error(res, 400, "validation_error", e.what());
      } catch (const ForbiddenError &e) {
        send_error(res, 403, "forbidden", e.what());
      } catch (const UnknownAccountError &e) {
        send_error(res, 404, "unknown_account", e.what());
      } catch (const ConflictError &e) {
        send_error(res, 409, "conflict", e.what());
      } catch (const std::exception &e) {
        send_error(res, 500, "internal_error", e.what());
      }
    };
  }
};

RatingServer::RatingServer(RatingService &service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto &srv = impl_->server;
  auto &svc = impl_->service;

  srv.Get("/api/next", impl_->guarded([&svc](const Rater &rater, const httplib::Request &req,
                                             httplib::Response &res) {
    int round = 1;
    if (req.has_param("round")) {
      const auto text = req.get_param_value("round");
      if (text != "1" && text != "2") {
        throw ValidationError("round must be 1 or 2");
      }
      round = text == "1" ? 1 : 2;
    }
    const auto cursor = req.has_param("cursor") ? req.get_param_value("cursor") : std::string();
    send_json(res, 200, batch_json(svc.next_batch(rater.id, round, cursor)));
  }));

  srv.Post("/api/ratings", impl_->guarded([&svc](const Rater &rater, const httplib::Request &req,
                                                 httplib::Response &res) {
    const json body = parse_body(req);
    const auto ref = string_field(body, "account_ref");
    const auto verdict = verdict_from_string(string_field(body, "verdict"));
    const auto difficulty = difficulty_from_string(string_field(body, "difficulty"));
    send_json(res, 200, ack_json(svc.submit_rating(rater.id, ref, verdict, difficulty, round_field(body))));
  }));

  srv.Post("/api/adjudications", impl_->guarded([&svc](const Rater &rater, const httplib::Request &req,
                                                       httplib::Response &res) {
    const json body = parse_body(req);
    const auto ref = string_field(body, "account_ref");
    const auto label = resolution_from_string(string_field(body, "label"));
    send_json(res, 200, ack_json(svc.adjudicate(rater.id, ref, label)));
  }));

  srv.Get("/api/agreement", impl_->guarded([&svc](const Rater &, const httplib::Request &,
                                                  httplib::Response &res) {
    send_json(res, 200, agreement_json(svc.agreement()));
  }));

  // Names appear here, so only adjudicators may read it; unresolved
  // accounts are listed by reference only.
  srv.Get("/api/export", impl_->guarded([&svc](const Rater &rater, const httplib::Request &,
                                               httplib::Response &res) {
    if (!rater.adjudicator) {
      throw ForbiddenError("the export is restricted to adjudicators");
    }
    const auto gt = svc.ground_truth();
    json rows = json::array();
    for (const auto &r : gt.rows) {
      rows.push_back({{"repository", r.repository}, {"account", r.account}, {"label", to_string(r.label)}});
    }
    json mixed = json::array();
    std::set<std::string> unresolved;
    for (const auto &e : gt.excluded) {
      if (e.reason == "mixed") {
        mixed.push_back({{"repository", e.repository}, {"account", e.account}});
      } else {
        unresolved.insert(svc.account_ref(e.account));
      }
    }
    send_json(res, 200, json{{"rows", std::move(rows)}, {"mixed", std::move(mixed)}, {"unresolved", unresolved}});
  }));

  srv.Get("/api/progress", impl_->guarded([&svc](const Rater &rater, const httplib::Request &,
                                                 httplib::Response &res) {
    const auto refs = svc.assigned_refs(rater.id);
    const auto rated = svc.rated_count(rater.id, 1);
    send_json(res, 200, json{{"rater", rater.id},
                             {"adjudicator", rater.adjudicator},
                             {"assigned", refs.size()},
                             {"rated", rated},
                             {"round2_queue", svc.agreement().round2_queue.size()}});
  }));

  if (static_dir) {
    if (!srv.set_mount_point("/", static_dir->string())) {
      throw IoError("cannot serve static files from " + static_dir->string());
    }
  }

  srv.set_error_handler([](const httplib::Request &, httplib::Response &res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "not_found" : "http_error",
                 "HTTP " + std::to_string(res.status));
    }
  });
}

RatingServer::~RatingServer() = default;

int RatingServer::bind(const std::string &host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void RatingServer::listen() { impl_->server.listen_after_bind(); }

void RatingServer::wait_until_ready() { impl_->server.wait_until_ready(); }

void RatingServer::stop() { impl_->server.stop(); }

} // namespace botgate
