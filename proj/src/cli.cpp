#include "botgate/cli.hpp"

#include "botgate/dataset.hpp"
#include "botgate/errors.hpp"
#include "botgate/features.hpp"
#include "botgate/github_client.hpp"
#include "botgate/pipeline.hpp"
#include "botgate/rating.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#ifndef BOTGATE_DEFAULT_MODEL
#define BOTGATE_DEFAULT_MODEL "data/reference_model.json"
#endif

namespace botgate {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kInsufficient = "unknown (insufficient comments)";

struct InputOptions {
  std::string repo;
  std::string corpus;
  std::string key;
  std::string api_url{kGitHubGraphqlEndpoint};
  std::size_t min_comments = 10;
  std::size_t max_comments = 100;
  std::string start_date;
  std::vector<std::string> accounts;
  double eps = 0.5;
  std::size_t min_samples = 1;
};

void add_input_options(CLI::App &cmd, InputOptions &o) {
  auto *repo = cmd.add_option("--repo", o.repo, "GitHub repository, owner/name");
  auto *corpus = cmd.add_option("--corpus", o.corpus, "JSON Lines comment corpus");
  repo->excludes(corpus);
  corpus->excludes(repo);
  cmd.add_option("--key,-k", o.key, "GitHub API token (default: $" + std::string(kTokenEnvVar) + ")");
  cmd.add_option("--api-url", o.api_url, "GraphQL endpoint")->capture_default_str();
  cmd.add_option("--min-comments", o.min_comments, "fewer comments than this → unknown")->capture_default_str();
  cmd.add_option("--max-comments", o.max_comments, "most recent comments kept per account")->capture_default_str();
  cmd.add_option("--start-date", o.start_date, "ignore comments before this date (YYYY-MM-DD or ISO 8601)");
  cmd.add_option("--accounts", o.accounts, "only these accounts (repeatable, comma separated)")->delimiter(',');
  cmd.add_option("--eps", o.eps, "pattern neighbourhood radius in (0, 1]")->capture_default_str();
  cmd.add_option("--min-samples", o.min_samples, "pattern core size")->capture_default_str();
}

FeatureOptions feature_options(const InputOptions &o) {
  FeatureOptions f;
  f.clustering.eps = o.eps;
  f.clustering.min_samples = o.min_samples;
  f.clustering.validate();
  return f;
}

CorpusFilter corpus_filter(const InputOptions &o, std::size_t min_comments) {
  CorpusFilter f;
  f.min_comments = min_comments;
  f.max_comments = o.max_comments;
  if (!o.start_date.empty()) {
    f.start_date = parse_timestamp(o.start_date.size() == 10 ? o.start_date + "T00:00:00Z" : o.start_date);
  }
  if (!o.accounts.empty()) {
    f.accounts = o.accounts;
  }
  f.validate();
  return f;
}

std::vector<RawComment> load_comments(const InputOptions &o, std::ostream &err) {
  if (o.repo.empty() == o.corpus.empty()) {
    throw DomainError("give exactly one of --repo or --corpus");
  }
  if (!o.corpus.empty()) {
    return load_corpus(o.corpus);
  }
  std::string token = o.key;
  if (token.empty()) {
    if (const char *env = std::getenv(std::string(kTokenEnvVar).c_str())) {
      token = env;
    }
  }
  if (token.empty()) {
    throw CredentialError("no GitHub token; pass --key or set " + std::string(kTokenEnvVar));
  }
  GitHubClientOptions options;
  options.endpoint = o.api_url;
  GitHubClient client(token, std::make_shared<HttplibTransport>(), options);
  err << "fetching comments of " << o.repo << "...\n";
  auto comments = client.fetch_repository_comments(o.repo);
  err << "fetched " << comments.size() << " comments in " << client.requests_sent() << " requests\n";
  return comments;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError("cannot open " + path);
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) {
    throw IoError("cannot write " + path);
  }
}

void write_patterns_csv(const std::string &path, const std::vector<AccountActivity> &accounts,
                        const FeatureOptions &options) {
  std::string out = "account,comment_id,pattern_label\n";
  for (const auto &a : accounts) {
    const auto p = comment_patterns(a, options);
    for (std::size_t i = 0; i < a.comments.size(); ++i) {
      out += a.account + "," + a.comments[i].id + "," + std::to_string(p.labels[i]) + "\n";
    }
  }
  write_text(path, out);
}

// Feature columns of a CSV header must match the model's schema.
void check_feature_header(const std::string &path, const ForestModel &model) {
  const auto text = read_text(path);
  std::string header = text.substr(0, text.find('\n'));
  if (!header.empty() && header.back() == '\r') {
    header.pop_back();
  }
  std::vector<std::string> columns;
  std::stringstream s(header);
  for (std::string c; std::getline(s, c, ',');) {
    columns.push_back(c);
  }
  if (columns.empty() || columns.front() != "account") {
    return; // not a feature CSV at all; the loader reports it
  }
  if (columns.back() == "label") {
    columns.pop_back();
  }
  const std::vector<std::string> features(columns.begin() + 1, columns.end());
  if (features != model.feature_schema) {
    std::string have;
    for (const auto &f : features) {
      have += (have.empty() ? "" : ",") + f;
    }
    std::string want;
    for (const auto &f : model.feature_schema) {
      want += (want.empty() ? "" : ",") + f;
    }
    throw ModelCompatibilityError("feature columns [" + have + "] do not match the model schema [" + want + "]");
  }
}

void warn_on_extraction_mismatch(const ForestModel &model, const FeatureOptions &f, std::ostream &err) {
  const auto &meta = model.metadata;
  if (!meta.contains("feature_extraction")) {
    return;
  }
  const auto &fe = meta["feature_extraction"];
  if (fe.value("eps", f.clustering.eps) != f.clustering.eps ||
      fe.value("min_samples", f.clustering.min_samples) != f.clustering.min_samples) {
    err << "warning: the model was trained on features extracted with eps=" << fe.value("eps", 0.0)
        << " min_samples=" << fe.value("min_samples", std::size_t{0}) << "\n";
  }
}

// ---- predict -------------------------------------------------------------

struct PredictRow {
  FeatureVector features;
  std::optional<Prediction> prediction;

  std::string label() const {
    return prediction ? std::string(to_string(prediction->label)) : std::string(kInsufficient);
  }
};

void print_rows(const std::vector<PredictRow> &rows, const std::string &format, std::ostream &out) {
  if (format == "json") {
    ojson arr = ojson::array();
    for (const auto &r : rows) {
      const auto &f = r.features;
      ojson o = {{"account", f.account},
                 {"total_comments", f.total_comments},
                 {"empty_comments", f.empty_comments},
                 {"pattern_count", f.pattern_count},
                 {"gini_patterns", std::stod(fixed4(f.gini_patterns))},
                 {"prediction", r.label()}};
      o["score"] = r.prediction ? ojson(r.prediction->score) : ojson(nullptr);
      arr.push_back(std::move(o));
    }
    out << arr.dump(2) << "\n";
    return;
  }
  if (format == "csv") {
    out << "account,total_comments,empty_comments,pattern_count,gini_patterns,prediction,score\n";
    for (const auto &r : rows) {
      const auto &f = r.features;
      out << f.account << ',' << f.total_comments << ',' << f.empty_comments << ',' << f.pattern_count << ','
          << fixed4(f.gini_patterns) << ',' << r.label() << ',' << (r.prediction ? fixed4(r.prediction->score) : "")
          << "\n";
    }
    return;
  }
  const std::vector<std::string> head = {"account", "comments", "empty", "patterns", "gini", "prediction", "score"};
  std::vector<std::vector<std::string>> cells;
  for (const auto &r : rows) {
    const auto &f = r.features;
    cells.push_back({f.account, std::to_string(f.total_comments), std::to_string(f.empty_comments),
                     std::to_string(f.pattern_count), fixed4(f.gini_patterns), r.label(),
                     r.prediction ? fixed4(r.prediction->score) : "-"});
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    width[c] = head[c].size();
    for (const auto &row : cells) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  auto line = [&](const std::vector<std::string> &row) {
    std::string s;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool left = c == 0 || c == 5;
      const std::string pad(width[c] - row[c].size(), ' ');
      s += left ? row[c] + pad : pad + row[c];
      if (c + 1 < row.size()) {
        s += "  ";
      }
    }
    while (!s.empty() && s.back() == ' ') {
      s.pop_back();
    }
    out << s << "\n";
  };
  line(head);
  for (const auto &row : cells) {
    line(row);
  }
}

int run_predict(const InputOptions &in, const std::string &model_path, const std::string &format,
                const std::string &patterns_csv, std::ostream &out, std::ostream &err) {
  const ForestModel model = load_model(model_path);
  const auto options = feature_options(in);
  warn_on_extraction_mismatch(model, options, err);
  const auto comments = load_comments(in, err);
  const auto accounts = group_and_filter(comments, corpus_filter(in, 1));
  const auto features = extract_features_batch(accounts, options);
  std::vector<PredictRow> rows;
  for (const auto &f : features) {
    PredictRow r{f, std::nullopt};
    if (f.total_comments >= in.min_comments) {
      r.prediction = predict(model, f);
    }
    rows.push_back(std::move(r));
  }
  if (!patterns_csv.empty()) {
    write_patterns_csv(patterns_csv, accounts, options);
  }
  print_rows(rows, format, out);
  return exit_code::ok;
}

// ---- export-features -----------------------------------------------------

int run_export(const InputOptions &in, const std::string &labels_path, const std::string &output,
               const std::string &patterns_csv, std::ostream &out, std::ostream &err) {
  const auto options = feature_options(in);
  const auto comments = load_comments(in, err);
  auto accounts = group_and_filter(comments, corpus_filter(in, in.min_comments));
  FeatureTable table;
  if (!labels_path.empty()) {
    const auto labels = load_ground_truth(labels_path);
    std::vector<AccountActivity> labeled;
    std::size_t dropped = 0;
    for (auto &a : accounts) {
      const auto it = labels.find(a.account);
      if (it == labels.end()) {
        ++dropped;
        continue;
      }
      table.labels.push_back(it->second);
      labeled.push_back(std::move(a));
    }
    if (dropped > 0) {
      err << "skipped " << dropped << " accounts without a ground-truth label\n";
    }
    accounts = std::move(labeled);
  }
  table.rows = extract_features_batch(accounts, options);
  if (!patterns_csv.empty()) {
    write_patterns_csv(patterns_csv, accounts, options);
  }
  if (output.empty() || output == "-") {
    out << feature_csv_header(!table.labels.empty() || !labels_path.empty()) << "\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      out << (table.labels.empty() ? feature_csv_row(table.rows[i])
                                   : feature_csv_row(table.rows[i], to_string(table.labels[i])))
          << "\n";
    }
  } else {
    save_feature_csv(output, table);
    err << "wrote " << table.rows.size() << " accounts to " << output << "\n";
  }
  return exit_code::ok;
}

// ---- train / evaluate ----------------------------------------------------

struct TrainArgs {
  std::string features;
  std::string model;
  std::string report;
  std::string report_csv;
  std::string bins_csv;
  std::string grid;
  double test_fraction = 0.4;
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  double eps = 0.5;
  std::size_t min_samples = 1;
};

int run_train(const TrainArgs &a, std::ostream &out) {
  const auto table = load_feature_csv(a.features);
  TrainOptions options;
  options.test_fraction = a.test_fraction;
  options.folds = a.folds;
  options.seed = a.seed;
  if (!a.grid.empty()) {
    options.grid = parse_grid(read_text(a.grid), a.folds, a.seed);
  }
  auto report = train_pipeline(table, options);
  report.model.metadata["feature_extraction"] = {
      {"eps", a.eps}, {"min_samples", a.min_samples}, {"levenshtein_char_cap", TextSimOptions{}.levenshtein_char_cap}};
  save_model(report.model, a.model);
  if (!a.report.empty()) {
    write_text(a.report, to_json(report).dump(2) + "\n");
  }
  if (!a.report_csv.empty()) {
    write_text(a.report_csv, train_report_csv(report));
  }
  if (!a.bins_csv.empty()) {
    write_text(a.bins_csv, bins_csv(report.test.bins));
  }
  out << "best configuration: " << report.best.describe() << "\n";
  out << "cross-validation mean F1: " << fixed4(report.cv.front().mean_f1) << "\n";
  out << "test weighted F1: " << fixed4(report.test.metrics.f1) << " (ZeroR " << fixed4(report.zero_r_test.metrics.f1)
      << ")\n";
  out << "model written to " << a.model << "\n";
  return exit_code::ok;
}

int run_evaluate(const std::string &model_path, const std::string &features, const std::string &format,
                 const std::string &bins_path, std::ostream &out) {
  const ForestModel model = load_model(model_path);
  check_feature_header(features, model);
  const auto table = load_feature_csv(features);
  const auto report = evaluate_model(model, table);
  if (!bins_path.empty()) {
    write_text(bins_path, bins_csv(report.bins));
  }
  if (format == "json") {
    out << to_json(report).dump(2) << "\n";
  } else if (format == "csv") {
    out << evaluation_csv(report);
  } else {
    const auto &m = report.metrics;
    const auto &cm = report.confusion;
    out << "          precision  recall  f1\n";
    out << "bot       " << fixed4(m.bot.precision) << "     " << fixed4(m.bot.recall) << "  " << fixed4(m.bot.f1)
        << "\n";
    out << "human     " << fixed4(m.human.precision) << "     " << fixed4(m.human.recall) << "  "
        << fixed4(m.human.f1) << "\n";
    out << "weighted  " << fixed4(m.precision) << "     " << fixed4(m.recall) << "  " << fixed4(m.f1) << "\n";
    out << "confusion: tp=" << cm.tp << " fn=" << cm.fn << " fp=" << cm.fp << " tn=" << cm.tn << "\n";
  }
  return exit_code::ok;
}

// ---- serve-rating --------------------------------------------------------

struct ServeArgs {
  std::string raters;
  std::string log;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string export_path;
};

int run_serve(const InputOptions &in, const ServeArgs &a, std::ostream &out, std::ostream &err) {
  const auto config = load_rating_config(a.raters);
  const auto comments = load_comments(in, err);
  auto accounts = group_and_filter(comments, corpus_filter(in, in.min_comments));
  RatingService service(std::move(accounts), config, a.log);
  if (!a.export_path.empty()) {
    service.export_ground_truth(a.export_path);
    out << "ground truth written to " << a.export_path << " (excluded: "
        << excluded_sidecar_path(a.export_path).string() << ")\n";
    return exit_code::ok;
  }
  std::optional<std::filesystem::path> static_dir;
  if (!a.static_dir.empty()) {
    static_dir = a.static_dir;
  }
  RatingServer server(service, static_dir);
  const int port = server.bind(a.host, a.port);
  out << "rating service listening on http://" << a.host << ":" << port << "\n" << std::flush;
  server.listen();
  return exit_code::ok;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Classify repository commenters as bots or humans."};
  app.name("botgate");
  app.require_subcommand(1);

  InputOptions predict_in;
  std::string predict_model = BOTGATE_DEFAULT_MODEL;
  std::string predict_format = "table";
  std::string predict_patterns;
  std::uint64_t predict_seed = 0;
  auto *predict_cmd = app.add_subcommand("predict", "fetch or load comments, compute features, apply the model");
  add_input_options(*predict_cmd, predict_in);
  predict_cmd->add_option("--model", predict_model, "model file")->capture_default_str();
  predict_cmd->add_option("--output-format", predict_format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}))
      ->capture_default_str();
  predict_cmd->add_option("--patterns-csv", predict_patterns, "also write account,comment_id,pattern_label");
  predict_cmd->add_option("--seed", predict_seed, "accepted for symmetry; prediction is deterministic");

  InputOptions export_in;
  std::string export_labels;
  std::string export_output;
  std::string export_patterns;
  auto *export_cmd = app.add_subcommand("export-features", "write the feature CSV of every account");
  add_input_options(*export_cmd, export_in);
  export_cmd->add_option("--labels", export_labels, "ground-truth CSV (repository,account,label) to add labels");
  export_cmd->add_option("--output,-o", export_output, "feature CSV path (default: stdout)");
  export_cmd->add_option("--patterns-csv", export_patterns, "also write account,comment_id,pattern_label");

  TrainArgs train;
  auto *train_cmd = app.add_subcommand("train", "split, grid-search CV, refit and evaluate on the held-out part");
  train_cmd->add_option("--features", train.features, "labeled feature CSV")->required();
  train_cmd->add_option("--model", train.model, "output model file")->required();
  train_cmd->add_option("--report", train.report, "JSON report path");
  train_cmd->add_option("--report-csv", train.report_csv, "CSV of the cross-validation ranking");
  train_cmd->add_option("--bins-csv", train.bins_csv, "CSV of test F1 by non-empty comment bins");
  train_cmd->add_option("--grid", train.grid, "JSON grid file (default: built-in grid)");
  train_cmd->add_option("--test-fraction", train.test_fraction)->capture_default_str();
  train_cmd->add_option("--folds", train.folds)->capture_default_str();
  train_cmd->add_option("--seed", train.seed)->capture_default_str();
  train_cmd->add_option("--eps", train.eps, "recorded in the model: eps used for the features")
      ->capture_default_str();
  train_cmd->add_option("--min-samples", train.min_samples, "recorded in the model: min-samples used")
      ->capture_default_str();

  std::string eval_model = BOTGATE_DEFAULT_MODEL;
  std::string eval_features;
  std::string eval_format = "table";
  std::string eval_bins;
  auto *eval_cmd = app.add_subcommand("evaluate", "apply a saved model to a labeled feature CSV");
  eval_cmd->add_option("--model", eval_model, "model file")->capture_default_str();
  eval_cmd->add_option("--features", eval_features, "labeled feature CSV")->required();
  eval_cmd->add_option("--output-format", eval_format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}))
      ->capture_default_str();
  eval_cmd->add_option("--bins-csv", eval_bins, "CSV of F1 by non-empty comment bins");

  InputOptions serve_in;
  ServeArgs serve;
  auto *serve_cmd = app.add_subcommand("serve-rating", "run the ground-truth rating service");
  add_input_options(*serve_cmd, serve_in);
  serve_cmd->add_option("--raters", serve.raters, "rater config JSON")->required();
  serve_cmd->add_option("--log", serve.log, "append-only ratings log (JSON Lines)")->required();
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--static-dir", serve.static_dir, "rating UI build to serve at /");
  serve_cmd->add_option("--export", serve.export_path, "write the ground-truth CSV and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  try {
    if (*predict_cmd) {
      return run_predict(predict_in, predict_model, predict_format, predict_patterns, out, err);
    }
    if (*export_cmd) {
      return run_export(export_in, export_labels, export_output, export_patterns, out, err);
    }
    if (*train_cmd) {
      return run_train(train, out);
    }
    if (*eval_cmd) {
      return run_evaluate(eval_model, eval_features, eval_format, eval_bins, out);
    }
    if (*serve_cmd) {
      return run_serve(serve_in, serve, out, err);
    }
  } catch (const CredentialError &e) {
    err << "botgate: credential error: " << e.what() << "\n";
    return exit_code::credential;
  } catch (const NotFoundError &e) {
    err << "botgate: not found: " << e.what() << "\n";
    return exit_code::not_found;
  } catch (const ModelError &e) {
    err << "botgate: model error: " << e.what() << "\n";
    return exit_code::model;
  } catch (const LoadError &e) {
    err << "botgate: " << e.what() << "\n";
    return exit_code::io;
  } catch (const IoError &e) {
    err << "botgate: " << e.what() << "\n";
    return exit_code::io;
  } catch (const TransportError &e) {
    err << "botgate: network error: " << e.what() << "\n";
    return exit_code::io;
  } catch (const Error &e) {
    err << "botgate: " << e.what() << "\n";
    return exit_code::usage;
  }
  return exit_code::usage;
}

} // namespace botgate
