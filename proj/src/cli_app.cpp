#include "lyrav/cli_app.hpp"

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "lyrav/contrastive.hpp"
#include "lyrav/corpus.hpp"
#include "lyrav/errors.hpp"
#include "lyrav/gateway.hpp"
#include "lyrav/genre_labeling.hpp"
#include "lyrav/io.hpp"
#include "lyrav/metrics.hpp"
#include "lyrav/pairs.hpp"
#include "lyrav/plots.hpp"
#include "lyrav/zeroshot.hpp"

namespace lyrav::cli {

namespace {

struct Options {
  // clean
  std::string clean_in, clean_out;
  bool filter_outliers = false;
  std::vector<double> bounds;  // lo hi
  bool keep_parentheses = false;
  std::size_t speaker_label_max = 6;
  std::string quantile_method = "linear";

  // gateway
  GatewayConfig gateway;
  std::string replay_log;

  // label-genres
  std::string corpus_path;
  std::string language = "zh";
  std::optional<std::size_t> sample;
  std::string corpus_out;
  std::string assignments_out = "assignments.jsonl";
  std::string review_sheet = "review.csv";

  // review-apply
  std::string review_csv;
  std::string assignments_in;

  // build-pairs
  std::string split = "train";
  std::string pairs_out = "pairs.jsonl";
  std::string train_corpus;
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
  bool augment = false;
  AugmentationSpec augmentation;
  std::string augmented_out;
  PairSetSpec pairset;
  std::vector<std::string> quota_args;
  std::string stats_out;

  // zeroshot / evaluate / train
  std::string pairs_path;
  std::string verdicts_out = "verdicts.jsonl";
  std::string verdicts_in;
  std::string model_path;
  std::string model_out = "model.json";
  std::string history_out;
  std::string report_format = "markdown";
  std::string report_out;
  EncoderParams encoder;
  TrainingConfig training;

  // plot
  std::string plot_kind = "length-hist";
  std::string plot_out = "plot.svg";
};

void add_gateway_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--base-url", o.gateway.base_url, "Chat-completion endpoint base URL");
  cmd->add_option("--model", o.gateway.model_id, "Model identifier sent with each request");
  cmd->add_option("--api-key-env", o.gateway.api_key_env,
                  "Env var holding the bearer token (empty disables auth)");
  cmd->add_option("--timeout", o.gateway.timeout_s, "HTTP timeout in seconds");
  cmd->add_option("--max-retries", o.gateway.max_retries, "Retries on 429/5xx/transport errors");
  cmd->add_option("--backoff-base", o.gateway.backoff_base_s, "Base backoff delay in seconds");
  cmd->add_option("--concurrency", o.gateway.concurrency_limit, "Max requests in flight");
  cmd->add_option("--rpm", [&o](const CLI::results_t& res) {
    o.gateway.requests_per_minute = std::stoi(res[0]);
    return true;
  }, "Requests-per-minute cap")->expected(1);
  cmd->add_option("--temperature", o.gateway.temperature, "Sampling temperature");
  cmd->add_option("--log", o.gateway.exchange_log_path, "Append-only exchange log (JSONL)");
  cmd->add_option("--replay", o.replay_log, "Serve responses from a logged run instead of HTTP");
}

void add_encoder_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--feature-dim", o.encoder.feature_dim, "Hashed feature dimension F");
  cmd->add_option("--embed-dim", o.encoder.embed_dim, "Embedding dimension D");
  cmd->add_option("--margin", o.encoder.margin, "Contrastive margin on cosine distance");
  cmd->add_option("--hash-seed", o.encoder.hash_seed, "Feature hashing seed");
  cmd->add_option("--max-seq-len", o.encoder.max_seq_len, "Characters of lyric text kept");
}

CleanConfig clean_config(const Options& o) {
  CleanConfig cfg;
  cfg.remove_parentheses = !o.keep_parentheses;
  cfg.speaker_label_max_chars = o.speaker_label_max;
  return cfg;
}

void print_stats(const LengthStats& s) {
  std::printf("median %.1f  mean %.3f  min %ld  max %ld\n", s.median, s.mean, s.min, s.max);
  std::printf("q1 %.2f  q3 %.2f  lower_bound %.2f  upper_bound %.2f  outliers %zu\n", s.q1, s.q3,
              s.lower_bound, s.upper_bound, s.outlier_count);
}

int cmd_clean(const Options& o) {
  const auto raw = load_raw_songs(o.clean_in);
  if (raw.empty()) throw ValidationError(o.clean_in + ": no songs");
  std::vector<Song> songs;
  songs.reserve(raw.size());
  const CleanConfig cfg = clean_config(o);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char fallback[32];
    std::snprintf(fallback, sizeof(fallback), "song-%04zu", i + 1);
    songs.push_back(clean_song(raw[i], fallback, cfg));
  }
  QuantileMethod method;
  if (o.quantile_method == "linear") method = QuantileMethod::kLinearInterpolation;
  else if (o.quantile_method == "nearest") method = QuantileMethod::kNearestRank;
  else throw ValidationError("--quantile-method must be linear or nearest");
  const LengthStats stats = length_stats(songs, method);
  print_stats(stats);
  if (o.filter_outliers) {
    double lo = stats.lower_bound;
    double hi = stats.upper_bound;
    if (!o.bounds.empty()) {
      lo = o.bounds[0];
      hi = o.bounds[1];
    }
    auto [kept, removed] = filter_outliers(songs, lo, hi);
    std::printf("removed %zu song(s) outside [%.2f, %.2f]\n", removed.size(), lo, hi);
    songs = std::move(kept);
  }
  save_corpus(songs, o.clean_out);
  std::printf("wrote %zu song(s) to %s\n", songs.size(), o.clean_out.c_str());
  return 0;
}

Gateway make_gateway(const Options& o) {
  GatewayConfig cfg = o.gateway;
  cfg.replay_log_path = o.replay_log;
  return Gateway(std::move(cfg));
}

int cmd_label_genres(const Options& o) {
  std::vector<Song> songs = load_corpus(o.corpus_path);
  Gateway gateway = make_gateway(o);
  std::vector<PromptLanguage> languages;
  if (o.language == "both") languages = {PromptLanguage::kZh, PromptLanguage::kEn};
  else languages = {parse_language(o.language)};

  std::vector<GenreAssignment> all;
  std::size_t failures = 0;
  for (PromptLanguage lang : languages) {
    LabelResult res = label_corpus(songs, gateway, lang, o.sample);
    for (const auto& err : res.errors) {
      std::fprintf(stderr, "label %s: %s\n", err.song_id.c_str(), err.message.c_str());
      ++failures;
    }
    all.insert(all.end(), res.assignments.begin(), res.assignments.end());
  }
  save_assignments(all, o.assignments_out);
  export_review_sheet(all, songs, o.review_sheet);
  save_corpus(songs, o.corpus_out.empty() ? o.corpus_path : o.corpus_out);
  std::printf("labeled %zu song(s), %zu failure(s); review sheet at %s\n", all.size(), failures,
              o.review_sheet.c_str());
  return 0;
}

int cmd_review_apply(const Options& o) {
  std::vector<Song> songs = load_corpus(o.corpus_path);
  std::vector<GenreAssignment> assignments = load_assignments(o.assignments_in);
  assignments = apply_review(std::move(assignments), o.review_csv);
  apply_assignments(assignments, songs);
  save_assignments(assignments, o.assignments_in);
  save_corpus(songs, o.corpus_out.empty() ? o.corpus_path : o.corpus_out);
  std::printf("applied %zu verdict(s)\n", assignments.size());
  return 0;
}

PairSetSpec pairset_spec(const Options& o) {
  PairSetSpec spec = o.pairset;
  if (!o.quota_args.empty()) {
    spec.genre_quota.clear();
    for (const auto& arg : o.quota_args) {
      const auto eq = arg.rfind('=');
      if (eq == std::string::npos)
        throw ValidationError("--quota expects <genre>=<count>: " + arg);
      auto tag = parse_genre_name(arg.substr(0, eq));
      if (!tag) throw ValidationError("--quota: unknown genre: " + arg.substr(0, eq));
      spec.genre_quota[*tag] = std::stoi(arg.substr(eq + 1));
    }
  }
  return spec;
}

int cmd_build_pairs(const Options& o) {
  std::vector<Song> songs = load_corpus(o.corpus_path);
  const Split want = parse_split(o.split);
  if (want == Split::kUnassigned) throw ValidationError("--split must be train, test1 or test2");

  std::vector<Song> selected;
  if (want == Split::kTest2) {
    if (o.train_corpus.empty())
      throw ValidationError("test2 pairs need --train-corpus for the unseen-author check");
    const auto train = load_corpus(o.train_corpus);
    const auto violations = assert_unseen_authors(songs, train);
    if (!violations.empty()) {
      std::string names;
      for (const auto& n : violations) names += (names.empty() ? "" : ", ") + n;
      throw ValidationError("test2 lyricists appear in training: " + names);
    }
    for (auto& s : songs) s.split = Split::kTest2;
    save_corpus(songs, o.corpus_out.empty() ? o.corpus_path : o.corpus_out);
    selected = songs;
  } else {
    const bool unassigned = std::all_of(songs.begin(), songs.end(), [](const Song& s) {
      return s.split == Split::kUnassigned;
    });
    if (unassigned) {
      auto [train, test1] = split_songs(songs, o.train_fraction, o.split_seed);
      songs = std::move(train);
      songs.insert(songs.end(), test1.begin(), test1.end());
      save_corpus(songs, o.corpus_out.empty() ? o.corpus_path : o.corpus_out);
    }
    for (const auto& s : songs)
      if (s.split == want) selected.push_back(s);
  }
  if (selected.empty())
    throw ValidationError("no songs in split " + o.split + " of " + o.corpus_path);
  if (o.augment) {
    selected = augment_songs(selected, o.augmentation);
    // Pairs may reference the synthetic copies, so the augmented song set
    // gets its own file for downstream commands.
    std::string aug_path = o.augmented_out;
    if (aug_path.empty()) {
      aug_path = o.pairs_out;
      const auto dot = aug_path.rfind(".jsonl");
      if (dot != std::string::npos) aug_path.resize(dot);
      aug_path += "_songs.jsonl";
    }
    save_corpus(selected, aug_path);
    std::printf("wrote augmented song set to %s\n", aug_path.c_str());
  }

  PairBuildResult built = build_pairs(selected, pairset_spec(o));
  for (auto& p : built.pairs) p.split = want;
  for (const auto& w : built.warnings)
    std::fprintf(stderr, "warning: %s / %s: %s\n",
                 std::string(genre_english_name(w.genre)).c_str(), w.family.c_str(),
                 w.message.c_str());
  save_pairs(built.pairs, o.pairs_out);
  const std::string stats = render_pairset_stats(pairset_stats(built.pairs, selected));
  if (o.stats_out.empty()) std::fputs(stats.c_str(), stdout);
  else io::write_file(o.stats_out, stats);
  std::printf("wrote %zu pair(s) to %s\n", built.pairs.size(), o.pairs_out.c_str());
  return 0;
}

int cmd_zeroshot(const Options& o) {
  const auto pairs = load_pairs(o.pairs_path);
  const auto songs = load_corpus(o.corpus_path);
  Gateway gateway = make_gateway(o);
  const ZeroshotResult res = run_zeroshot(pairs, songs, gateway, parse_language(o.language));
  for (const auto& err : res.errors)
    std::fprintf(stderr, "verdict %s/%s: %s\n", err.a_id.c_str(), err.b_id.c_str(),
                 err.message.c_str());
  save_verdicts(res.verdicts, o.verdicts_out);
  std::printf("wrote %zu verdict(s) to %s (%zu failure(s))\n", res.verdicts.size(),
              o.verdicts_out.c_str(), res.errors.size());
  return 0;
}

int cmd_train(const Options& o) {
  const auto pairs = load_pairs(o.pairs_path);
  const auto songs = load_corpus(o.corpus_path);
  const TrainResult result = train(pairs, songs, o.encoder, o.training);
  VerifierModel model{result.params, result.thresholds.threshold,
                      result.thresholds.best_validation_macro_f1, o.training};
  save_model(model, o.model_out);
  if (!o.history_out.empty()) io::write_file(o.history_out, threshold_history_csv(result.thresholds));
  std::printf("model at %s; best validation macro F1 %.4f at threshold %.2f\n",
              o.model_out.c_str(), result.thresholds.best_validation_macro_f1,
              result.thresholds.threshold);
  return 0;
}

int cmd_evaluate(const Options& o) {
  std::vector<Pair> pairs = load_pairs(o.pairs_path);
  const auto songs = load_corpus(o.corpus_path);
  std::vector<int> predictions;
  if (!o.model_path.empty()) {
    const VerifierModel model = load_model(o.model_path);
    predictions = predict_all(model.params, model.threshold, pairs, songs);
  } else if (!o.verdicts_in.empty()) {
    std::map<std::pair<std::string, std::string>, int> by_pair;
    for (const auto& v : load_verdicts(o.verdicts_in)) {
      by_pair[{v.a_id, v.b_id}] = v.predicted;
      by_pair[{v.b_id, v.a_id}] = v.predicted;
    }
    std::vector<Pair> covered;
    for (const auto& p : pairs) {
      auto it = by_pair.find({p.a_id, p.b_id});
      if (it == by_pair.end()) {
        std::fprintf(stderr, "no verdict for pair %s/%s; skipped\n", p.a_id.c_str(),
                     p.b_id.c_str());
        continue;
      }
      covered.push_back(p);
      predictions.push_back(it->second);
    }
    pairs = std::move(covered);
  } else {
    throw ValidationError("evaluate needs --model or --verdicts");
  }
  if (pairs.empty()) throw ValidationError("nothing to evaluate");
  const std::string rendered = render_report(group_report(pairs, predictions), o.report_format);
  if (o.report_out.empty()) std::fputs(rendered.c_str(), stdout);
  else io::write_file(o.report_out, rendered);
  return 0;
}

int cmd_plot(const Options& o) {
  const auto songs = load_corpus(o.corpus_path);
  std::vector<long> lengths;
  lengths.reserve(songs.size());
  for (const auto& s : songs) lengths.push_back(static_cast<long>(s.length()));
  std::string svg;
  if (o.plot_kind == "length-box") svg = length_box_svg(lengths);
  else if (o.plot_kind == "length-hist") svg = length_hist_svg(lengths);
  else if (o.plot_kind == "authors-per-genre") svg = authors_per_genre_svg(songs);
  else throw ValidationError("unknown plot kind: " + o.plot_kind);
  io::write_file(o.plot_out, svg);
  std::printf("wrote %s\n", o.plot_out.c_str());
  return 0;
}

struct AppBundle {
  CLI::App app{"Cross-genre lyric authorship verification toolkit", "lyrav"};
  Options opts;
  std::map<std::string, int (*)(const Options&)> dispatch;

  AppBundle() {
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML-style config file; flags override its values");

    auto* clean = app.add_subcommand("clean", "Clean raw lyrics and filter length outliers");
    clean->add_option("input", opts.clean_in, "Raw song JSONL")->required();
    clean->add_option("output", opts.clean_out, "Cleaned corpus JSONL")->required();
    clean->add_flag("--filter-outliers", opts.filter_outliers,
                    "Drop songs outside the Tukey fences");
    clean->add_option("--bounds", opts.bounds, "Externally supplied length bounds LO HI")
        ->expected(2);
    clean->add_flag("--keep-parentheses", opts.keep_parentheses,
                    "Keep parenthesized spans (brackets are always removed)");
    clean->add_option("--speaker-label-max", opts.speaker_label_max,
                      "Max characters in a speaker label before the colon");
    clean->add_option("--quantile-method", opts.quantile_method,
                      "Quartile estimator for the stats: linear or nearest");
    dispatch["clean"] = cmd_clean;

    auto* label = app.add_subcommand("label-genres", "Assign theme genres via the LLM gateway");
    label->add_option("corpus", opts.corpus_path, "Corpus JSONL")->required();
    label->add_option("--language", opts.language, "Prompt language: zh, en or both");
    label->add_option("--sample", [this](const CLI::results_t& res) {
      opts.sample = static_cast<std::size_t>(std::stoull(res[0]));
      return true;
    }, "Label only the first N songs")->expected(1);
    label->add_option("--out", opts.corpus_out, "Updated corpus path (default: in place)");
    label->add_option("--assignments", opts.assignments_out, "Assignment JSONL output");
    label->add_option("--review-sheet", opts.review_sheet, "Review CSV output");
    add_gateway_options(label, opts);
    dispatch["label-genres"] = cmd_label_genres;

    auto* review = app.add_subcommand("review-apply", "Apply human review verdicts");
    review->add_option("corpus", opts.corpus_path, "Corpus JSONL")->required();
    review->add_option("review", opts.review_csv, "Review CSV with verdicts")->required();
    review->add_option("--assignments", opts.assignments_in, "Assignment JSONL to update")
        ->required();
    review->add_option("--out", opts.corpus_out, "Updated corpus path (default: in place)");
    dispatch["review-apply"] = cmd_review_apply;

    auto* build = app.add_subcommand("build-pairs", "Construct pairwise train/test sets");
    build->add_option("corpus", opts.corpus_path, "Corpus JSONL")->required();
    build->add_option("--split", opts.split, "train, test1 or test2")->required();
    build->add_option("--out", opts.pairs_out, "Pair JSONL output");
    build->add_option("--train-corpus", opts.train_corpus,
                      "Training corpus for the test2 unseen-author check");
    build->add_option("--train-fraction", opts.train_fraction, "Train share of the song split");
    build->add_option("--seed", opts.split_seed, "Seed for the song split");
    build->add_flag("--augment", opts.augment, "Append synthetic-token copies before pairing");
    build->add_option("--insertions", opts.augmentation.insertions_per_song,
                      "Synthetic tokens inserted per augmented copy");
    build->add_option("--copies", opts.augmentation.copies_per_song,
                      "Augmented copies per song");
    build->add_option("--aug-seed", opts.augmentation.seed, "Seed for augmentation positions");
    build->add_option("--augmented-out", opts.augmented_out,
                      "Where to write the augmented song set (default: derived from --out)");
    build->add_option("--pair-seed", opts.pairset.seed, "Seed for pair sampling");
    build->add_option("--per-genre-fraction", opts.pairset.per_genre_fraction,
                      "Target share of per-genre pairs");
    build->add_option("--same-author-per-genre", opts.pairset.same_author_fraction_per_genre,
                      "Target same-author share among per-genre pairs");
    build->add_option("--same-author-cross", opts.pairset.same_author_fraction_cross_genre,
                      "Target same-author share among cross-genre pairs");
    build->add_option("--quota", opts.quota_args,
                      "Per-genre pair quota as <genre>=<count>; repeatable");
    build->add_option("--tolerance", opts.pairset.tolerance, "Relative slack on the targets");
    build->add_option("--stats-out", opts.stats_out, "Write the breakdown tables here");
    dispatch["build-pairs"] = cmd_build_pairs;

    auto* zs = app.add_subcommand("zeroshot", "Run the zero-shot verifier over pairs");
    zs->add_option("pairs", opts.pairs_path, "Pair JSONL")->required();
    zs->add_option("corpus", opts.corpus_path, "Corpus JSONL")->required();
    zs->add_option("--language", opts.language, "Prompt language: zh or en");
    zs->add_option("--out", opts.verdicts_out, "Verdict JSONL output");
    add_gateway_options(zs, opts);
    dispatch["zeroshot"] = cmd_zeroshot;

    auto* tr = app.add_subcommand("train", "Train the contrastive verifier");
    tr->add_option("pairs", opts.pairs_path, "Training pair JSONL")->required();
    tr->add_option("corpus", opts.corpus_path, "Corpus JSONL")->required();
    tr->add_option("--model-out", opts.model_out, "Model container output");
    tr->add_option("--history-out", opts.history_out, "Threshold history CSV output");
    tr->add_option("--epochs", opts.training.epochs, "Training epochs");
    tr->add_option("--learning-rate", opts.training.learning_rate, "Peak learning rate");
    tr->add_option("--batch-size", opts.training.batch_size, "Mini-batch size");
    tr->add_option("--warmup-steps", opts.training.warmup_steps, "Linear warmup steps");
    tr->add_option("--eval-interval", opts.training.eval_interval_steps,
                   "Steps between threshold re-selections");
    tr->add_option("--validation-fraction", opts.training.validation_fraction,
                   "Pair share held out for validation");
    tr->add_option("--seed", opts.training.seed, "Training seed");
    add_encoder_options(tr, opts);
    dispatch["train"] = cmd_train;

    auto* ev = app.add_subcommand("evaluate", "Report metrics per genre and mode");
    ev->add_option("pairs", opts.pairs_path, "Pair JSONL")->required();
    ev->add_option("corpus", opts.corpus_path, "Corpus JSONL")->required();
    ev->add_option("--model", opts.model_path, "Trained model container");
    ev->add_option("--verdicts", opts.verdicts_in, "Zero-shot verdict JSONL");
    ev->add_option("--format", opts.report_format, "markdown or csv");
    ev->add_option("--out", opts.report_out, "Write the report here instead of stdout");
    dispatch["evaluate"] = cmd_evaluate;

    auto* plot = app.add_subcommand("plot", "Emit corpus statistics as SVG");
    plot->add_option("corpus", opts.corpus_path, "Corpus JSONL")->required();
    plot->add_option("--kind", opts.plot_kind,
                     "length-box, length-hist or authors-per-genre");
    plot->add_option("--out", opts.plot_out, "SVG output path");
    dispatch["plot"] = cmd_plot;
  }
};

}  // namespace

int run(int argc, const char* const* argv) {
  AppBundle bundle;
  try {
    bundle.app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return bundle.app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return bundle.app.exit(e);
  } catch (const CLI::ParseError& e) {
    bundle.app.exit(e);
    return 1;
  }
  try {
    for (auto* sub : bundle.app.get_subcommands())
      return bundle.dispatch.at(sub->get_name())(bundle.opts);
    return 1;
  } catch (const GatewayError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::vector<CommandDoc> command_docs() {
  AppBundle bundle;
  std::vector<CommandDoc> docs;
  for (const CLI::App* sub : bundle.app.get_subcommands(nullptr)) {
    CommandDoc doc;
    doc.name = sub->get_name();
    doc.description = sub->get_description();
    for (const CLI::Option* opt : sub->get_options())
      doc.options.emplace_back(opt->get_name(), opt->get_description());
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string command_help(const std::string& command) {
  AppBundle bundle;
  for (CLI::App* sub : bundle.app.get_subcommands(nullptr))
    if (sub->get_name() == command) return sub->help();
  throw ValidationError("unknown command: " + command);
}

}  // namespace lyrav::cli
