#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lyrav/contrastive.hpp"
#include "lyrav/corpus.hpp"
#include "lyrav/errors.hpp"
#include "lyrav/gateway.hpp"
#include "lyrav/genre.hpp"
#include "lyrav/genre_labeling.hpp"
#include "lyrav/metrics.hpp"
#include "lyrav/pairs.hpp"
#include "lyrav/plots.hpp"
#include "lyrav/zeroshot.hpp"

namespace py = pybind11;
using namespace lyrav;

namespace {

PromptLanguage lang_of(const std::string& s) { return parse_language(s); }

}  // namespace

PYBIND11_MODULE(_lyrav, m) {
  m.doc() = "Cross-genre lyric authorship verification toolkit";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);
  py::register_exception<GatewayError>(m, "GatewayError", PyExc_RuntimeError);

  py::enum_<GenreTag>(m, "GenreTag")
      .value("FOLKLORE_TRADITION", GenreTag::kFolkloreTradition)
      .value("LOVE_ROMANCE", GenreTag::kLoveRomance)
      .value("LIFE_REFLECTION", GenreTag::kLifeReflection)
      .value("SOCIETY_REALITY", GenreTag::kSocietyReality)
      .value("LANDSCAPE_JOURNEY", GenreTag::kLandscapeJourney);
  m.def("genre_english_name", [](GenreTag g) { return std::string(genre_english_name(g)); });
  m.def("genre_chinese_name", [](GenreTag g) { return std::string(genre_chinese_name(g)); });
  m.def("parse_genre_name", [](const std::string& s) { return parse_genre_name(s); });

  py::enum_<Split>(m, "Split")
      .value("UNASSIGNED", Split::kUnassigned)
      .value("TRAIN", Split::kTrain)
      .value("TEST1", Split::kTest1)
      .value("TEST2", Split::kTest2);

  py::class_<Song>(m, "Song")
      .def(py::init<>())
      .def_readwrite("id", &Song::id)
      .def_readwrite("title", &Song::title)
      .def_readwrite("lyricists", &Song::lyricists)
      .def_readwrite("lines", &Song::lines)
      .def_readwrite("genres", &Song::genres)
      .def_readwrite("split", &Song::split)
      .def_property_readonly("length", &Song::length)
      .def("text", &Song::text)
      .def("__repr__", [](const Song& s) { return "<Song id=" + s.id + ">"; });

  m.def(
      "clean_lyrics",
      [](const std::string& raw, bool remove_parentheses, std::size_t speaker_label_max) {
        CleanConfig cfg;
        cfg.remove_parentheses = remove_parentheses;
        cfg.speaker_label_max_chars = speaker_label_max;
        return clean_lyrics(raw, cfg);
      },
      py::arg("raw"), py::arg("remove_parentheses") = true, py::arg("speaker_label_max") = 6);
  m.def("compute_length", &compute_length);

  py::class_<LengthStats>(m, "LengthStats")
      .def_readonly("median", &LengthStats::median)
      .def_readonly("mean", &LengthStats::mean)
      .def_readonly("max", &LengthStats::max)
      .def_readonly("min", &LengthStats::min)
      .def_readonly("q1", &LengthStats::q1)
      .def_readonly("q3", &LengthStats::q3)
      .def_readonly("lower_bound", &LengthStats::lower_bound)
      .def_readonly("upper_bound", &LengthStats::upper_bound)
      .def_readonly("outlier_count", &LengthStats::outlier_count);
  m.def("length_stats",
        [](const std::vector<Song>& songs) { return length_stats(songs); });
  m.def("length_stats_of_lengths",
        [](const std::vector<long>& lengths) { return length_stats_of_lengths(lengths); });
  m.def("filter_outliers",
        py::overload_cast<const std::vector<Song>&, double, double>(&filter_outliers),
        py::arg("songs"), py::arg("lower_bound"), py::arg("upper_bound"));
  m.def("load_corpus", &load_corpus);
  m.def("save_corpus", &save_corpus);

  m.def("genre_prompt_template",
        [](const std::string& lang) { return std::string(genre_prompt_template(lang_of(lang))); });
  m.def(
      "build_genre_prompt",
      [](const std::string& lyrics, const std::string& lang) {
        return build_genre_prompt(lyrics, lang_of(lang));
      },
      py::arg("lyrics"), py::arg("language") = "zh");
  m.def("parse_genre_response", &parse_genre_response);

  m.def("attrib_prompt_template",
        [](const std::string& lang) { return std::string(attrib_prompt_template(lang_of(lang))); });
  m.def(
      "build_attrib_prompt",
      [](const std::string& a, const std::string& b, const std::string& lang) {
        return build_attrib_prompt(a, b, lang_of(lang));
      },
      py::arg("lyrics_a"), py::arg("lyrics_b"), py::arg("language") = "zh");
  m.def("parse_verdict", &parse_verdict);

  py::enum_<PairMode>(m, "PairMode")
      .value("PER_GENRE", PairMode::kPerGenre)
      .value("CROSS_GENRE", PairMode::kCrossGenre);

  py::class_<Pair>(m, "Pair")
      .def(py::init<>())
      .def_readwrite("a_id", &Pair::a_id)
      .def_readwrite("b_id", &Pair::b_id)
      .def_readwrite("label", &Pair::label)
      .def_readwrite("mode", &Pair::mode)
      .def_readwrite("genres", &Pair::genres)
      .def_readwrite("split", &Pair::split);

  py::class_<PairSetSpec>(m, "PairSetSpec")
      .def(py::init<>())
      .def_readwrite("per_genre_fraction", &PairSetSpec::per_genre_fraction)
      .def_readwrite("same_author_fraction_per_genre", &PairSetSpec::same_author_fraction_per_genre)
      .def_readwrite("same_author_fraction_cross_genre",
                     &PairSetSpec::same_author_fraction_cross_genre)
      .def_readwrite("genre_quota", &PairSetSpec::genre_quota)
      .def_readwrite("tolerance", &PairSetSpec::tolerance)
      .def_readwrite("seed", &PairSetSpec::seed)
      .def_readwrite("pair_augmented_with_origin", &PairSetSpec::pair_augmented_with_origin);

  py::class_<AugmentationSpec>(m, "AugmentationSpec")
      .def(py::init<>())
      .def_readwrite("token_vocabulary", &AugmentationSpec::token_vocabulary)
      .def_readwrite("insertions_per_song", &AugmentationSpec::insertions_per_song)
      .def_readwrite("copies_per_song", &AugmentationSpec::copies_per_song)
      .def_readwrite("seed", &AugmentationSpec::seed);

  py::class_<BuildWarning>(m, "BuildWarning")
      .def_readonly("genre", &BuildWarning::genre)
      .def_readonly("family", &BuildWarning::family)
      .def_readonly("message", &BuildWarning::message);

  py::class_<PairBuildResult>(m, "PairBuildResult")
      .def_readonly("pairs", &PairBuildResult::pairs)
      .def_readonly("warnings", &PairBuildResult::warnings);

  m.def("split_songs", &split_songs, py::arg("songs"), py::arg("train_fraction") = 0.8,
        py::arg("seed") = 0);
  m.def("assert_unseen_authors", &assert_unseen_authors);
  m.def("build_pairs", &build_pairs, py::arg("songs"), py::arg("spec") = PairSetSpec{});
  m.def("augment_songs", &augment_songs, py::arg("songs"), py::arg("spec") = AugmentationSpec{});
  m.def("load_pairs", &load_pairs);
  m.def("save_pairs", &save_pairs);
  m.def("base_song_id", [](const std::string& id) { return base_song_id(id); });

  py::class_<ConfusionCounts>(m, "ConfusionCounts")
      .def_readonly("tp", &ConfusionCounts::tp)
      .def_readonly("fp", &ConfusionCounts::fp)
      .def_readonly("tn", &ConfusionCounts::tn)
      .def_readonly("fn", &ConfusionCounts::fn);

  py::class_<ClassMetrics>(m, "ClassMetrics")
      .def_readonly("precision", &ClassMetrics::precision)
      .def_readonly("recall", &ClassMetrics::recall)
      .def_readonly("f1", &ClassMetrics::f1)
      .def_readonly("support", &ClassMetrics::support);

  py::class_<MetricsCore>(m, "MetricsCore")
      .def_readonly("counts", &MetricsCore::counts)
      .def_readonly("accuracy", &MetricsCore::accuracy)
      .def_readonly("f1_micro", &MetricsCore::f1_micro)
      .def_readonly("f1_weighted", &MetricsCore::f1_weighted)
      .def_readonly("f1_macro", &MetricsCore::f1_macro)
      .def_readonly("recall", &MetricsCore::recall)
      .def_readonly("precision", &MetricsCore::precision)
      .def_readonly("positive", &MetricsCore::positive)
      .def_readonly("negative", &MetricsCore::negative)
      .def_readonly("support", &MetricsCore::support);

  m.def("compute_metrics", &compute_metrics);
  m.def("default_threshold_grid", &default_threshold_grid);
  m.def(
      "sweep_threshold",
      [](const std::vector<double>& sims, const std::vector<int>& truth,
         const std::vector<double>& grid) {
        const ThresholdSearch r = sweep_threshold(sims, truth, grid);
        return py::make_tuple(r.threshold, r.macro_f1);
      },
      py::arg("similarities"), py::arg("truth"), py::arg("grid") = default_threshold_grid());

  py::class_<MetricsRow>(m, "MetricsRow")
      .def_readonly("genre", &MetricsRow::genre)
      .def_readonly("mode", &MetricsRow::mode)
      .def_readonly("core", &MetricsRow::core);
  m.def("group_report", &group_report);
  m.def("render_report", &render_report, py::arg("report"), py::arg("format") = "markdown");

  py::class_<EncoderParams>(m, "EncoderParams")
      .def(py::init<>())
      .def_readwrite("feature_dim", &EncoderParams::feature_dim)
      .def_readwrite("embed_dim", &EncoderParams::embed_dim)
      .def_readwrite("margin", &EncoderParams::margin)
      .def_readwrite("hash_seed", &EncoderParams::hash_seed)
      .def_readwrite("max_seq_len", &EncoderParams::max_seq_len)
      .def_readwrite("projection", &EncoderParams::projection);

  py::class_<TrainingConfig>(m, "TrainingConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainingConfig::epochs)
      .def_readwrite("learning_rate", &TrainingConfig::learning_rate)
      .def_readwrite("batch_size", &TrainingConfig::batch_size)
      .def_readwrite("warmup_steps", &TrainingConfig::warmup_steps)
      .def_readwrite("eval_interval_steps", &TrainingConfig::eval_interval_steps)
      .def_readwrite("validation_fraction", &TrainingConfig::validation_fraction)
      .def_readwrite("seed", &TrainingConfig::seed);

  py::class_<ThresholdHistoryEntry>(m, "ThresholdHistoryEntry")
      .def_readonly("step", &ThresholdHistoryEntry::step)
      .def_readonly("threshold", &ThresholdHistoryEntry::threshold)
      .def_readonly("macro_f1", &ThresholdHistoryEntry::macro_f1);

  py::class_<ThresholdModel>(m, "ThresholdModel")
      .def_readonly("threshold", &ThresholdModel::threshold)
      .def_readonly("best_validation_macro_f1", &ThresholdModel::best_validation_macro_f1)
      .def_readonly("history", &ThresholdModel::history);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("thresholds", &TrainResult::thresholds);

  m.def("featurize", &featurize);
  m.def("encode", &encode);
  m.def("cosine_similarity", &cosine_similarity);
  m.def("contrastive_loss", &contrastive_loss, py::arg("label"), py::arg("similarity"),
        py::arg("margin") = 0.5);
  m.def("train", &train, py::arg("pairs"), py::arg("songs"), py::arg("params") = EncoderParams{},
        py::arg("config") = TrainingConfig{});
  m.def("predict", &predict);
  m.def("predict_all", &predict_all);
  m.def("pair_similarity", &pair_similarity);

  py::class_<VerifierModel>(m, "VerifierModel")
      .def(py::init<>())
      .def_readwrite("params", &VerifierModel::params)
      .def_readwrite("threshold", &VerifierModel::threshold)
      .def_readwrite("best_validation_macro_f1", &VerifierModel::best_validation_macro_f1)
      .def_readwrite("training", &VerifierModel::training);
  m.def("save_model", &save_model);
  m.def("load_model", &load_model);

  py::class_<GatewayConfig>(m, "GatewayConfig")
      .def(py::init<>())
      .def_readwrite("base_url", &GatewayConfig::base_url)
      .def_readwrite("model_id", &GatewayConfig::model_id)
      .def_readwrite("api_key_env", &GatewayConfig::api_key_env)
      .def_readwrite("timeout_s", &GatewayConfig::timeout_s)
      .def_readwrite("max_retries", &GatewayConfig::max_retries)
      .def_readwrite("backoff_base_s", &GatewayConfig::backoff_base_s)
      .def_readwrite("concurrency_limit", &GatewayConfig::concurrency_limit)
      .def_readwrite("requests_per_minute", &GatewayConfig::requests_per_minute)
      .def_readwrite("temperature", &GatewayConfig::temperature)
      .def_readwrite("exchange_log_path", &GatewayConfig::exchange_log_path)
      .def_readwrite("replay_log_path", &GatewayConfig::replay_log_path);

  py::class_<BatchItem>(m, "BatchItem")
      .def_readonly("ok", &BatchItem::ok)
      .def_readonly("value", &BatchItem::value)
      .def_readonly("error", &BatchItem::error);

  py::class_<Gateway>(m, "Gateway")
      .def(py::init<GatewayConfig>())
      .def("complete", &Gateway::complete, py::call_guard<py::gil_scoped_release>())
      .def("complete_batch", &Gateway::complete_batch, py::call_guard<py::gil_scoped_release>());

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("a_id", &Verdict::a_id)
      .def_readonly("b_id", &Verdict::b_id)
      .def_readonly("predicted", &Verdict::predicted)
      .def_readonly("raw_response_digest", &Verdict::raw_response_digest);
  m.def("save_verdicts", &save_verdicts);
  m.def("load_verdicts", &load_verdicts);

  m.def("length_box_svg", &length_box_svg);
  m.def("length_hist_svg", &length_hist_svg);
  m.def("authors_per_genre_svg", &authors_per_genre_svg);
}
