"""Smoke tests for the _lyrav extension module."""

import pytest

import lyrav


def test_clean_lyrics():
    assert lyrav.clean_lyrics("[00:12.30]你好世界") == ["你好世界"]
    assert lyrav.clean_lyrics("前奏 男：月光下") == ["月光下"]
    assert lyrav.clean_lyrics("") == []


def test_length_stats_tukey():
    stats = lyrav.length_stats_of_lengths([16, 36, 43, 53, 119])
    assert stats.q1 == 36.0
    assert stats.q3 == 53.0
    assert stats.lower_bound == 10.5
    assert stats.upper_bound == 78.5
    assert stats.outlier_count == 1


def test_prompts_and_parsers():
    prompt = lyrav.build_genre_prompt("一句歌词", "zh")
    assert "流派： [流派1]" in prompt
    tags = lyrav.parse_genre_response("<think>x</think>\n流派：[爱与浪漫, 生活与反思]")
    assert tags == [lyrav.GenreTag.LOVE_ROMANCE, lyrav.GenreTag.LIFE_REFLECTION]
    assert lyrav.parse_verdict("<think>…</think>\n1") == 1
    assert lyrav.parse_verdict("输出：0") == 0
    with pytest.raises(ValueError):
        lyrav.parse_verdict("maybe")


def test_metrics_reference_row():
    m = lyrav.compute_metrics([1] * 5 + [0] * 3, [1] * 8)
    assert abs(m.accuracy - 0.6250) < 5e-5
    assert abs(m.f1_weighted - 0.4808) < 5e-5
    assert abs(m.f1_macro - 0.3846) < 5e-5
    assert m.recall == 1.0
    assert m.f1_micro == m.accuracy
    assert m.positive.support == 5
    assert m.negative.support == 3
    assert m.negative.f1 == 0.0


def test_sweep_threshold():
    threshold, macro_f1 = lyrav.sweep_threshold([0.9, 0.1], [1, 0])
    assert macro_f1 == 1.0
    assert abs(threshold - 0.11) < 1e-9


def test_pair_building_roundtrip(tmp_path):
    songs = []
    for k in range(6):
        s = lyrav.Song()
        s.id = f"s{k}"
        s.title = f"歌{k}"
        s.lyricists = ["甲" if k < 3 else "乙"]
        s.lines = [f"第{k}首第{j}行" for j in range(3)]
        s.genres = [lyrav.GenreTag.LOVE_ROMANCE if k % 2 else lyrav.GenreTag.LIFE_REFLECTION]
        songs.append(s)
    built = lyrav.build_pairs(songs)
    assert built.pairs
    for pair in built.pairs:
        a = next(s for s in songs if s.id == pair.a_id)
        b = next(s for s in songs if s.id == pair.b_id)
        same = bool(set(a.lyricists) & set(b.lyricists))
        assert pair.label == (1 if same else 0)

    path = str(tmp_path / "pairs.jsonl")
    lyrav.save_pairs(built.pairs, path)
    loaded = lyrav.load_pairs(path)
    assert len(loaded) == len(built.pairs)


def test_train_and_predict_separable(tmp_path):
    def make_song(sid, author, vocab, k):
        s = lyrav.Song()
        s.id = sid
        s.title = sid
        s.lyricists = [author]
        s.genres = [lyrav.GenreTag.LOVE_ROMANCE]
        s.lines = ["".join(vocab[(k * 3 + c) % len(vocab)] for c in range(12))
                   for _ in range(3)]
        return s

    songs = [make_song(f"x{k}", "X", "一二三四五六七八九十", k) for k in range(8)]
    songs += [make_song(f"y{k}", "Y", "abcdefghij", k) for k in range(8)]

    pairs = []
    def add(a, b, label):
        p = lyrav.Pair()
        p.a_id, p.b_id, p.label = a, b, label
        p.mode = lyrav.PairMode.PER_GENRE
        p.genres = [lyrav.GenreTag.LOVE_ROMANCE]
        pairs.append(p)

    for i in range(7):
        add(f"x{i}", f"x{i+1}", 1)
        add(f"y{i}", f"y{i+1}", 1)
    for i in range(8):
        add(f"x{i}", f"y{i}", 0)

    params = lyrav.EncoderParams()
    params.feature_dim = 256
    params.embed_dim = 16
    config = lyrav.TrainingConfig()
    config.epochs = 2
    config.learning_rate = 0.05
    config.warmup_steps = 2
    config.eval_interval_steps = 2
    config.seed = 3
    result = lyrav.train(pairs, songs, params, config)
    assert result.thresholds.best_validation_macro_f1 >= 0.9

    model = lyrav.VerifierModel()
    model.params = result.params
    model.threshold = result.thresholds.threshold
    model.best_validation_macro_f1 = result.thresholds.best_validation_macro_f1
    model_path = str(tmp_path / "model.json")
    lyrav.save_model(model, model_path)
    loaded = lyrav.load_model(model_path)
    preds = lyrav.predict_all(loaded.params, loaded.threshold, pairs, songs)
    truth = [p.label for p in pairs]
    agree = sum(int(a == b) for a, b in zip(preds, truth))
    assert agree >= 0.75 * len(pairs)


def test_report_rendering():
    pairs = []
    for k in range(4):
        p = lyrav.Pair()
        p.a_id, p.b_id = f"a{k}", f"b{k}"
        p.label = k % 2
        p.mode = lyrav.PairMode.PER_GENRE
        p.genres = [lyrav.GenreTag.SOCIETY_REALITY]
        pairs.append(p)
    report = lyrav.group_report(pairs, [1, 1, 0, 0])
    text = lyrav.render_report(report, "markdown")
    assert "| Genre | Mode |" in text
    csv_text = lyrav.render_report(report, "csv")
    assert csv_text.startswith("genre,mode,accuracy")
