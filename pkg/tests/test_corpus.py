import numpy as np
import pytest

from urbanimpact import (
    aggregate_cities,
    load_corpus,
    select_extreme_cities,
    write_corpus,
)
from urbanimpact.errors import (
    DuplicateKey,
    EmptyTable,
    KOutOfRange,
    MissingColumn,
    UnknownCity,
    ValueOutOfRange,
)

from util import (
    TOY_COVARIATES_ROWS,
    TOY_EMPLOYMENT_ROWS,
    TOY_PROBS_ROWS,
    TOY_SKILLS_ROWS,
    write_fixture_csvs,
)


def load_toy(tmp_path, **overrides):
    rows = {
        "employment_rows": TOY_EMPLOYMENT_ROWS,
        "skills_rows": TOY_SKILLS_ROWS,
        "probs_rows": TOY_PROBS_ROWS,
        "covariates_rows": TOY_COVARIATES_ROWS,
    }
    rows.update(overrides)
    paths = write_fixture_csvs(tmp_path, **rows)
    return load_corpus(paths["employment"], paths["skills"], paths["probs"],
                       paths.get("covariates"))


def test_toy_load(tmp_path):
    corpus = load_toy(tmp_path)
    assert corpus.cities == ["ann", "ben", "cam"]
    assert corpus.occupations == ["A", "B", "C", "D"]
    assert corpus.skills == ["s1", "s2", "s3"]
    assert np.allclose(corpus.coverage["frey_osborne"], 1.0)
    assert corpus.city_names["ann"] == "Ann Arbor"
    assert corpus.covariates["ann"].n_unique_jobs == 2


def test_negative_workers_rejected(tmp_path):
    rows = TOY_EMPLOYMENT_ROWS + [("ben", "Bend", "D", -5)]
    with pytest.raises(ValueOutOfRange):
        load_toy(tmp_path, employment_rows=rows)


def test_partial_prob_coverage(tmp_path):
    # drop D from probs: cam has 12 of 20 workers in D -> coverage 8/20
    probs = [row for row in TOY_PROBS_ROWS if row[0] != "D"]
    corpus = load_toy(tmp_path, probs_rows=probs)
    cov = corpus.coverage["frey_osborne"]
    assert cov[corpus.cities.index("ann")] == pytest.approx(1.0)
    assert cov[corpus.cities.index("cam")] == pytest.approx(8 / 20)


def test_missing_column(tmp_path):
    paths = write_fixture_csvs(tmp_path, TOY_EMPLOYMENT_ROWS, TOY_SKILLS_ROWS,
                               TOY_PROBS_ROWS)
    bad = tmp_path / "bad.csv"
    bad.write_text("city_id,occ_code,workers\nann,A,10\n")
    with pytest.raises(MissingColumn):
        load_corpus(bad, paths["skills"], paths["probs"])


def test_duplicate_key(tmp_path):
    rows = TOY_EMPLOYMENT_ROWS + [("ann", "Ann Arbor", "A", 4)]
    with pytest.raises(DuplicateKey):
        load_toy(tmp_path, employment_rows=rows)


def test_empty_table(tmp_path):
    with pytest.raises(EmptyTable):
        load_toy(tmp_path, probs_rows=[])


def test_unparseable_row_dropped_with_diagnostic(tmp_path):
    rows = TOY_EMPLOYMENT_ROWS + [("ben", "Bend", "D", "oops")]
    corpus = load_toy(tmp_path, employment_rows=rows)
    assert corpus.employment[corpus.cities.index("ben"),
                             corpus.occupations.index("D")] == 0
    assert any("unparseable workers" in d for d in corpus.diagnostics)


def test_out_of_range_importance(tmp_path):
    rows = TOY_SKILLS_ROWS + [("D", "s9", "bad", 1.7)]
    with pytest.raises(ValueOutOfRange):
        load_toy(tmp_path, skills_rows=rows)


def test_roundtrip(tmp_path):
    corpus = load_toy(tmp_path)
    files = write_corpus(corpus, tmp_path / "export")
    reloaded = load_corpus(files["employment"], files["skills"], files["probs"],
                           files.get("covariates"))
    assert reloaded.cities == corpus.cities
    assert reloaded.occupations == corpus.occupations
    assert reloaded.skills == corpus.skills
    assert np.allclose(reloaded.employment, corpus.employment, atol=1e-12)
    assert np.allclose(reloaded.skill_importance, corpus.skill_importance,
                       atol=1e-12)
    for src in corpus.probs:
        assert np.allclose(reloaded.probs[src], corpus.probs[src],
                           atol=1e-12, equal_nan=True)
    for city, cov in corpus.covariates.items():
        got = reloaded.covariates[city]
        assert got.total_employment == pytest.approx(cov.total_employment,
                                                     abs=1e-12)
        assert got.median_income == pytest.approx(cov.median_income, abs=1e-12)
        assert got.n_unique_jobs == cov.n_unique_jobs


def test_aggregate_associative_on_disjoint_sets(toy):
    # grouping does not matter: the pseudo-city row is the element-wise sum
    left = aggregate_cities(toy, ["ann", "ben"], "ab")
    left = aggregate_cities(left, ["ab", "cam"], "all1")
    right = aggregate_cities(toy, ["ben", "cam"], "bc")
    right = aggregate_cities(right, ["ann", "bc"], "all2")
    i = left.cities.index("all1")
    j = right.cities.index("all2")
    assert np.allclose(left.employment[i], right.employment[j], atol=1e-12)


def test_aggregate_singleton(toy):
    combined = aggregate_cities(toy, ["ann"], "solo")
    i = combined.cities.index("solo")
    j = combined.cities.index("ann")
    assert np.array_equal(combined.employment[i], combined.employment[j])


def test_aggregate_disjoint_and_shared(toy):
    combined = aggregate_cities(toy, ["ann", "ben"], "duo")
    i = combined.cities.index("duo")
    occ = {o: k for k, o in enumerate(combined.occupations)}
    assert combined.employment[i, occ["A"]] == 10        # only in ann
    assert combined.employment[i, occ["B"]] == 35        # 30 + 5 shared
    assert combined.employment[i, occ["C"]] == 5         # only in ben


def test_aggregate_order_invariant(toy):
    ab = aggregate_cities(toy, ["ann", "ben"], "x")
    ba = aggregate_cities(toy, ["ben", "ann"], "x")
    assert np.array_equal(ab.employment, ba.employment)


def test_aggregate_unknown_city(toy):
    with pytest.raises(UnknownCity):
        aggregate_cities(toy, ["nowhere"], "x")


def test_select_extreme(toy):
    # sizes: ann 40, ben 10, cam 20
    assert select_extreme_cities(toy, 1) == ["ann"]
    assert select_extreme_cities(toy, 3) == ["ann", "cam", "ben"]
    assert select_extreme_cities(toy, 2, by_size_ascending=True) == ["ben", "cam"]
    with pytest.raises(KOutOfRange):
        select_extreme_cities(toy, 4)


def test_select_extreme_tie_break():
    from util import build_corpus

    corpus = build_corpus(
        employment={"zeta": {"A": 50}, "alpha": {"A": 50}, "mid": {"A": 10}},
        skills={"A": {"s1": 1.0}},
        probs={"A": 0.5},
    )
    assert select_extreme_cities(corpus, 2) == ["alpha", "zeta"]


def test_coverage_bounds(toy):
    cov = toy.coverage["frey_osborne"]
    assert ((cov >= 0) & (cov <= 1)).all()
    assert np.allclose(cov, 1.0)


def test_all_zero_city_dropped_with_diagnostic(tmp_path):
    rows = TOY_EMPLOYMENT_ROWS + [("zed", "Zeroville", "A", 0)]
    corpus = load_toy(tmp_path, employment_rows=rows)
    assert "zed" not in corpus.cities
    assert any("no positive worker counts" in d for d in corpus.diagnostics)


def test_infinite_values_rejected_as_unparseable(tmp_path):
    rows = TOY_EMPLOYMENT_ROWS + [("ben", "Bend", "D", "inf")]
    corpus = load_toy(tmp_path, employment_rows=rows)
    assert corpus.employment[corpus.cities.index("ben"),
                             corpus.occupations.index("D")] == 0
    assert any("unparseable workers" in d for d in corpus.diagnostics)


def test_negative_seed_streams_are_deterministic():
    from urbanimpact.seeding import substream

    a = substream(-7, 3).uniform(size=4)
    b = substream(-7, 3).uniform(size=4)
    assert np.array_equal(a, b)
