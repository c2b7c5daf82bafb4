"""Quick end-to-end check of the pywhitehead extension module."""

import json

import pywhitehead as wh


def main():
    w = wh.CyclicWord("abab")
    assert len(w) == 4 and w.rank == 2
    m, steps = w.minimize()
    assert len(m) == 2 and steps, (m, steps)
    assert wh.CyclicWord("baba") == w
    assert wh.is_minimal("abAB")
    assert wh.minimize("aabAbb")[0]
    assert wh.feature_names("fstar") == ["Ab", "Ba"]
    assert w.features("fstar") == [0.0, 0.0]
    assert set(w.reducing_moves()) <= {"a->ab", "a->Ba", "b->ba", "b->Ab"}

    train = wh.Dataset.generate("D", 150, per_len=6, seed=1)
    test = wh.Dataset.generate("Se", 150, per_len=6, seed=2)
    assert len(train) == 900
    assert set(train.labels()) == {"min", "nonmin"}
    assert wh.Dataset.from_tsv(train.to_tsv()).words() == train.words()

    model = wh.Pipeline.train(train, features="f6", model="regression")
    report = model.evaluate(test)
    print("accuracy by stratum:", report["accuracy"])
    assert report["accuracy"][0] > 0.8
    again = wh.Pipeline.from_json(model.to_json())
    for word in test.words()[:50]:
        assert again.classify(word) == model.classify(word)

    summary, centers = wh.cluster(train.filter("nonmin"), k=4, init="estimated", seed=3)
    print("cluster R_max avg:", round(summary["avg_r_max"], 3), summary["best_moves"])
    assert len(json.loads(centers)["centers"]) == 4
    assert wh.predict_reducer("aabAbb", centers) in {"a->ab", "a->Ba", "b->ba", "b->Ab"}

    try:
        wh.CyclicWord("ab!")
    except ValueError:
        pass
    else:
        raise AssertionError("bad character accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
