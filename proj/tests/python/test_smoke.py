import math

import numpy as np
import pytest

import nesyvit as nv

ROOMS3 = """target(X,'bedroom') :- bed1(X).
target(X,'bathroom') :- not water_cooler1_tray1_refrigerator1_range1(X).
target(X,'kitchen') :- refrigerator2(X).
"""


def test_losses_match_hand_values():
    cfg = nv.LossConfig()
    cfg.tau = 1.0
    acts = nv.ActivationBatch(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), [0, 0, 1])
    assert nv.supcon_loss(acts, cfg) == pytest.approx(0.208841, abs=1e-5)
    half = nv.ActivationBatch(np.full((2, 2), 0.5), [0, 1])
    assert nv.entropy_loss(half) == pytest.approx(math.log(2), abs=1e-5)
    assert nv.l1_loss(nv.ActivationBatch(np.array([[0.2, 0.4]]), [0])) == pytest.approx(0.3)


def test_rules_round_trip_and_classify():
    rs = nv.parse_rules(ROOMS3)
    assert nv.stats(rs).as_tuple() == (3, 3, 3)
    assert nv.parse_rules(nv.serialize(rs)) == rs
    p = nv.classify(rs, [1, 0, 0])
    assert rs.class_names[p.cls] == "bedroom" and p.fired_rule == 0
    assert nv.classify(rs, [0, 1, 0]).abstained
    assert "prediction: bathroom" in nv.justify(rs, [0, 0, 0])
    with pytest.raises(ValueError):
        nv.classify(rs, [1, 0])
    with pytest.raises(ValueError):
        nv.parse_rules("target(X,'a') :- n0(X)")


def test_learn_from_table():
    table = nv.read_table("label,n0,n1\na,1,0\na,1,0\na,1,0\nb,0,1\nb,0,1\nb,0,1\n")
    rs = nv.learn(table)
    assert len(rs) == 2
    assert nv.evaluate(rs, table).accuracy == 1.0
    assert table.bits.shape == (6, 2)


def test_small_pipeline_is_deterministic():
    sc = nv.SynthConfig()
    sc.per_class = 30
    data = nv.generate(sc)
    assert data.features.shape == (120, 32)
    cfg = nv.PipelineConfig()
    cfg.train.concepts = 8
    cfg.train.epochs = 3
    cfg.train.learning_rate = 5e-4
    a = nv.run_pipeline(data, cfg)
    b = nv.run_pipeline(data, cfg)
    assert a.report() == b.report()
    assert 0.0 <= a.test_eval.accuracy <= 1.0
    layer = a.layer
    table = nv.binarize(nv.forward(layer, data), data.class_names)
    assert len(table) == 120


def test_embedding_text_round_trip():
    d = nv.EmbeddingDataset(np.array([[0.1, -2.0], [3.5, 1e-9]]), [1, 0], ["x", "y"])
    back = nv.read_embeddings(nv.write_embeddings(d))
    assert np.array_equal(back.features, d.features)
    assert back.labels == [1, 0]
