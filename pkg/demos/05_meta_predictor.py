"""
Predicting downstream quality from structure alone
==================================================

Evaluate a small, actively chosen share of a GA pool on the anomaly task,
fit a boosted-tree meta-predictor on the structural properties, and use it
to rank the rest of the pool.
"""

import numpy as np

import partition_forge as pf

g, _, labels = pf.planted_anomalies(seed=0)
arc = pf.run_ga(g, pf.FitnessFunction("modularity"),
                pf.GAConfig(population=200, generations=30, archive_cap=2000, seed=0))
pool = pf.Pool.from_records(list(arc), g)
print(f"pool of {len(pool)} partitions")


# the oracle runs the real task; active_fit only calls it on the ids it picks
# plus a fixed holdout used to measure error
calls = []


def oracle(sid):
    calls.append(sid)
    return pf.train_eval_anomaly(g, arc.by_id()[sid].partition, labels).metric("f1", 1)


fit = pf.active_fit(pool, oracle, pf.SampleBudget(max_fraction=0.05), seed=0)
print(f"sampled {len(fit.sampled_ids)} for training, {len(fit.holdout_ids)} for holdout, "
      f"holdout RMSE {fit.rmse_holdout:.4f}")

# rank everything; evaluate the predicted top ten and ten random picks
ranked = pf.rank_solutions(fit.model, pool)
top = [oracle(i) for i in ranked[:10]]
rng = np.random.default_rng(1)
picks = [oracle(int(i)) for i in rng.choice(pool.ids, 10, replace=False)]
print(f"true F1 of predicted top 10: mean {np.mean(top):.3f}; of 10 random picks {np.mean(picks):.3f}")
print(f"oracle calls in total: {len(calls)} of {len(pool)}")

# the model is a plain JSON tree dump
text = fit.model.to_json()
again = pf.MetaModel.from_json(text)
assert np.array_equal(again.predict(pool.features), fit.model.predict(pool.features))
print(f"model JSON: {len(text)} bytes, {len(fit.model.trees)} trees")
