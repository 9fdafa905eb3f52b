"""
Measuring community structure
=============================

Build a small planted graph, score a few partitions and look at the
eleven structural properties each one produces.
"""

import partition_forge as pf

# four blocks of 25 nodes, dense inside and sparse across
g, truth = pf.planted_partition(4, 25, 0.3, 0.01, seed=1)
print(g)

# the planted blocks, everything in one community, and a random 8-way split
candidates = {
    "planted": truth,
    "single": pf.single_community(g),
    "random k=8": pf.random_partition(g, k_min=8, k_max=8, seed=0),
}

for name, p in candidates.items():
    pv = pf.property_vector(g, p)
    print(f"{name:>11}: Q={pv.modularity:+.3f} k={pv.num_communities:3d} "
          f"density={pv.avg_density:.3f} conductance={pv.avg_conductance:.3f}")

# per-community detail for the planted blocks
stats = pf.community_stats(g, truth)
print("\nsize  internal  cut  density  conductance")
for c in range(truth.k):
    print(f"{stats.size[c]:4d}  {stats.internal_edges[c]:8.0f}  {stats.cut_size[c]:3.0f}"
          f"  {stats.density[c]:7.3f}  {stats.conductance[c]:11.3f}")

# the full property vector is the feature row used later by the meta-predictor
print(dict(zip(pf.PROPERTY_NAMES, pf.property_vector(g, truth).to_array().round(3).tolist())))
