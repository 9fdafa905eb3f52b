"""
Growing a pool of partitions with the genetic algorithm
=======================================================

Run the GA under two different fitness functions and compare the
archives it leaves behind.
"""

import numpy as np

import partition_forge as pf

g, truth = pf.planted_partition(4, 25, 0.3, 0.01, seed=2)
cfg = dict(population=200, generations=30, seed=0)


def show(gen, best):
    if gen % 10 == 0:
        print(f"  generation {gen:3d}  best {best:.4f}")


archives = {}
for tag in ("modularity", "density"):
    print(f"fitness = {tag}")
    archives[tag] = pf.run_ga(g, pf.FitnessFunction(tag), pf.GAConfig(**cfg), progress=show)

# the archive keeps every evaluated solution, not just the survivors
for tag, arc in archives.items():
    q = np.array([pf.modularity(g, r.partition) for r in arc])
    k = np.array([r.partition.k for r in arc])
    print(f"{tag:>10} archive: {len(arc)} solutions, median Q {np.median(q):.3f}, "
          f"best Q {q.max():.3f}, k from {k.min()} to {k.max()}")

best = archives["modularity"].best()
print(f"best modularity solution: Q={best.fitness:.4f}, k={best.partition.k}, "
      f"NMI vs planted {pf.nmi(best.partition, truth):.3f} (planted Q {pf.modularity(g, truth):.4f})")
