"""Reconstruct a hidden SI cascade on a lattice and score it.

A cascade grows from a random source until it covers a fifth of a 16x16
grid.  Half of the infected nodes are revealed.  We estimate the infection
probability of every other node by sampling Steiner trees, and compare the
ranking with two baselines using average precision.
"""
import numpy as np

from steinercascade.cascade import assign_constant_probs, observe, random_source, simulate_si
from steinercascade.evaluation import average_precision, pagerank_baseline, steiner_predictions
from steinercascade.graph import grid_graph
from steinercascade.inference import ReconConfig, reconstruct

rng = np.random.default_rng(7)
g = assign_constant_probs(grid_graph(16, 16), 0.1)
cascade = simulate_si(g, 0.1, random_source(g, rng), 0.2, rng)
obs = observe(cascade, 0.5, rng)
hidden = cascade.infected - set(obs.infected)
print(f"{len(cascade.infected)} infected, {len(obs.infected)} observed, {len(hidden)} hidden")

for strategy in ("true_root", "min_dist", "pagerank"):
    est = reconstruct(g, obs, ReconConfig(root_strategy=strategy, seed=1), true_root=cascade.source)
    edge_scores = {(u, v): est.edge_prob.get((u, v), 0.0) for u, v, _ in g.edges()}
    print(f"tree sampling, root={strategy:<10} node AP {average_precision(est.node_prob, hidden):.3f}"
          f"   edge AP {average_precision(edge_scores, cascade.edges()):.3f}")

pr = pagerank_baseline(g, obs)
print(f"personalized PageRank              node AP {average_precision(pr, hidden):.3f}")
_, nodes, edges = steiner_predictions(g, obs)
edge_scores = {(u, v): edges.get((u, v), 0.0) for u, v, _ in g.edges()}
print(f"minimum Steiner tree               node AP {average_precision(nodes, hidden):.3f}"
      f"   edge AP {average_precision(edge_scores, cascade.edges()):.3f}")

est = reconstruct(g, obs, ReconConfig(root_strategy="true_root", seed=1), true_root=cascade.source)
print("\ninfection probability map (# observed, digits = estimate x 10, . = 0):")
for i in range(16):
    row = ""
    for j in range(16):
        u = i * 16 + j
        if u in obs.infected:
            row += "#"
        else:
            p = est.node_prob[u]
            row += "." if p == 0 else str(min(9, int(p * 10)))
    print("  " + row)
