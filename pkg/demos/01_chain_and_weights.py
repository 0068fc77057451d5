"""From a contact graph to the random walk the samplers run on.

The three-node graph below has a -> b with probability 0.2, b -> a with 0.4,
and so on.  The walk runs against the infection direction: from each node it
steps to one of its potential infectors, chosen in proportion to how likely
that infector was to transmit.
"""
import math

from steinercascade import Tree, build_chain, load_graph, target_log_probability, tree_log_weight

g = load_graph("""
a b 0.2
b a 0.4
b c 0.5
c b 0.1
""")
chain = build_chain(g)

print("walk transitions (from, to, weight):")
for u, v, w in chain.edges():
    print(f"  {g.labels[u]} -> {g.labels[v]}  {w:.4f}")

# The infection a -> b -> c, stored with parent links pointing toward the source.
a, b, c = (g.index(x) for x in "abc")
t = Tree(a, {c: b, b: a})
log_p = target_log_probability(g, t)
log_w = tree_log_weight(chain, t)
log_norm = sum(chain.log_norm[u] for u in t.parent)

print(f"\nproduct of edge probabilities     {math.exp(log_p):.4f}")
print(f"walk weight of the tree           {math.exp(log_w):.4f}")
print(f"in-weight of b and c              {math.exp(log_norm):.4f}")
print(f"walk weight x in-weights          {math.exp(log_w + log_norm):.4f}")
print("\nThe last two lines agree: a sampler that draws trees by walk weight only")
print("needs the in-weights of the tree's nodes as a correction factor.")
