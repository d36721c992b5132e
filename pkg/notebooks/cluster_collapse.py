"""
Repairing cluster collapses
===========================

When two clusters of one cover set merge at the next scale, the smaller
one loses its vertex. Alignment puts it back, joined to the merged
cluster and coned over its old neighbours, so that the stages nest.
Here are the two textbook cases built by hand.
"""

from twomapper import ClusterCover, ClusterNode, align, betti, build_two_mapper


def stage(*clusters):
    nodes = [ClusterNode(i, (alpha,), i, frozenset(members)) for i, (alpha, members) in enumerate(clusters)]
    return build_two_mapper(ClusterCover(0.0, nodes))


# Single collapse: clusters 0 and 1 of cover set 0 merge; cluster 2 of
# cover set 1 touches both.
before = stage((0, {0, 1}), (0, {2, 3}), (1, {1, 2, 5}))
after = stage((0, {0, 1, 2, 3, 4}), (1, {1, 2, 5}))
amap, repaired = align(before, after)
print("single collapse")
print("  phi", amap.phi)
print("  unrepaired betti", betti(amap.unrepaired), "repaired betti", betti(repaired))

# Double collapse: a collapse in each of two cover sets, and the two
# vertices that get put back were adjacent.
before = stage((0, {0, 1, 2}), (0, {5, 6}), (1, {0, 1, 3}), (1, {6, 7}))
after = stage((0, {0, 1, 2, 4, 5, 6}), (1, {0, 1, 3, 6, 7, 8}))
amap, repaired = align(before, after)
print("double collapse")
print("  triangles", sorted(repaired.triangles))
print("  unrepaired betti", betti(amap.unrepaired), "repaired betti", betti(repaired))

# The cones from both sides plus the two double-collapse triangles are the
# four faces of a tetrahedron. Components and 1-cycles are preserved, but
# the 2-skeleton now encloses a 2-sphere the unrepaired stage lacks.
