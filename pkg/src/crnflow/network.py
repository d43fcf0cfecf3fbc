"""Reaction networks as oriented hypergraphs.

A network couples three layers: species, hypervertices (complexes, i.e.
non-negative integer combinations of species), and reversible edges
between hypervertices. The composition matrix maps hypervertices to
species content, the incidence matrix maps edges to hypervertices
(+1 at the head, -1 at the tail), and their product is the
stoichiometric matrix. Plain graph dynamics is the special case where
every hypervertex is a single species (composition = identity).

Conventions: an edge's head is the reactant side, its tail the product
side, and the state equation is xdot = -stoich @ flux.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import kernel_basis


@dataclass(frozen=True, eq=False)
class ReactionNetwork:
    """Immutable network with precomputed structure matrices.

    Attributes:
        species: species names, length n_species.
        hypervertices: integer composition tuples, length n_hypervertices.
        edges: (head, tail) hypervertex index pairs, length n_edges.
        kplus, kminus: forward/backward rate constants per edge (> 0).
        edge_labels: display names per edge.
        composition: (n_species, n_hypervertices) int matrix.
        incidence: (n_hypervertices, n_edges) int matrix, +1 head / -1 tail.
        stoich: composition @ incidence.
        cons_basis: (n_conserved, n_species) primitive-integer rows spanning
            the left kernel of stoich (conserved quantities).
        cycle_basis: (n_edges, n_cycles) primitive-integer columns spanning
            the kernel of stoich (stoichiometric cycles).
    """

    species: tuple[str, ...]
    hypervertices: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    kplus: np.ndarray
    kminus: np.ndarray
    edge_labels: tuple[str, ...]
    composition: np.ndarray
    incidence: np.ndarray
    stoich: np.ndarray
    cons_basis: np.ndarray
    cycle_basis: np.ndarray

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_hypervertices(self) -> int:
        return len(self.hypervertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_conserved(self) -> int:
        return self.cons_basis.shape[0]

    @property
    def n_cycles(self) -> int:
        return self.cycle_basis.shape[1]

    @property
    def incidence_pos(self) -> np.ndarray:
        """Head part of the incidence matrix (entries max(B, 0))."""
        return np.maximum(self.incidence, 0)

    @property
    def incidence_neg(self) -> np.ndarray:
        """Tail part of the incidence matrix (entries max(-B, 0))."""
        return np.maximum(-self.incidence, 0)

    @property
    def head_compositions(self) -> np.ndarray:
        """(n_species, n_edges) reactant composition per edge."""
        return self.composition @ self.incidence_pos

    @property
    def tail_compositions(self) -> np.ndarray:
        """(n_species, n_edges) product composition per edge."""
        return self.composition @ self.incidence_neg

    @property
    def is_graph(self) -> bool:
        """True when every hypervertex is one unit of one species."""
        n = self.n_species
        return self.n_hypervertices == n and np.array_equal(
            self.composition, np.eye(n, dtype=np.int64)
        )

    def conserved(self, x) -> np.ndarray:
        """Values of the conserved quantities at state x."""
        return self.cons_basis @ np.asarray(x, dtype=float)

    # -- discrete differential operators ------------------------------

    def grad(self, y) -> np.ndarray:
        """Species potential -> edge force: stoich.T @ y."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n_species,):
            raise ValueError(f"expected length-{self.n_species} vector, got {y.shape}")
        return self.stoich.T @ y

    def div(self, j) -> np.ndarray:
        """Edge flux -> species production: stoich @ j (xdot = -div(j))."""
        j = np.asarray(j, dtype=float)
        if j.shape != (self.n_edges,):
            raise ValueError(f"expected length-{self.n_edges} vector, got {j.shape}")
        return self.stoich @ j

    def curl(self, f) -> np.ndarray:
        """Edge force -> cycle affinities: cycle_basis.T @ f."""
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n_edges,):
            raise ValueError(f"expected length-{self.n_edges} vector, got {f.shape}")
        return self.cycle_basis.T @ f

    def curl_adjoint(self, z) -> np.ndarray:
        """Cycle coordinates -> edge flux: cycle_basis @ z."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n_cycles,):
            raise ValueError(f"expected length-{self.n_cycles} vector, got {z.shape}")
        return self.cycle_basis @ z

    def with_rates(self, kplus, kminus) -> "ReactionNetwork":
        """Same topology with new rate constants."""
        kp, km = _check_rates(kplus, kminus, self.n_edges)
        return ReactionNetwork(
            species=self.species,
            hypervertices=self.hypervertices,
            edges=self.edges,
            kplus=kp,
            kminus=km,
            edge_labels=self.edge_labels,
            composition=self.composition,
            incidence=self.incidence,
            stoich=self.stoich,
            cons_basis=self.cons_basis,
            cycle_basis=self.cycle_basis,
        )


def _check_rates(kplus, kminus, n_edges: int) -> tuple[np.ndarray, np.ndarray]:
    kp = np.asarray(kplus, dtype=float).reshape(-1)
    km = np.asarray(kminus, dtype=float).reshape(-1)
    if kp.shape != (n_edges,) or km.shape != (n_edges,):
        raise ValueError(
            f"rate vectors must have length {n_edges}, got {kp.shape} and {km.shape}"
        )
    if not (np.all(kp > 0) and np.all(km > 0) and np.all(np.isfinite(kp)) and np.all(np.isfinite(km))):
        raise ValueError("rate constants must be finite and strictly positive")
    return kp, km


def build_network(
    species,
    hypervertices,
    edges,
    kplus,
    kminus,
    edge_labels=None,
) -> ReactionNetwork:
    """Validate and assemble a ReactionNetwork.

    Args:
        species: sequence of distinct non-empty species names.
        hypervertices: sequence of distinct composition vectors
            (non-negative integers, one entry per species).
        edges: sequence of (head, tail) hypervertex index pairs; the head
            is the reactant complex. Self-loops are rejected.
        kplus, kminus: positive rate constants, one pair per edge.
        edge_labels: optional display names; defaults to r1, r2, ...

    Raises:
        ValueError: on any structural defect (duplicates, bad indices,
            self-loops, non-positive rates, shape mismatches).
    """
    names = tuple(str(s) for s in species)
    if len(names) == 0:
        raise ValueError("at least one species is required")
    if any(not n for n in names):
        raise ValueError("species names must be non-empty")
    if len(set(names)) != len(names):
        raise ValueError("duplicate species names")

    verts: list[tuple[int, ...]] = []
    for idx, comp in enumerate(hypervertices):
        row = tuple(int(c) for c in comp)
        if len(row) != len(names):
            raise ValueError(
                f"hypervertex {idx} has {len(row)} entries, expected {len(names)}"
            )
        if any(c < 0 for c in row):
            raise ValueError(f"hypervertex {idx} has negative stoichiometry")
        verts.append(row)
    if len(set(verts)) != len(verts):
        raise ValueError("duplicate hypervertices (identical compositions)")
    if not verts:
        raise ValueError("at least one hypervertex is required")

    pairs: list[tuple[int, int]] = []
    for idx, (head, tail) in enumerate(edges):
        h, t = int(head), int(tail)
        if not (0 <= h < len(verts) and 0 <= t < len(verts)):
            raise ValueError(f"edge {idx} references an undefined hypervertex")
        if h == t:
            raise ValueError(f"edge {idx} is a self-loop")
        pairs.append((h, t))

    kp, km = _check_rates(kplus, kminus, len(pairs))

    if edge_labels is None:
        labels = tuple(f"r{i + 1}" for i in range(len(pairs)))
    else:
        labels = tuple(str(l) for l in edge_labels)
        if len(labels) != len(pairs):
            raise ValueError("edge_labels length must match number of edges")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate edge labels")

    composition = np.array(verts, dtype=np.int64).T
    incidence = np.zeros((len(verts), len(pairs)), dtype=np.int64)
    for e, (h, t) in enumerate(pairs):
        incidence[h, e] = 1
        incidence[t, e] = -1
    stoich = composition @ incidence

    cons = kernel_basis(stoich.T)
    cycles = kernel_basis(stoich).T

    return ReactionNetwork(
        species=names,
        hypervertices=tuple(verts),
        edges=tuple(pairs),
        kplus=kp,
        kminus=km,
        edge_labels=labels,
        composition=composition,
        incidence=incidence,
        stoich=stoich,
        cons_basis=cons,
        cycle_basis=cycles,
    )


def network_from_reactions(species, reactions, edge_labels=None) -> ReactionNetwork:
    """Build a network from reactant/product composition pairs.

    Args:
        species: species names.
        reactions: sequence of (reactant_counts, product_counts, kf, kr)
            where the count entries are dicts mapping species name to a
            positive integer (empty dict = empty complex).

    Hypervertices are deduplicated in order of first appearance.
    """
    names = [str(s) for s in species]
    index = {s: i for i, s in enumerate(names)}
    verts: list[tuple[int, ...]] = []
    seen: dict[tuple[int, ...], int] = {}

    def vertex_of(counts) -> int:
        comp = [0] * len(names)
        for sp, cnt in counts.items():
            if sp not in index:
                raise ValueError(f"unknown species {sp!r} in reaction")
            comp[index[sp]] += int(cnt)
        key = tuple(comp)
        if key not in seen:
            seen[key] = len(verts)
            verts.append(key)
        return seen[key]

    edges = []
    kps, kms = [], []
    for reac, prod, kf, kr in reactions:
        head = vertex_of(reac)
        tail = vertex_of(prod)
        edges.append((head, tail))
        kps.append(kf)
        kms.append(kr)
    return build_network(names, verts, edges, kps, kms, edge_labels)


def networks_equal(a: ReactionNetwork, b: ReactionNetwork) -> bool:
    """Structural equality: same species, hypervertices, edges, rates, labels."""
    return (
        a.species == b.species
        and a.hypervertices == b.hypervertices
        and a.edges == b.edges
        and a.edge_labels == b.edge_labels
        and np.array_equal(a.kplus, b.kplus)
        and np.array_equal(a.kminus, b.kminus)
    )


def graph_laplacian(net: ReactionNetwork) -> np.ndarray:
    """Rate Laplacian of a graph-type network (xdot = -L @ x).

    Only defined when the composition matrix is the identity; the linear
    dynamics then reads xdot = -L x with
    L = B (diag(kplus) Bpos.T - diag(kminus) Bneg.T).
    """
    if not net.is_graph:
        raise ValueError("graph_laplacian requires a graph-type network (composition = identity)")
    bpos = net.incidence_pos.astype(float)
    bneg = net.incidence_neg.astype(float)
    b = net.incidence.astype(float)
    return b @ (net.kplus[:, None] * bpos.T - net.kminus[:, None] * bneg.T)
