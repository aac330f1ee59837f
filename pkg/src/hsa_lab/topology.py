"""Homogeneous three-layer user/relay/server networks.

A topology has N users, K relays and one server.  Every user feeds exactly
n relays and every relay serves exactly m users, so N*n = K*m.  Ids are
1-based; per-user relay sets are kept sorted ascending, which fixes the
coordinate order of every length-n vector indexed by them.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import InvalidArgument, InvalidTopology


def _wrap(a: int, k: int) -> int:
    """Map a onto [1..k] (the residue k is used instead of 0)."""
    r = a % k
    return r if r != 0 else k


@dataclass(frozen=True)
class Topology:
    n_users: int
    n_relays: int
    relays_per_user: int
    users_per_relay: int
    user_links: tuple[tuple[int, ...], ...]  # sorted relay ids per user
    relay_links: tuple[tuple[int, ...], ...]  # sorted user ids per relay

    @property
    def N(self) -> int:
        return self.n_users

    @property
    def K(self) -> int:
        return self.n_relays

    @property
    def n(self) -> int:
        return self.relays_per_user

    @property
    def m(self) -> int:
        return self.users_per_relay

    def to_dict(self) -> dict:
        return {
            "N": self.n_users,
            "K": self.n_relays,
            "n": self.relays_per_user,
            "user_links": [list(h) for h in self.user_links],
        }

    @staticmethod
    def from_dict(d: dict) -> "Topology":
        return build_explicit(int(d["N"]), int(d["K"]), d["user_links"])


def build_explicit(n_users: int, n_relays: int, user_links: Sequence[Sequence[int]]) -> Topology:
    """Validate an explicit user-relay association and derive the relay side.

    Raises:
        InvalidTopology: on degree violations, duplicate links, N*n != K*m,
            or a user degree reaching the relay count.
    """
    if n_users < 1 or n_relays < 1:
        raise InvalidTopology("need at least one user and one relay")
    if len(user_links) != n_users:
        raise InvalidTopology(f"expected {n_users} adjacency lists, got {len(user_links)}")

    links: list[tuple[int, ...]] = []
    for i, h in enumerate(user_links, start=1):
        h = tuple(sorted(int(j) for j in h))
        if len(set(h)) != len(h):
            raise InvalidTopology(f"user {i} lists a relay twice")
        if any(j < 1 or j > n_relays for j in h):
            raise InvalidTopology(f"user {i} links outside [1..{n_relays}]")
        links.append(h)

    degree = len(links[0])
    if any(len(h) != degree for h in links):
        raise InvalidTopology("user degrees are not homogeneous")
    if degree >= n_relays:
        raise InvalidTopology(f"user degree {degree} must be below the relay count {n_relays}")

    relay_links: list[list[int]] = [[] for _ in range(n_relays)]
    for i, h in enumerate(links, start=1):
        for j in h:
            relay_links[j - 1].append(i)
    relay_degrees = {len(u) for u in relay_links}
    if len(relay_degrees) != 1:
        raise InvalidTopology(f"relay degrees are not homogeneous: {sorted(relay_degrees)}")
    m = relay_degrees.pop()
    if n_users * degree != n_relays * m:
        raise InvalidTopology("link count mismatch between the two layers")

    return Topology(
        n_users=n_users,
        n_relays=n_relays,
        relays_per_user=degree,
        users_per_relay=m,
        user_links=tuple(links),
        relay_links=tuple(tuple(u) for u in relay_links),
    )


def build_cyclic(n_relays: int, relays_per_user: int) -> Topology:
    """Cyclic wrap-around network: N = K and user i feeds relays i..i+n-1."""
    k, n = n_relays, relays_per_user
    if n >= k:
        raise InvalidTopology(f"user degree {n} must be below the relay count {k}")
    links = [[_wrap(i + s, k) for s in range(n)] for i in range(1, k + 1)]
    return build_explicit(k, k, links)


def build_multiple_cyclic(n_relays: int, relays_per_user: int, copies: int) -> Topology:
    """Stack of `copies` cyclic layers on the same relays: N = copies * K.

    User p*K + i (p >= 0) has the same relay set as user i of the single
    cyclic network, so every relay serves copies * n users.
    """
    if copies < 1:
        raise InvalidTopology("need at least one cyclic copy")
    base = build_cyclic(n_relays, relays_per_user)
    links = [list(base.user_links[i]) for _ in range(copies) for i in range(n_relays)]
    return build_explicit(copies * n_relays, n_relays, links)


def build_tree(n_relays: int, users_per_relay: int) -> Topology:
    """Tree network: each of the K relays owns its own block of V users (n = 1)."""
    if n_relays < 2:
        raise InvalidTopology("a tree needs at least two relays so that n < K")
    links = [[j] for j in range(1, n_relays + 1) for _ in range(users_per_relay)]
    return build_explicit(n_relays * users_per_relay, n_relays, links)


def collusion_threshold(top: Topology, t_h: int) -> int:
    """Minimum user count covering some set of K - t_h - n + 1 relays.

    This is the user-collusion feasibility boundary: a scheme at per-link
    load 1/n tolerates t_u colluding users iff t_u stays strictly below this
    value.  Exhaustive over all relay subsets of the required size, with an
    early exit once the union cannot shrink further.

    Raises:
        InvalidArgument: unless 0 < t_h <= K - n.
    """
    if not 0 < t_h <= top.K - top.n:
        raise InvalidArgument(f"t_h={t_h} outside (0, K-n] = (0, {top.K - top.n}]")
    size = top.K - t_h - top.n + 1
    best = top.N + 1
    for subset in combinations(range(top.K), size):
        union: set[int] = set()
        for j in subset:
            union.update(top.relay_links[j])
        if len(union) < best:
            best = len(union)
            if best == top.m:  # one relay already contributes m users
                break
    return best


def min_cut(top: Topology) -> int:
    """Smallest edge cut separating some user from the server.

    For a homogeneous topology this equals n: the n outgoing edges of any
    user form a cut, and the n edge-disjoint two-hop paths from that user
    to the server rule out anything smaller.
    """
    return top.n
