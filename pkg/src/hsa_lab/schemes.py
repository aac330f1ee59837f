"""Concrete secure-aggregation codes for three-layer networks.

Two mechanically different families are built here:

* variant "A"  - one independent key symbol per user-relay link, with the
  last user's keys derived so that all masks cancel under the server's
  decoding matrix.  Works on any homogeneous topology, key rates (1, N-1).
* variant "BL" - a single key symbol per user, spread over that user's
  links by a weight matrix whose product with the key generator and the
  decoding matrix vanishes.  Needs a (multiple) cyclic topology, key rates
  (1/n, (t_u+m)/n).

Both families share the input encoding: user i multiplies its length-n
input block by the inverse of the decoding matrix's column block for its
relays, so that plain per-relay sums already carry the aggregate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import gf
from .bounds import RateTuple
from .errors import (
    CauchyDegenerate,
    ConstructionFailed,
    FieldTooSmall,
    InfeasibleParameters,
    InvalidArgument,
    ShapeError,
    SingularMatrix,
)
from .gf import FieldMatrix, PrimeField
from .topology import Topology, build_multiple_cyclic

VARIANT_LINK_KEYS = "A"
VARIANT_WEIGHTED = "BL"

_SCHEME_SCHEMA = "hsa-lab/scheme/1"


@dataclass(frozen=True)
class Scheme:
    """A fully instantiated aggregation code.

    decode_matrix is n x K; encoders[i-1] is the n x n inverse of its
    column block for user i's relays.  key_map sends the seed vector to
    the concatenated link keys (variant A, seeds x N*n) or to the per-user
    scalar keys (variant BL, seeds x N).  key_weights is the N x K link
    weight matrix of variant BL, None for variant A.
    """

    variant: str
    topology: Topology
    field: PrimeField
    decode_matrix: FieldMatrix
    encoders: tuple[FieldMatrix, ...]
    key_map: FieldMatrix
    key_weights: Optional[FieldMatrix] = None
    t_u: Optional[int] = None

    @property
    def seed_count(self) -> int:
        return self.key_map.rows

    @property
    def keys_per_user(self) -> int:
        return self.topology.n if self.variant == VARIANT_LINK_KEYS else 1

    @property
    def links(self) -> list[tuple[int, int]]:
        """All (user, relay) links in user-major order, relays sorted."""
        return [(i, j) for i in range(1, self.topology.N + 1)
                for j in self.topology.user_links[i - 1]]

    def link_index(self, user: int, relay: int) -> int:
        return (user - 1) * self.topology.n + self.link_pos(user, relay)

    def link_pos(self, user: int, relay: int) -> int:
        """Coordinate of `relay` inside user's sorted relay list."""
        return self.topology.user_links[user - 1].index(relay)

    def column_block(self, user: int) -> FieldMatrix:
        """Columns of the decoding matrix indexed by the user's relays."""
        return self.decode_matrix.take_cols([j - 1 for j in self.topology.user_links[user - 1]])

    def link_weight(self, user: int, relay: int) -> int:
        if self.variant != VARIANT_WEIGHTED:
            raise InvalidArgument("link weights exist only for the weighted variant")
        return int(self.key_weights.a[user - 1, relay - 1])

    def to_dict(self) -> dict:
        return {
            "schema": _SCHEME_SCHEMA,
            "variant": self.variant,
            "field_q": self.field.q,
            "topology": self.topology.to_dict(),
            "decode_matrix": self.decode_matrix.tolist(),
            "encoders": [e.tolist() for e in self.encoders],
            "key_map": self.key_map.tolist(),
            "key_weights": None if self.key_weights is None else self.key_weights.tolist(),
            "t_u": self.t_u,
        }

    @staticmethod
    def from_dict(d: dict) -> "Scheme":
        if d.get("schema") != _SCHEME_SCHEMA:
            raise InvalidArgument(f"unsupported scheme schema {d.get('schema')!r}")
        field = PrimeField(int(d["field_q"]))
        top = Topology.from_dict(d["topology"])
        variant = d["variant"]
        if variant not in (VARIANT_LINK_KEYS, VARIANT_WEIGHTED):
            raise InvalidArgument(f"unknown scheme variant {variant!r}")
        weights = d.get("key_weights")
        scheme = Scheme(
            variant=variant,
            topology=top,
            field=field,
            decode_matrix=FieldMatrix(field, d["decode_matrix"]),
            encoders=tuple(FieldMatrix(field, e) for e in d["encoders"]),
            key_map=FieldMatrix(field, d["key_map"]),
            key_weights=None if weights is None else FieldMatrix(field, weights),
            t_u=None if d.get("t_u") is None else int(d["t_u"]),
        )
        scheme._check_shapes()
        return scheme

    def _check_shapes(self):
        top, n = self.topology, self.topology.n
        if (self.decode_matrix.rows, self.decode_matrix.cols) != (n, top.K):
            raise InvalidArgument("decoding matrix shape does not match the topology")
        if len(self.encoders) != top.N or any(
                (e.rows, e.cols) != (n, n) for e in self.encoders):
            raise InvalidArgument("need one n x n encoder per user")
        key_cols = top.N * n if self.variant == VARIANT_LINK_KEYS else top.N
        if self.key_map.cols != key_cols:
            raise InvalidArgument(f"key map must have {key_cols} columns")
        if self.variant == VARIANT_WEIGHTED:
            if self.key_weights is None or \
                    (self.key_weights.rows, self.key_weights.cols) != (top.N, top.K):
                raise InvalidArgument("weighted schemes need an N x K weight matrix")


@dataclass(frozen=True)
class KeyMaterial:
    """Sampled key seeds and the per-user keys derived from them."""

    seeds: FieldMatrix                     # seed_count x width
    per_user: tuple[FieldMatrix, ...]      # n x width (variant A) or 1 x width

    @property
    def width(self) -> int:
        return self.seeds.cols


def _stacked_column_blocks(s: Scheme) -> FieldMatrix:
    """vstack of the transposed decoding-column blocks of all users (N*n x n)."""
    return gf.vstack([s.column_block(i).T for i in range(1, s.topology.N + 1)])


def link_key_constraint_ok(s: Scheme) -> bool:
    """Variant A mask-cancellation certificate.

    The link keys cancel under the decoding matrix for every seed value
    iff key_map composed with the stacked column blocks is identically
    zero.
    """
    if s.variant != VARIANT_LINK_KEYS:
        raise InvalidArgument("the link-key certificate applies to variant A only")
    return (s.key_map @ _stacked_column_blocks(s)).is_zero()


@dataclass(frozen=True)
class WeightedConditions:
    """The three structural conditions of the weighted variant."""

    generator_is_mds: bool       # key generator has every square minor nonsingular
    decoder_is_mds: bool
    support_matches_links: bool  # weight (i, j) nonzero only when j serves i
    masks_cancel: bool           # generator x weights x decoder^T == 0

    @property
    def all_hold(self) -> bool:
        return (self.generator_is_mds and self.decoder_is_mds
                and self.support_matches_links and self.masks_cancel)


def check_weighted_conditions(s: Scheme) -> WeightedConditions:
    if s.variant != VARIANT_WEIGHTED:
        raise InvalidArgument("structural conditions apply to the weighted variant only")
    top = s.topology
    support_ok = True
    for i in range(1, top.N + 1):
        allowed = set(top.user_links[i - 1])
        for j in range(1, top.K + 1):
            if j not in allowed and s.key_weights.a[i - 1, j - 1] != 0:
                support_ok = False
    cancel = (s.key_map @ s.key_weights @ s.decode_matrix.T).is_zero()
    return WeightedConditions(
        generator_is_mds=gf.mds_check(s.key_map),
        decoder_is_mds=gf.mds_check(s.decode_matrix),
        support_matches_links=support_ok,
        masks_cancel=cancel,
    )


def _encoders_from(decode_matrix: FieldMatrix, top: Topology) -> tuple[FieldMatrix, ...]:
    encs = []
    for i in range(1, top.N + 1):
        block = decode_matrix.take_cols([j - 1 for j in top.user_links[i - 1]])
        encs.append(block.inverse())
    return tuple(encs)


def build_scheme_a(top: Topology, field: PrimeField, seed: int = 0,
                   decode_matrix: Optional[FieldMatrix] = None) -> Scheme:
    """Per-link-key scheme on an arbitrary homogeneous topology.

    The decoding matrix defaults to a Vandermonde matrix on K distinct
    evaluation points drawn from a seeded generator (resampled until the
    minor check passes); a caller-supplied matrix is validated instead.
    Users 1..N-1 get independent seed symbols on their links and the last
    user's link keys are the unique values that make all masks cancel.

    Raises:
        FieldTooSmall: if q < K, so no set of K distinct points exists.
        InvalidArgument: if a supplied decoding matrix is unusable.
    """
    n, k, big_n = top.n, top.K, top.N
    if decode_matrix is None:
        if field.q < k:
            raise FieldTooSmall(f"need q >= K = {k} distinct evaluation points, got q = {field.q}")
        rng = np.random.default_rng(seed)
        for _ in range(100):
            points = rng.permutation(field.q)[:k]
            candidate = gf.vandermonde([int(p) for p in points], n, field)
            if gf.mds_check(candidate):
                decode_matrix = candidate
                break
        else:  # pragma: no cover - Vandermonde on distinct points is always MDS
            raise ConstructionFailed("could not sample an MDS decoding matrix", attempts=100)
    else:
        if decode_matrix.field != field:
            raise InvalidArgument("decoding matrix field does not match")
        if (decode_matrix.rows, decode_matrix.cols) != (n, k):
            raise ShapeError(f"decoding matrix must be {n}x{k}")
        if not gf.mds_check(decode_matrix):
            raise InvalidArgument("supplied decoding matrix is not MDS")

    encoders = _encoders_from(decode_matrix, top)

    # Seeds: one per link of users 1..N-1.  The last user's keys are the
    # unique linear functions of those seeds that cancel the masks:
    #   keys_N = -(sum over i<N of keys_i * block_i^T) * (block_N^T)^{-1}
    seeds = (big_n - 1) * n
    key_map = np.zeros((seeds, big_n * n), dtype=np.int64)
    for i in range(1, big_n):
        for p in range(n):
            key_map[(i - 1) * n + p, (i - 1) * n + p] = 1
    blocks = [FieldMatrix(field, decode_matrix.a[:, [j - 1 for j in top.user_links[i - 1]]])
              for i in range(1, big_n + 1)]
    stacked = gf.vstack([b.T for b in blocks[:-1]])           # (N-1)n x n
    last_inv_t = blocks[-1].inverse().T                        # (block_N^T)^{-1}
    key_map[:, (big_n - 1) * n:] = (-(stacked @ last_inv_t)).a % field.q

    scheme = Scheme(
        variant=VARIANT_LINK_KEYS,
        topology=top,
        field=field,
        decode_matrix=decode_matrix,
        encoders=encoders,
        key_map=FieldMatrix(field, key_map),
    )
    if not link_key_constraint_ok(scheme):  # pragma: no cover - construction enforces it
        raise ConstructionFailed("link-key cancellation constraint violated")
    return scheme


def _multiple_cyclic_shape(top: Topology) -> int:
    """Number of cyclic copies if the topology is multiple cyclic, else raise."""
    if top.N % top.K != 0:
        raise InfeasibleParameters("weighted scheme needs N to be a multiple of K")
    copies = top.N // top.K
    if top != build_multiple_cyclic(top.K, top.n, copies):
        raise InfeasibleParameters("weighted scheme needs a (multiple) cyclic topology")
    return copies


def build_scheme_b(top: Topology, field: PrimeField, t_u: int, seed: int = 0,
                   max_attempts: int = 1000) -> Scheme:
    """Minimal-key scheme on a multiple cyclic network (one colluding relay).

    Key generator: a Cauchy matrix over parameters i and c_j * w^p, where w
    is a primitive root of unity of order equal to the number of cyclic
    copies; the column blocks then sum to another Cauchy-shaped matrix.
    The link weights are stacked copies of a circulant whose first row has
    support on the first n relays, and the decoding matrix is solved
    exactly from weights^(-1) applied to a nullspace block of the summed
    generator, then verified to have all minors nonsingular.  Every random
    choice is resampled on failure, up to max_attempts.

    Raises:
        InfeasibleParameters: hypothesis t_u + m <= min(N-1, K-n) violated,
            or the topology is not multiple cyclic.
        FieldTooSmall: q cannot host t_u + m distinct Cauchy parameters.
        NoSuchRoot: the copy count does not divide q - 1.
        ConstructionFailed: resampling budget exhausted.
    """
    copies = _multiple_cyclic_shape(top)
    n, k, m, big_n = top.n, top.K, top.m, top.N
    if t_u < 0:
        raise InvalidArgument("t_u must be nonnegative")
    n_seeds = t_u + m
    if n_seeds > min(big_n - 1, k - n):
        raise InfeasibleParameters(
            f"need t_u + m <= min(N-1, K-n) = {min(big_n - 1, k - n)}, got {n_seeds}")
    if n_seeds >= field.q:
        raise FieldTooSmall(f"need q > t_u + m = {n_seeds} for distinct Cauchy parameters")
    w = gf.root_of_unity(field, copies)
    q = field.q

    rng = np.random.default_rng(seed)
    alphas = list(range(1, n_seeds + 1))
    # candidate c values may not produce a zero denominator in any copy;
    # with several copies 0 would collide with itself across blocks
    forbidden = {(-a * field.inv(pow(w, p, q))) % q
                 for a in alphas for p in range(copies)}
    if copies > 1:
        forbidden.add(0)
    pool = [v for v in range(q) if v not in forbidden]
    if len(pool) < k:
        raise FieldTooSmall(f"only {len(pool)} usable Cauchy parameters over F_{q}, need {k}")
    pool_arr = np.array(pool, dtype=np.int64)
    for attempt in range(1, max_attempts + 1):
        c = [int(v) for v in rng.permutation(pool_arr)[:k]]
        betas = [(c[(j - 1) % k] * pow(w, (j - 1) // k, q)) % q for j in range(1, big_n + 1)]
        try:
            generator = gf.cauchy(alphas, betas, field)
        except CauchyDegenerate:
            continue
        block_sum = FieldMatrix(field, sum(generator.a[:, p * k:(p + 1) * k] for p in range(copies)) % q)
        if not gf.mds_check(block_sum):
            continue

        extra = FieldMatrix(field, rng.integers(0, q, (k - n_seeds, k)))
        try:
            completed_inv = gf.vstack([block_sum, extra]).inverse()
        except SingularMatrix:
            continue
        null_block = completed_inv.take_cols(range(k - n, k))   # K x n, killed by block_sum
        if not gf.mds_check(null_block.T):
            continue

        weights_row = [int(v) for v in rng.integers(1, q, n)] + [0] * (k - n)
        base_weights = gf.circulant(weights_row, field)
        try:
            base_inv = base_weights.inverse()
        except SingularMatrix:
            continue
        decode_matrix = (base_inv @ null_block).T               # weights_1 @ D^T = null_block
        if not gf.mds_check(decode_matrix):
            continue

        key_weights = gf.vstack([base_weights] * copies)        # N x K
        scheme = Scheme(
            variant=VARIANT_WEIGHTED,
            topology=top,
            field=field,
            decode_matrix=decode_matrix,
            encoders=_encoders_from(decode_matrix, top),
            key_map=generator,
            key_weights=key_weights,
            t_u=t_u,
        )
        # the generator is a valid Cauchy matrix, so its minor condition
        # holds by construction; the remaining conditions are asserted
        cancel = (scheme.key_map @ scheme.key_weights @ scheme.decode_matrix.T).is_zero()
        if not cancel:  # pragma: no cover - the nullspace solve enforces it
            continue
        return scheme
    raise ConstructionFailed(
        f"no valid weighted scheme after {max_attempts} attempts", attempts=max_attempts)


def build_scheme_c(n_users: int, field: PrimeField) -> Scheme:
    """Closed-form minimal-key scheme for the two-regular cyclic network.

    For N = K, n = m = 2 and t_u = N - 3 every matrix is explicit: the
    decoding matrix has columns (1, j); the weight matrix is bidiagonal
    with superdiagonal (i - N - 1)/(N - i) and a wrap entry of -1/N, which
    makes every row of weights x decoder^T proportional to (1, N + 1); the
    key generator extends an identity with the column that cancels that
    common direction.  All structural conditions are verified exactly.

    Raises:
        InvalidArgument: if n_users < 3.
        FieldTooSmall: if q < n_users + 2.
    """
    big_n = n_users
    if big_n < 3:
        raise InvalidArgument("the two-regular cyclic construction needs at least 3 users")
    q = field.q
    if q < big_n + 2:
        raise FieldTooSmall(f"need a prime q >= N + 2 = {big_n + 2}, got {q}")

    top = build_multiple_cyclic(big_n, 2, 1)
    decode_matrix = FieldMatrix(field, np.vstack([
        np.ones(big_n, dtype=np.int64),
        np.arange(1, big_n + 1, dtype=np.int64),
    ]))

    lam = [(i - big_n - 1) * field.inv(big_n - i) % q for i in range(1, big_n)]
    # Wrap weight -1/N: the unique value making row N of weights x decoder^T
    # proportional to (1, N+1) like all other rows, so that one generator
    # column cancels everything.
    lam_wrap = field.neg(field.inv(big_n % q))
    weights = np.zeros((big_n, big_n), dtype=np.int64)
    for i in range(1, big_n):
        weights[i - 1, i - 1] = 1
        weights[i - 1, i] = lam[i - 1]
    weights[big_n - 1, big_n - 1] = 1
    weights[big_n - 1, 0] = lam_wrap

    scale = field.neg(field.inv((1 + lam_wrap) % q))
    last_col = np.array([(1 + lam[i - 1]) * scale % q for i in range(1, big_n)],
                        dtype=np.int64)
    generator = np.hstack([np.eye(big_n - 1, dtype=np.int64), last_col.reshape(-1, 1)])

    scheme = Scheme(
        variant=VARIANT_WEIGHTED,
        topology=top,
        field=field,
        decode_matrix=decode_matrix,
        encoders=_encoders_from(decode_matrix, top),
        key_map=FieldMatrix(field, generator),
        key_weights=FieldMatrix(field, weights),
        t_u=big_n - 3,
    )
    conds = check_weighted_conditions(scheme)
    if not conds.all_hold:  # pragma: no cover - holds for every prime q >= N+2
        raise ConstructionFailed(f"structural conditions failed: {conds}")
    return scheme


def derive_user_keys(s: Scheme, seeds: FieldMatrix) -> KeyMaterial:
    """Deterministically derive every user's keys from explicit seed columns."""
    if seeds.rows != s.seed_count:
        raise ShapeError(f"expected {s.seed_count} seed rows, got {seeds.rows}")
    n = s.topology.n
    if s.variant == VARIANT_LINK_KEYS:
        link_vals = s.key_map.T @ seeds                     # N*n x width
        per_user = tuple(
            FieldMatrix(s.field, link_vals.a[(i - 1) * n:i * n, :])
            for i in range(1, s.topology.N + 1))
    else:
        per_user = tuple(
            s.key_map.take_cols([i - 1]).T @ seeds          # 1 x width
            for i in range(1, s.topology.N + 1))
    return KeyMaterial(seeds=seeds, per_user=per_user)


def sample_keys(s: Scheme, width: int = 1, seed: int = 0) -> KeyMaterial:
    """Draw uniform i.i.d. seed symbols and derive all user keys.

    Raises:
        InvalidArgument: if width < 1.
    """
    if width < 1:
        raise InvalidArgument("block width must be at least 1")
    rng = np.random.default_rng(seed)
    seeds = FieldMatrix(s.field, s.field.rand(rng, (s.seed_count, width)))
    return derive_user_keys(s, seeds)


def rates(s: Scheme) -> RateTuple:
    """Rates from structure: per-link loads 1/n, key rates from symbol counts."""
    n = s.topology.n
    return RateTuple(
        r_x=Fraction(1, n),
        r_y=Fraction(1, n),
        r_z=Fraction(s.keys_per_user, n),
        r_zsigma=Fraction(s.seed_count, n),
    )
