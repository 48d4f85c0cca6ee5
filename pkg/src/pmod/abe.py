"""Ciphertext-policy ABE as a key-encapsulation mechanism.

setup() fixes the system keys; keygen() binds a private key to an attribute
set, blinded by per-key randomness r so distinct keys cannot be combined;
encrypt() shares a fresh secret s down an access tree via per-gate
polynomials and encapsulates a target-group element; decrypt() reconstructs
e(g,g)^{r·s} from the cheapest satisfying selection with two pairings per
chosen leaf, then unblinds.

Random draws occur in a documented order so scripted sources can pin whole
traces:  setup draws alpha then beta (beta resampled while zero); keygen
draws r, then one blinding scalar per attribute in sorted order; encrypt
draws s, then share-polynomial coefficients in tree preorder (each gate
contributes threshold-1 draws, leaves none).

All four functions treat the payload as an opaque target-group element;
byte-level key wrapping lives one layer up, in the hierarchy module.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import (
    BackendMismatch,
    ParameterError,
    PolicyNotSatisfied,
    SerializationError,
)
from .group import context_from_descriptor
from .group.base import G0Element, G1Element, PairingContext
from .policy import (
    AccessTree,
    SatisfyingSet,
    _check_attribute,
    satisfies,
    tree_from_json,
    tree_to_json,
)
from .rng import default_source
from .wire import (
    MAGIC_CIPHERTEXT,
    MAGIC_MASTER_KEY,
    MAGIC_PRIVATE_KEY,
    MAGIC_PUBLIC_KEY,
    Reader,
    Writer,
)


@dataclass(frozen=True)
class PublicKey:
    """System parameters: B = g^beta and e(g,g)^alpha (g comes with the
    group context)."""

    B: G0Element
    egg_alpha: G1Element

    def __post_init__(self):
        if self.B.is_identity() or self.egg_alpha.is_identity():
            raise ParameterError("degenerate public key")

    @property
    def ctx(self) -> PairingContext:
        return self.B.ctx

    def to_bytes(self) -> bytes:
        w = Writer(MAGIC_PUBLIC_KEY)
        w.put_descriptor(self.ctx, as_g0_slot=True)
        w.put_g0(self.ctx.generator())
        w.put_g0(self.B)
        w.put_g1(self.egg_alpha)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, ctx: PairingContext | None = None) -> "PublicKey":
        r = Reader(data, MAGIC_PUBLIC_KEY)
        ctx = context_from_descriptor(r.descriptor(as_g0_slot=True), ctx)
        g = r.g0(ctx)
        if g != ctx.generator():
            raise SerializationError("serialized generator does not match the group")
        B = r.g0(ctx)
        egg_alpha = r.g1(ctx)
        r.expect_end()
        return cls(B, egg_alpha)


@dataclass(frozen=True)
class MasterKey:
    beta: int
    g_alpha: G0Element

    def __post_init__(self):
        if not 0 < self.beta < self.ctx.order:
            raise ParameterError("beta must be a nonzero residue")

    @property
    def ctx(self) -> PairingContext:
        return self.g_alpha.ctx

    def to_bytes(self) -> bytes:
        w = Writer(MAGIC_MASTER_KEY)
        w.put_descriptor(self.ctx)
        w.put_scalar(self.beta)
        w.put_g0(self.g_alpha)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, ctx: PairingContext | None = None) -> "MasterKey":
        r = Reader(data, MAGIC_MASTER_KEY)
        ctx = context_from_descriptor(r.descriptor(), ctx)
        beta = r.scalar()
        g_alpha = r.g0(ctx)
        r.expect_end()
        return cls(beta, g_alpha)


@dataclass(frozen=True)
class PrivateKey:
    """D = g^{(alpha+r)/beta} plus one (D_u, D'_u) pair per attribute, all
    sharing the blinding r.  components is sorted by attribute label."""

    D: G0Element
    components: tuple  # ((attribute, D_u, D_prime_u), ...)

    def __post_init__(self):
        labels = [c[0] for c in self.components]
        if not labels:
            raise ParameterError("private key needs at least one attribute")
        if labels != sorted(set(labels)):
            raise ParameterError("components must be sorted and unique by attribute")

    @property
    def ctx(self) -> PairingContext:
        return self.D.ctx

    @cached_property
    def attribute_set(self) -> frozenset:
        return frozenset(c[0] for c in self.components)

    @cached_property
    def _by_attribute(self) -> dict:
        return {c[0]: (c[1], c[2]) for c in self.components}

    def component(self, attribute: str):
        return self._by_attribute.get(attribute)

    def to_bytes(self) -> bytes:
        w = Writer(MAGIC_PRIVATE_KEY)
        w.put_descriptor(self.ctx)
        w.put_json([c[0] for c in self.components])
        w.put_g0(self.D)
        for _, d_u, d_prime_u in self.components:
            w.put_g0(d_u)
            w.put_g0(d_prime_u)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, ctx: PairingContext | None = None) -> "PrivateKey":
        r = Reader(data, MAGIC_PRIVATE_KEY)
        ctx = context_from_descriptor(r.descriptor(), ctx)
        labels = r.json_blob()
        if not isinstance(labels, list) or not all(isinstance(a, str) for a in labels):
            raise SerializationError("malformed attribute list")
        D = r.g0(ctx)
        components = tuple((a, r.g0(ctx), r.g0(ctx)) for a in labels)
        r.expect_end()
        try:
            return cls(D, components)
        except ParameterError as exc:
            raise SerializationError(str(exc)) from None


@dataclass(frozen=True)
class AbeCiphertext:
    """Encapsulation of a target-group element under an access tree:
    C~ = m * e(g,g)^{alpha s}, C = B^s, and per leaf x the pair
    (C_x = g^{q_x(0)}, C'_x = h(att(x))^{q_x(0)})."""

    tree: AccessTree
    c_tilde: G1Element
    c: G0Element
    leaf_components: tuple  # ((leaf node id, C_x, C_prime_x), ...) in preorder

    def __post_init__(self):
        want = [leaf.node_id for leaf in self.tree.leaves]
        have = [lc[0] for lc in self.leaf_components]
        if want != have:
            raise ParameterError(
                "leaf components must cover the tree's leaves exactly in preorder"
            )

    @property
    def ctx(self) -> PairingContext:
        return self.c.ctx

    @cached_property
    def _by_leaf(self) -> dict:
        return {lc[0]: (lc[1], lc[2]) for lc in self.leaf_components}

    def leaf_component(self, node_id: int):
        return self._by_leaf[node_id]

    def to_bytes(self) -> bytes:
        w = Writer(MAGIC_CIPHERTEXT)
        w.put_descriptor(self.ctx)
        w.put_json(tree_to_json(self.tree))
        w.put_g1(self.c_tilde)
        w.put_g0(self.c)
        for _, c_x, c_prime_x in self.leaf_components:
            w.put_g0(c_x)
            w.put_g0(c_prime_x)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, ctx: PairingContext | None = None) -> "AbeCiphertext":
        r = Reader(data, MAGIC_CIPHERTEXT)
        ctx = context_from_descriptor(r.descriptor(), ctx)
        tree = tree_from_json(r.json_blob())
        c_tilde = r.g1(ctx)
        c = r.g0(ctx)
        components = tuple(
            (leaf.node_id, r.g0(ctx), r.g0(ctx)) for leaf in tree.leaves
        )
        r.expect_end()
        try:
            return cls(tree, c_tilde, c, components)
        except ParameterError as exc:
            raise SerializationError(str(exc)) from None


# --------------------------------------------------------------------------
# scheme functions

def setup(ctx: PairingContext, rng=None) -> tuple[PublicKey, MasterKey]:
    """Draw alpha, beta and publish (B, e(g,g)^alpha); keep (beta, g^alpha)."""
    rng = rng if rng is not None else default_source()
    alpha = ctx.random_scalar(rng)
    beta = ctx.random_scalar(rng, nonzero=True)
    g = ctx.generator()
    B = g ** beta
    g_alpha = g ** alpha
    egg_alpha = ctx.pair(g, g_alpha)
    return PublicKey(B, egg_alpha), MasterKey(beta, g_alpha)


def keygen(mk: MasterKey, attrs, rng=None) -> PrivateKey:
    rng = rng if rng is not None else default_source()
    attrs = frozenset(attrs)
    if not attrs:
        raise ParameterError("attribute set must be non-empty")
    for label in attrs:
        _check_attribute(label)
    ctx = mk.ctx
    g = ctx.generator()
    r = ctx.random_scalar(rng)
    g_r = g ** r
    inv_beta = pow(mk.beta, -1, ctx.order)
    D = (mk.g_alpha * g_r) ** inv_beta
    components = []
    for label in sorted(attrs):
        r_u = ctx.random_scalar(rng)
        components.append((label, g_r * ctx.hash_to_g0(label) ** r_u, g ** r_u))
    return PrivateKey(D, tuple(components))


@dataclass(frozen=True)
class SharePlan:
    """Per-node polynomials over Z_p from the top-down secret sharing: the
    root's constant term is s, each child's constant term is its parent's
    polynomial at the child's 1-based index."""

    order: int
    coefficients: tuple  # ((node_id, (c0, c1, ..., c_{k-1})), ...) preorder

    @cached_property
    def _polys(self) -> dict:
        return dict(self.coefficients)

    def poly(self, node_id: int) -> tuple:
        return self._polys[node_id]

    def share(self, node_id: int) -> int:
        return self._polys[node_id][0]

    def evaluate(self, node_id: int, x: int) -> int:
        acc = 0
        for c in reversed(self._polys[node_id]):
            acc = (acc * x + c) % self.order
        return acc


def share_secret(tree: AccessTree, s: int, order: int, rng=None) -> SharePlan:
    rng = rng if rng is not None else default_source()
    out = []

    def fill(node, constant):
        coeffs = [constant % order]
        for _ in range(node.threshold - 1):
            coeffs.append(rng.randbelow(order))
        out.append((node.node_id, tuple(coeffs)))
        for position, child in enumerate(node.children, start=1):
            value = 0
            for c in reversed(coeffs):
                value = (value * position + c) % order
            fill(child, value)

    fill(tree.root, s)
    return SharePlan(order, tuple(out))


def encrypt(pk: PublicKey, m: G1Element, tree: AccessTree, rng=None) -> AbeCiphertext:
    rng = rng if rng is not None else default_source()
    ctx = pk.ctx
    if not isinstance(m, G1Element) or m.ctx is not ctx:
        raise BackendMismatch("message must be a target-group element of the same context")
    s = ctx.random_scalar(rng)
    plan = share_secret(tree, s, ctx.order, rng)
    c_tilde = m * (pk.egg_alpha ** s)
    c = pk.B ** s
    g = ctx.generator()
    components = []
    for leaf in tree.leaves:
        q0 = plan.share(leaf.node_id)
        components.append(
            (leaf.node_id, g ** q0, ctx.hash_to_g0(leaf.attribute) ** q0)
        )
    return AbeCiphertext(tree, c_tilde, c, tuple(components))


def lagrange_coefficient(a: int, index_set, x: int, order: int) -> int:
    """Interpolation weight for point a within index_set, evaluated at x."""
    indices = [int(i) % order for i in index_set]
    if len(set(indices)) != len(indices):
        raise ParameterError("interpolation indices must be distinct mod the order")
    a = int(a) % order
    if a not in indices:
        raise ParameterError("point %d is not in the index set" % a)
    num = den = 1
    for k in indices:
        if k == a:
            continue
        num = num * ((x - k) % order) % order
        den = den * ((a - k) % order) % order
    return num * pow(den, -1, order) % order


def decrypt_node(
    ct: AbeCiphertext, sk: PrivateKey, node, selection: SatisfyingSet
):
    """e(g,g)^{r·q_x(0)} for a chosen node, None for an unchosen one.

    Leaves cost two pairings; a gate Lagrange-combines exactly its selected
    children, so unselected branches are never walked.
    """
    ctx = ct.ctx
    if node.is_leaf:
        if node.node_id not in selection.chosen_leaves:
            return None
        component = sk.component(node.attribute)
        if component is None:
            return None
        d_u, d_prime_u = component
        c_x, c_prime_x = ct.leaf_component(node.node_id)
        return ctx.pair(d_u, c_x) / ctx.pair(d_prime_u, c_prime_x)
    if node.node_id not in selection.chosen_interior:
        return None
    indices = selection.selected_children(node.node_id)
    combined = None
    for position in indices:
        child_value = decrypt_node(ct, sk, node.children[position - 1], selection)
        if child_value is None:
            return None
        term = child_value ** lagrange_coefficient(position, indices, 0, ctx.order)
        combined = term if combined is None else combined * term
    return combined


def decrypt(ct: AbeCiphertext, sk: PrivateKey) -> G1Element:
    return decrypt_with_stats(ct, sk)[0]


def decrypt_with_stats(ct: AbeCiphertext, sk: PrivateKey):
    """Decrypt and report the work done, phase by phase.

    Returns (m, stats) where stats carries the chosen-leaf count, the
    pairings spent inside the node recursion (always two per chosen leaf),
    and the single unblinding pairing e(C, D) — callers comparing against
    cost formulas need the split.  Counter deltas assume no concurrent use
    of the same context.
    """
    if ct.ctx is not sk.ctx:
        raise BackendMismatch("ciphertext and key belong to different contexts")
    ctx = ct.ctx
    selection = satisfies(ct.tree, sk.attribute_set)
    if selection is None:
        raise PolicyNotSatisfied("attribute set does not satisfy the access tree")
    before = ctx.counters()
    r_value = decrypt_node(ct, sk, ct.tree.root, selection)
    mid = ctx.counters()
    blinded = ctx.pair(ct.c, sk.D) / r_value
    m = ct.c_tilde / blinded
    after = ctx.counters()
    stats = {
        "chosen_leaves": selection.leaf_count,
        "node_pairings": (mid - before).pairings,
        "unblind_pairings": (after - mid).pairings,
        "f_g1": (after - before).f_g1,
        "interior_nodes": len(selection.chosen_interior),
    }
    return m, stats
