"""Instrumented benchmark: leveled scheme against the flat per-level baseline.

Two schemes are compared over the same generated workload:

* ``pmod``          — one access tree per privilege level, one hybrid key
                      chain; a user decrypts once at their level.
* ``cpabe_case1``   — the classic arrangement: level *i* is encrypted under
                      ``T_1 OR ... OR T_i`` so higher-privilege users can
                      open lower levels, and every level is opened separately.

For a workload of N attributes split across k levels (near-equal, remainder
pushed to the last levels: N=10, k=3 gives 3/3/4), the expected exponent
counts are

    keygen   3*|A| + 3                       (per user)
    encrypt  2*sum(|Y_i|) + k   (pmod)       vs  2*sum(|X_i|) + k (baseline),
             where |X_i| = |Y_1| + ... + |Y_i|
    decrypt  2 * chosen-leaves pairings inside the tree, one unblinding
             pairing per ciphertext opened, bounded by 2*|A| per opening.

Every row carries both the measured counters (tolerance: exact) and the
formula predictions, plus an element census of the serialized artifacts.
Wall-clock columns are medians over ``runs`` repetitions and appear only
when timing is requested.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field

from .abe import decrypt_with_stats, encrypt as abe_encrypt, keygen, setup
from .errors import ParameterError
from .group import create_context
from .group.kernel import available_kernels
from .hierarchy import HierarchySpec, LevelPolicy, _unwrap, _wrap, pmod_decrypt, pmod_encrypt
from .keychain import KEY_BYTES, LevelKey
from .partitioner import (
    PartitionPlan,
    canonicalize_csv,
    decrypt_part,
    encrypt_part,
    partition,
    synthetic_csv,
)
from .policy import parse_policy, satisfies
from .rng import SeededRandomSource
from .wire import ElementCounts, element_census

SCHEMES = ("pmod", "cpabe_case1")


# --------------------------------------------------------------------------
# workload generation

def level_sizes(n: int, k: int) -> tuple:
    """Split n attributes across k levels, remainder to the last levels."""
    if k < 1 or n < k:
        raise ParameterError("need n >= k >= 1, got n=%d k=%d" % (n, k))
    base, rem = divmod(n, k)
    return tuple([base] * (k - rem) + [base + 1] * rem)


def level_labels(sizes) -> tuple:
    return tuple(
        tuple("lv%d:a%02d" % (i, j) for j in range(size))
        for i, size in enumerate(sizes, start=1)
    )


def random_policy_text(labels, rng) -> str:
    """A random monotone policy using each label exactly once as a leaf.

    Any such tree is satisfied by the full label set, so the top user of the
    level can always decrypt.
    """

    def build(items):
        if len(items) == 1:
            return items[0], True
        n_groups = 2 + rng.randbelow(min(4, len(items)) - 1)
        cuts, pool = [], list(range(1, len(items)))
        for _ in range(n_groups - 1):
            cuts.append(pool.pop(rng.randbelow(len(pool))))
        cuts = [0] + sorted(cuts) + [len(items)]
        parts = [build(items[a:b]) for a, b in zip(cuts, cuts[1:])]
        kind = rng.randbelow(3)
        if kind == 2:
            t = 1 + rng.randbelow(n_groups)
            return "T(%d; %s)" % (t, ", ".join(p for p, _ in parts)), True
        joiner = " AND " if kind == 0 else " OR "
        text = joiner.join(p if atom else "(%s)" % p for p, atom in parts)
        return text, False

    text, _ = build(list(labels))
    return text


def scenario_policies(k: int, n: int, seed: int):
    """Per-level policy texts plus the level label sets, deterministically."""
    sizes = level_sizes(n, k)
    labels = level_labels(sizes)
    rng = SeededRandomSource(seed)
    texts = tuple(random_policy_text(lv, rng) for lv in labels)
    return texts, labels


def baseline_policy_texts(level_texts) -> tuple:
    """Cumulative trees: level i accepts anyone from levels 1..i."""
    out = []
    for i in range(1, len(level_texts) + 1):
        if i == 1:
            out.append(level_texts[0])
        else:
            out.append(" OR ".join("(%s)" % t for t in level_texts[:i]))
    return tuple(out)


def _record_plan(k: int, rows: int) -> PartitionPlan:
    starts = [round(i * rows / k) for i in range(k + 1)]
    groups = tuple((starts[i], starts[i + 1]) for i in range(k))
    return PartitionPlan("record_clusters", groups)


# --------------------------------------------------------------------------
# scenarios

@dataclass(frozen=True)
class Scenario:
    scheme: str
    k: int
    n: int
    seed: int
    backend: str = "ss1536"
    kernel: str | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ParameterError(
                "scheme must be one of %s, got %r" % ("/".join(SCHEMES), self.scheme)
            )
        level_sizes(self.n, self.k)  # validates the pair


REPORT_FIELDS = (
    "scheme", "k", "n", "seed", "backend", "kernel", "level_sizes",
    "keygen_f_g0", "keygen_f_g0_pred",
    "encrypt_f_g0", "encrypt_f_g0_pred",
    "encrypt_f_g1", "encrypt_f_g1_kem_pred", "encrypt_f_g1_sampling",
    "decrypt_pairings", "decrypt_node_pairings", "decrypt_node_pairings_pred",
    "decrypt_unblind_pairings", "decrypt_pairings_bound", "chosen_leaves",
    "pk_g0", "pk_g1", "mk_g0", "mk_zp",
    "sk_g0", "sk_g0_pred", "ct_g0", "ct_g0_pred", "ct_g1", "ct_g1_pred",
    "keygen_s", "encrypt_s", "decrypt_s",
)


@dataclass
class ScenarioResult:
    scenario: Scenario
    sizes: tuple
    counts: dict = field(default_factory=dict)
    storage: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def row(self) -> dict:
        sc = self.scenario
        out = {
            "scheme": sc.scheme,
            "k": sc.k,
            "n": sc.n,
            "seed": sc.seed,
            "backend": sc.backend,
            "kernel": self.counts.get("kernel", ""),
            "level_sizes": "/".join(str(s) for s in self.sizes),
        }
        for name in REPORT_FIELDS:
            if name in out:
                continue
            if name.endswith("_s"):
                value = self.timings.get(name, "")
                out[name] = "%.6f" % value if value != "" else ""
            else:
                out[name] = self.counts.get(name, self.storage.get(name, ""))
        return out


def _census(blob: bytes) -> ElementCounts:
    return element_census(blob)


def run_scenario(scenario: Scenario, runs: int = 0) -> ScenarioResult:
    """Execute one benchmark scenario and collect counters, censuses and
    (when runs >= 1) median wall times over that many repetitions."""
    ctx = create_context(scenario.backend, kernel=scenario.kernel, fresh=True)
    rng = SeededRandomSource(scenario.seed)
    texts, labels = scenario_policies(scenario.k, scenario.n, scenario.seed)
    sizes = tuple(len(lv) for lv in labels)
    result = ScenarioResult(scenario, sizes)
    result.counts["kernel"] = getattr(getattr(ctx, "kernel", None), "name", "-")

    if scenario.scheme == "pmod":
        user_attrs = labels[0]
        work_texts = texts
    else:
        user_attrs = tuple(l for lv in labels for l in lv)
        work_texts = baseline_policy_texts(texts)
    cum = [sum(sizes[: i + 1]) for i in range(scenario.k)]
    leaf_totals = sum(sizes) if scenario.scheme == "pmod" else sum(cum)

    rows = max(16, 2 * scenario.k)
    file_bytes = canonicalize_csv(synthetic_csv(rows, rng))
    plan = _record_plan(scenario.k, rows)

    # hash-to-group is cached per context and never counted as f_g0; warm it
    # so wall times measure group arithmetic, not label mapping
    for lv in labels:
        for label in lv:
            ctx.hash_to_g0(label)

    pk, mk = setup(ctx, rng)

    before = ctx.counters()
    sk = keygen(mk, user_attrs, rng)
    d = ctx.counters() - before
    result.counts["keygen_f_g0"] = d.f_g0
    result.counts["keygen_f_g0_pred"] = 3 * len(user_attrs) + 3

    before = ctx.counters()
    if scenario.scheme == "pmod":
        spec = HierarchySpec(
            levels=tuple(LevelPolicy(i + 1, t) for i, t in enumerate(work_texts)),
            plan=plan,
        )
        bundle = pmod_encrypt(pk, file_bytes, spec, rng)
        cts = [rec.kem_ct for rec in bundle.records]
    else:
        baseline = _baseline_encrypt(pk, file_bytes, work_texts, plan, rng)
        cts = [ct for ct, _, _ in baseline]
    d = ctx.counters() - before
    result.counts["encrypt_f_g0"] = d.f_g0
    result.counts["encrypt_f_g0_pred"] = 2 * leaf_totals + scenario.k
    result.counts["encrypt_f_g1"] = d.f_g1
    result.counts["encrypt_f_g1_kem_pred"] = 2 * scenario.k
    result.counts["encrypt_f_g1_sampling"] = scenario.k

    # predictions for decryption come from the same deterministic leaf
    # selection the decryptor will make
    attrs = frozenset(user_attrs)
    selections = [satisfies(ct.tree, attrs) for ct in cts]
    if scenario.scheme == "pmod":
        chosen = selections[0].leaf_count
        openings = 1
    else:
        chosen = sum(sel.leaf_count for sel in selections)
        openings = scenario.k

    before = ctx.counters()
    if scenario.scheme == "pmod":
        recovered = pmod_decrypt(bundle, sk).merge(plan)
    else:
        recovered = _baseline_decrypt(baseline, sk, plan)
    d = ctx.counters() - before
    if recovered != file_bytes:
        raise AssertionError("benchmark round-trip failed; results are void")
    result.counts["decrypt_pairings"] = d.pairings
    result.counts["decrypt_node_pairings"] = d.pairings - openings
    result.counts["decrypt_node_pairings_pred"] = 2 * chosen
    result.counts["decrypt_unblind_pairings"] = openings
    result.counts["decrypt_pairings_bound"] = 2 * len(user_attrs) * openings
    result.counts["chosen_leaves"] = chosen

    pk_c = _census(pk.to_bytes())
    mk_c = _census(mk.to_bytes())
    sk_c = _census(sk.to_bytes())
    ct_c = ElementCounts(0, 0, 0)
    for ct in cts:
        ct_c = ct_c + _census(ct.to_bytes())
    result.storage.update({
        "pk_g0": pk_c.g0, "pk_g1": pk_c.g1,
        "mk_g0": mk_c.g0, "mk_zp": mk_c.zp,
        "sk_g0": sk_c.g0, "sk_g0_pred": 2 * len(user_attrs) + 1,
        "ct_g0": ct_c.g0, "ct_g0_pred": 2 * leaf_totals + scenario.k,
        "ct_g1": ct_c.g1, "ct_g1_pred": scenario.k,
    })

    if runs >= 1:
        trees = [parse_policy(t) for t in work_texts]
        spec = (
            HierarchySpec(
                levels=tuple(LevelPolicy(i + 1, t) for i, t in enumerate(work_texts)),
                plan=plan,
            )
            if scenario.scheme == "pmod"
            else None
        )
        kg, en, de = [], [], []
        for _ in range(runs):
            t0 = time.perf_counter()
            sk = keygen(mk, user_attrs, rng)
            kg.append(time.perf_counter() - t0)

            t0 = time.perf_counter()
            if spec is not None:
                bundle = pmod_encrypt(pk, file_bytes, spec, rng)
            else:
                baseline = _baseline_encrypt(pk, file_bytes, work_texts, plan, rng)
            en.append(time.perf_counter() - t0)

            t0 = time.perf_counter()
            if spec is not None:
                recovered = pmod_decrypt(bundle, sk).merge(plan)
            else:
                recovered = _baseline_decrypt(baseline, sk, plan)
            de.append(time.perf_counter() - t0)
            if recovered != file_bytes:
                raise AssertionError("benchmark round-trip failed; results are void")
        result.timings = {
            "keygen_s": statistics.median(kg),
            "encrypt_s": statistics.median(en),
            "decrypt_s": statistics.median(de),
        }
    return result


# --------------------------------------------------------------------------
# the flat baseline

def _baseline_encrypt(pk, file_bytes, texts, plan, rng):
    """Per-level ciphertexts with independent hybrid keys, no chaining.

    Returns [(kem_ct, wrapped_key, sealed_part)] in level order.
    """
    ctx = pk.ctx
    parts = partition(file_bytes, plan)
    out = []
    for i, (text, part) in enumerate(zip(texts, parts), start=1):
        level_key = LevelKey(i, rng.randbytes(KEY_BYTES))
        z = ctx.random_gt(rng)
        kem_ct = abe_encrypt(pk, z, parse_policy(text, level_hint=i), rng)
        wrapped = _wrap(level_key, z, rng)
        out.append((kem_ct, wrapped, encrypt_part(part, level_key, rng)))
    return out


def _baseline_decrypt(baseline, sk, plan) -> bytes:
    """Open every level separately — the work the key chain avoids."""
    parts = {}
    for i, (kem_ct, wrapped, sealed) in enumerate(baseline, start=1):
        z, _ = decrypt_with_stats(kem_ct, sk)
        parts[i] = decrypt_part(sealed, _unwrap(wrapped, z, i))
    from .hierarchy import DecryptionResult

    return DecryptionResult(1, parts).merge(plan)


# --------------------------------------------------------------------------
# reporting

def emit_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def format_table(rows) -> str:
    cols = (
        "scheme", "k", "n", "level_sizes",
        "keygen_f_g0", "encrypt_f_g0", "encrypt_f_g0_pred",
        "decrypt_pairings", "chosen_leaves", "ct_g0", "ct_g1",
        "keygen_s", "encrypt_s", "decrypt_s",
    )
    table = [cols] + [
        tuple(str(row.get(c, "")) for c in cols) for row in rows
    ]
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    lines = []
    for i, r in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def run_matrix(ks, ns, schemes=SCHEMES, seed=1, backend="ss1536",
               kernel=None, runs=0) -> list:
    """Cartesian product of scenarios; returns CSV-ready row dicts."""
    rows = []
    for k in ks:
        for n in ns:
            for scheme in schemes:
                sc = Scenario(scheme, k, n, seed, backend=backend, kernel=kernel)
                rows.append(run_scenario(sc, runs=runs).row())
    return rows


# --------------------------------------------------------------------------
# kernel comparison

def kernel_compare(curve: str = "ss1536", repeats: int = 7, seed: int = 1234) -> list:
    """Median primitive timings for every available arithmetic kernel."""
    rows = []
    for name in sorted(available_kernels()):
        ctx = create_context(curve, kernel=name, fresh=True)
        rng = SeededRandomSource(seed)
        g = ctx.generator()
        h = ctx.hash_to_g0("bench:kernel")
        egg = ctx.pair(g, g)
        scalars = [ctx.random_scalar(rng, nonzero=True) for _ in range(repeats)]
        points = [g ** s for s in scalars]

        def timed(fn, args_list):
            times = []
            for args in args_list:
                t0 = time.perf_counter()
                fn(*args)
                times.append(time.perf_counter() - t0)
            return statistics.median(times)

        samples = {
            "g0_exp": (lambda s: g ** s, [(s,) for s in scalars]),
            "g0_mul": (lambda a: a * h, [(p,) for p in points]),
            "pairing": (lambda a: ctx.pair(a, h), [(p,) for p in points]),
            "gt_exp": (lambda s: egg ** s, [(s,) for s in scalars]),
        }
        for op, (fn, args_list) in samples.items():
            rows.append({
                "kernel": name,
                "op": op,
                "median_us": round(timed(fn, args_list) * 1e6, 2),
            })
    return rows
