"""Command-line front end.

Exit codes: 0 success, 1 cryptographic/policy failure (unsatisfied trees,
integrity failures, bad passphrases, backend mismatches), 2 usage errors.
Errors go to stderr — as JSON objects under --json, otherwise as a single
``pmod: error: <kind>: <message>`` line.

Secrets discipline: private keys and tokens are written only to files
created with mode 0600 and never to stdout.  --seed makes all randomness
reproducible and is therefore refused on production backends unless
--insecure-seed states the intent explicitly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from .errors import PmodError
from .rng import SeededRandomSource

PASSPHRASE_ENV = "PMOD_PASSPHRASE"
BACKENDS = ("transparent", "ss512", "ss1536")


class UsageError(Exception):
    """Bad flag combinations and other command-line misuse (exit 2)."""


def _write_secret(path: str, data: bytes) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    try:
        os.write(fd, data)
    finally:
        os.close(fd)


def _read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _passphrase(args) -> str:
    path = getattr(args, "passphrase_file", None)
    if path:
        with open(path) as fh:
            return fh.read().strip()
    value = os.environ.get(PASSPHRASE_ENV)
    if value is None:
        raise UsageError(
            "no passphrase: give --passphrase-file or set $%s" % PASSPHRASE_ENV
        )
    return value


def _rng(args, backend: str):
    seed = getattr(args, "seed", None)
    if seed is None:
        return None
    if backend != "transparent" and not getattr(args, "insecure_seed", False):
        raise UsageError(
            "--seed with backend %r gives reproducible keys; add "
            "--insecure-seed if that is really what you want" % backend
        )
    return SeededRandomSource(seed)


def _int_list(text: str, flag: str) -> tuple:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError("%s wants comma-separated integers, got %r" % (flag, text))
    if not values:
        raise UsageError("%s wants at least one value" % flag)
    return values


# --------------------------------------------------------------------------
# commands

def cmd_setup(args):
    from .services import Issuer

    rng = _rng(args, args.backend)
    issuer = Issuer.initialize(
        args.state,
        _passphrase(args),
        backend=args.backend,
        p=args.modulus,
        token=args.token,
        rng=rng,
    )
    pk_raw = issuer.get_public_params().to_bytes()
    return {
        "state": args.state,
        "backend": args.backend,
        "public_key_file": os.path.join(args.state, "issuer.pub"),
        "token_file": os.path.join(args.state, "issuer.token"),
        "public_key_sha256": hashlib.sha256(pk_raw).hexdigest(),
    }


def cmd_keygen(args):
    from .services import Issuer

    issuer = Issuer.open(args.state, _passphrase(args))
    backend = issuer.get_public_params().ctx.backend_id
    rng = _rng(args, backend)
    attrs = [a.strip() for a in args.attrs.split(",") if a.strip()]
    sk = issuer.issue_key(args.user, attrs, rng)
    raw = sk.to_bytes()
    _write_secret(args.out, raw)
    return {
        "user": args.user,
        "attributes": sorted(sk.attribute_set),
        "fingerprint": hashlib.sha256(raw).hexdigest()[:16],
        "out": args.out,
    }


def cmd_encrypt(args):
    from .abe import PublicKey
    from .hierarchy import HierarchySpec, pmod_encrypt
    from .partitioner import canonicalize_csv

    pk = PublicKey.from_bytes(_read(args.pub))
    spec = HierarchySpec.load(args.spec)
    rng = _rng(args, pk.ctx.backend_id)
    data = canonicalize_csv(_read(args.infile))
    bundle = pmod_encrypt(pk, data, spec, rng, timestamp=args.timestamp)
    raw = bundle.to_bytes()
    with open(args.out, "wb") as fh:
        fh.write(raw)
    return {
        "out": args.out,
        "k": spec.k,
        "bytes": len(raw),
        "sha256": hashlib.sha256(raw).hexdigest(),
        "created_at": bundle.manifest["created_at"],
    }


def cmd_decrypt(args):
    from .abe import PrivateKey
    from .hierarchy import LevelBundle, pmod_decrypt

    sk = PrivateKey.from_bytes(_read(args.key))
    bundle = LevelBundle.from_bytes(_read(args.infile), sk.ctx)
    result = pmod_decrypt(bundle, sk)
    view = result.merge(bundle.plan)
    with open(args.out, "wb") as fh:
        fh.write(view)
    return {
        "achieved_level": result.achieved_level,
        "parts": sorted(result.parts),
        "complete": result.achieved_level == 1,
        "out": args.out,
        "bytes": len(view),
    }


def cmd_inspect(args):
    raw = _read(args.infile)
    magic = bytes(raw[:4])
    if magic == b"PMBD":
        return _inspect_bundle(raw)
    if magic == b"PMPK":
        return _inspect_census("public key", raw)
    if magic == b"PMCT":
        return _inspect_census("ciphertext", raw)
    if magic == b"PMSK":
        return _inspect_private_key(raw)
    if magic == b"PMIK":
        return {"kind": "sealed issuer key", "note": "encrypted at rest; nothing to show"}
    if magic == b"PMMK":
        return {"kind": "master key", "note": "refusing to display master key material"}
    raise PmodError("unrecognized artifact (magic %r)" % magic)


def _inspect_census(kind: str, raw: bytes) -> dict:
    from .wire import element_census

    c = element_census(raw)
    return {
        "kind": kind,
        "bytes": len(raw),
        "elements": {"g0": c.g0, "g1": c.g1, "zp": c.zp},
    }


def _inspect_private_key(raw: bytes) -> dict:
    from .abe import PrivateKey
    from .wire import element_census

    sk = PrivateKey.from_bytes(raw)
    c = element_census(raw)
    return {
        "kind": "private key",
        "attributes": sorted(sk.attribute_set),
        "fingerprint": hashlib.sha256(raw).hexdigest()[:16],
        "elements": {"g0": c.g0, "g1": c.g1, "zp": c.zp},
    }


def _inspect_bundle(raw: bytes) -> dict:
    from .hierarchy import LevelBundle
    from .policy import format_policy
    from .wire import element_census

    bundle = LevelBundle.from_bytes(raw)
    levels = []
    total_g0 = total_g1 = 0
    for record in bundle.records:
        c = element_census(record.kem_ct.to_bytes())
        total_g0 += c.g0
        total_g1 += c.g1
        levels.append({
            "level": record.level,
            "policy": format_policy(record.kem_ct.tree),
            "kem_elements": {"g0": c.g0, "g1": c.g1},
            "part_bytes": len(record.part.ciphertext),
        })
    return {
        "kind": "bundle",
        "bytes": len(raw),
        "manifest": bundle.manifest,
        "levels": levels,
        "kem_totals": {"g0": total_g0, "g1": total_g1},
    }


def cmd_bench(args):
    from . import bench

    if args.kernel_compare:
        if args.backend == "transparent":
            raise UsageError("--kernel-compare needs a curve backend, not transparent")
        rows = bench.kernel_compare(curve=args.backend, repeats=args.runs or 7)
        lines = ["%-9s %-8s %12s" % ("kernel", "op", "median_us")]
        lines += [
            "%-9s %-8s %12.2f" % (r["kernel"], r["op"], r["median_us"]) for r in rows
        ]
        return {"rows": rows, "_human": lines}

    schemes = bench.SCHEMES if args.scheme == "both" else (args.scheme,)
    runs = 0 if args.counts_only else max(1, args.runs)
    rows = bench.run_matrix(
        _int_list(args.k, "--k"),
        _int_list(args.n, "--n"),
        schemes,
        seed=args.seed if args.seed is not None else 1,
        backend=args.backend,
        kernel=args.kernel,
        runs=runs,
    )
    if args.out:
        bench.emit_csv(rows, args.out)
    payload = {"rows": rows, "_human": bench.format_table(rows).splitlines()}
    if args.out:
        payload["out"] = args.out
    return payload


def cmd_serve(args):
    from .services import FileStore, Issuer, ServiceServer

    issuer = store = None
    if args.role in ("issuer", "both"):
        if not args.state:
            raise UsageError("--role %s needs --state" % args.role)
        issuer = Issuer.open(args.state, _passphrase(args))
    if args.role in ("store", "both"):
        if not args.store:
            raise UsageError("--role %s needs --store" % args.role)
        store = FileStore(args.store)
    server = ServiceServer(issuer=issuer, store=store, host=args.host, port=args.port)
    _emit(args, {"listening": server.address, "role": args.role})
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return None


# --------------------------------------------------------------------------
# wiring

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmod",
        description="Privilege-leveled attribute-based file encryption.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", parents=[common], help="create issuer state")
    p.add_argument("--state", required=True)
    p.add_argument("--backend", choices=BACKENDS, default="ss1536")
    p.add_argument("--modulus", type=int, default=None,
                   help="group modulus (transparent backend only)")
    p.add_argument("--passphrase-file")
    p.add_argument("--token", help="bearer token (default: generated)")
    p.add_argument("--seed", type=int)
    p.add_argument("--insecure-seed", action="store_true")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("keygen", parents=[common], help="issue a private key")
    p.add_argument("--state", required=True)
    p.add_argument("--passphrase-file")
    p.add_argument("--user", required=True)
    p.add_argument("--attrs", required=True, help="comma-separated attributes")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--insecure-seed", action="store_true")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", parents=[common], help="encrypt a CSV file")
    p.add_argument("--pub", required=True, help="issuer.pub path")
    p.add_argument("--spec", required=True, help="hierarchy spec (TOML or JSON)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--timestamp", type=int, help="fixed creation time (unix)")
    p.add_argument("--seed", type=int)
    p.add_argument("--insecure-seed", action="store_true")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", parents=[common], help="decrypt a bundle")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("inspect", parents=[common],
                       help="describe an artifact without secrets")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("bench", parents=[common], help="run the benchmark")
    p.add_argument("--k", default="3", help="comma-separated level counts")
    p.add_argument("--n", default="10", help="comma-separated attribute counts")
    p.add_argument("--scheme", choices=("pmod", "cpabe_case1", "both"), default="both")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--backend", choices=BACKENDS, default="ss1536")
    p.add_argument("--kernel", choices=("pure", "compiled"))
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--counts-only", action="store_true",
                   help="skip wall-clock timing")
    p.add_argument("--kernel-compare", action="store_true",
                   help="time primitives on every available kernel")
    p.add_argument("--out", help="write CSV report here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", parents=[common], help="run HTTP services")
    p.add_argument("--role", choices=("issuer", "store", "both"), default="both")
    p.add_argument("--state", help="issuer state dir")
    p.add_argument("--store", help="store root dir")
    p.add_argument("--passphrase-file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8431)
    p.set_defaults(func=cmd_serve)
    return parser


def _emit(args, payload) -> None:
    if payload is None:
        return
    human = payload.pop("_human", None)
    if args.json:
        if human is not None:
            pass
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
        return
    if human is not None:
        sys.stdout.write("\n".join(human) + "\n")
        return
    for key, value in payload.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        sys.stdout.write("%s: %s\n" % (key, value))


def _fail(json_mode: bool, exc: BaseException, code: int) -> int:
    if json_mode:
        sys.stderr.write(
            json.dumps({"error": str(exc), "kind": type(exc).__name__}) + "\n"
        )
    else:
        sys.stderr.write("pmod: error: %s: %s\n" % (type(exc).__name__, exc))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    json_mode = getattr(args, "json", False)
    try:
        payload = args.func(args)
    except UsageError as exc:
        return _fail(json_mode, exc, 2)
    except PmodError as exc:
        return _fail(json_mode, exc, 1)
    except OSError as exc:
        return _fail(json_mode, exc, 2)
    _emit(args, payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
