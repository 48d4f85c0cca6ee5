"""Deployable entities: a key issuer and a content-addressed bundle store.

The issuer owns the system keys.  Its master key never touches disk in the
clear — at rest it sits under AES-GCM with a scrypt-derived key from an
operator passphrase — and key issuance requires a static bearer token
(attribute verification is assumed to happen out of band).  Every issued key
is appended to a JSONL log: timestamp, requester, attributes, fingerprint.

The store is deliberately dumb: it holds opaque bundle bytes addressed by
their SHA-256 and verifies the digest on both put and get.  Nothing in its
interface accepts key material, and the HTTP layer can record traffic so
integration tests can assert none ever reaches it.

HTTP surface (JSON with base64 binary fields, bundles as raw octet-stream):

    GET  /v1/params           -> {"public_key": b64}
    POST /v1/keys             -> {"private_key": b64, "fingerprint": hex}
                                 (Authorization: Bearer <token>)
    PUT  /v1/bundles/{digest} <- raw bundle bytes
    GET  /v1/bundles/{digest} -> raw bundle bytes
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
import secrets
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import requests

from .abe import MasterKey, PrivateKey, PublicKey, keygen, setup
from .errors import (
    IntegrityError,
    ParameterError,
    SerializationError,
    ServiceError,
)
from .group import create_context
from .rng import default_source

_MK_MAGIC = b"PMIK"
_MK_VERSION = 1
_SCRYPT_N = 1 << 14
_SCRYPT_R = 8
_SCRYPT_P = 1
_SALT_BYTES = 16
_NONCE_BYTES = 12


def _passphrase_key(passphrase: str, salt: bytes) -> bytes:
    return hashlib.scrypt(
        passphrase.encode("utf-8"),
        salt=salt,
        n=_SCRYPT_N,
        r=_SCRYPT_R,
        p=_SCRYPT_P,
        maxmem=64 * 1024 * 1024,
        dklen=32,
    )


def _seal_master_key(mk: MasterKey, passphrase: str, rng) -> bytes:
    from cryptography.hazmat.primitives.ciphers.aead import AESGCM

    salt = rng.randbytes(_SALT_BYTES)
    nonce = rng.randbytes(_NONCE_BYTES)
    sealed = AESGCM(_passphrase_key(passphrase, salt)).encrypt(
        nonce, mk.to_bytes(), _MK_MAGIC
    )
    return _MK_MAGIC + bytes([_MK_VERSION]) + salt + nonce + sealed


def _open_master_key(blob: bytes, passphrase: str, ctx=None) -> MasterKey:
    from cryptography.exceptions import InvalidTag
    from cryptography.hazmat.primitives.ciphers.aead import AESGCM

    if len(blob) < 5 + _SALT_BYTES + _NONCE_BYTES or blob[:4] != _MK_MAGIC:
        raise SerializationError("not an issuer key file")
    if blob[4] != _MK_VERSION:
        raise SerializationError("unsupported issuer key version %d" % blob[4])
    salt = blob[5 : 5 + _SALT_BYTES]
    nonce = blob[5 + _SALT_BYTES : 5 + _SALT_BYTES + _NONCE_BYTES]
    sealed = blob[5 + _SALT_BYTES + _NONCE_BYTES :]
    try:
        raw = AESGCM(_passphrase_key(passphrase, salt)).decrypt(
            nonce, sealed, _MK_MAGIC
        )
    except InvalidTag:
        raise ServiceError("wrong passphrase or corrupted issuer key", 403) from None
    return MasterKey.from_bytes(raw, ctx)


def _write_private(path: str, data: bytes) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    try:
        os.write(fd, data)
    finally:
        os.close(fd)


class Issuer:
    """Key authority: holds (PK, MK), issues attribute-bound private keys,
    and keeps an append-only issuance log."""

    def __init__(self, state_dir: str, pk: PublicKey, mk: MasterKey, token: str):
        self.state_dir = state_dir
        self.pk = pk
        self._mk = mk
        self.token = token
        self._log_lock = threading.Lock()

    # -- lifecycle

    @classmethod
    def initialize(
        cls,
        state_dir: str,
        passphrase: str,
        *,
        backend: str = "ss1536",
        p: int | None = None,
        token: str | None = None,
        rng=None,
    ) -> "Issuer":
        rng = rng if rng is not None else default_source()
        if os.path.exists(os.path.join(state_dir, "issuer.key")):
            raise ServiceError("issuer state already exists in %r" % state_dir, 409)
        os.makedirs(state_dir, mode=0o700, exist_ok=True)
        ctx = create_context(backend, p=p)
        pk, mk = setup(ctx, rng)
        token = token if token is not None else secrets.token_urlsafe(32)
        _write_private(os.path.join(state_dir, "issuer.key"),
                       _seal_master_key(mk, passphrase, rng))
        with open(os.path.join(state_dir, "issuer.pub"), "wb") as fh:
            fh.write(pk.to_bytes())
        _write_private(os.path.join(state_dir, "issuer.token"),
                       token.encode("utf-8"))
        return cls(state_dir, pk, mk, token)

    @classmethod
    def open(cls, state_dir: str, passphrase: str) -> "Issuer":
        pub_path = os.path.join(state_dir, "issuer.pub")
        key_path = os.path.join(state_dir, "issuer.key")
        if not (os.path.exists(pub_path) and os.path.exists(key_path)):
            raise ServiceError("no issuer state in %r" % state_dir, 404)
        with open(pub_path, "rb") as fh:
            pk = PublicKey.from_bytes(fh.read())
        with open(key_path, "rb") as fh:
            mk = _open_master_key(fh.read(), passphrase, pk.ctx)
        with open(os.path.join(state_dir, "issuer.token")) as fh:
            token = fh.read().strip()
        return cls(state_dir, pk, mk, token)

    # -- operations

    def get_public_params(self) -> PublicKey:
        return self.pk

    def check_token(self, presented: str | None) -> bool:
        return presented is not None and hmac.compare_digest(
            presented.encode(), self.token.encode()
        )

    def issue_key(self, requester: str, attrs, rng=None) -> PrivateKey:
        if not requester:
            raise ServiceError("requester id required", 400)
        sk = keygen(self._mk, attrs, rng)
        fingerprint = hashlib.sha256(sk.to_bytes()).hexdigest()[:16]
        entry = {
            "ts": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            "requester": requester,
            "attributes": sorted(sk.attribute_set),
            "fingerprint": fingerprint,
        }
        with self._log_lock:
            with open(os.path.join(self.state_dir, "log.jsonl"), "a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        return sk


class FileStore:
    """Content-addressed blob store under store/objects/<sha256-hex>."""

    def __init__(self, root: str):
        self.root = root
        self._objects = os.path.join(root, "objects")
        os.makedirs(self._objects, exist_ok=True)

    def _path(self, digest: str) -> str:
        if len(digest) != 64 or any(c not in "0123456789abcdef" for c in digest):
            raise ServiceError("malformed object id %r" % digest, 400)
        return os.path.join(self._objects, digest)

    def put(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        path = self._path(digest)
        if not os.path.exists(path):
            tmp = path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        return digest

    def get(self, digest: str) -> bytes:
        path = self._path(digest)
        if not os.path.exists(path):
            raise ServiceError("unknown object %s" % digest, 404)
        with open(path, "rb") as fh:
            data = fh.read()
        if hashlib.sha256(data).hexdigest() != digest:
            raise IntegrityError("stored object %s fails its digest" % digest)
        return data


# --------------------------------------------------------------------------
# HTTP layer

def _handler_class(server_ref):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, *args):
            pass

        def _reply(self, status: int, body: bytes, content_type: str) -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _json(self, status: int, obj) -> None:
            self._reply(status, json.dumps(obj).encode(), "application/json")

        def _error(self, status: int, message: str) -> None:
            self._json(status, {"error": message})

        def _body(self) -> bytes:
            length = int(self.headers.get("Content-Length") or 0)
            return self.rfile.read(length) if length else b""

        def _record(self, body: bytes) -> None:
            if server_ref.traffic is not None:
                server_ref.traffic.append((self.command, self.path, body))

        def do_GET(self):
            self._record(b"")
            issuer, store = server_ref.issuer, server_ref.store
            if self.path == "/v1/params" and issuer is not None:
                pk_b64 = base64.b64encode(issuer.get_public_params().to_bytes())
                self._json(200, {"public_key": pk_b64.decode()})
                return
            if self.path.startswith("/v1/bundles/") and store is not None:
                digest = self.path.rsplit("/", 1)[1]
                try:
                    data = store.get(digest)
                except ServiceError as exc:
                    self._error(exc.status or 500, str(exc))
                    return
                except IntegrityError as exc:
                    self._error(500, str(exc))
                    return
                self._reply(200, data, "application/octet-stream")
                return
            self._error(404, "no such resource")

        def do_POST(self):
            body = self._body()
            self._record(body)
            issuer = server_ref.issuer
            if self.path != "/v1/keys" or issuer is None:
                self._error(404, "no such resource")
                return
            auth = self.headers.get("Authorization") or ""
            presented = auth[7:] if auth.startswith("Bearer ") else None
            if not issuer.check_token(presented):
                self._error(401, "missing or invalid bearer token")
                return
            try:
                payload = json.loads(body.decode("utf-8"))
                requester = payload["requester"]
                attributes = payload["attributes"]
            except (ValueError, KeyError, UnicodeDecodeError):
                self._error(400, "body must be JSON with requester and attributes")
                return
            try:
                sk = issuer.issue_key(requester, attributes)
            except (ParameterError, ServiceError) as exc:
                self._error(400, str(exc))
                return
            raw = sk.to_bytes()
            self._json(200, {
                "private_key": base64.b64encode(raw).decode(),
                "fingerprint": hashlib.sha256(raw).hexdigest()[:16],
            })

        def do_PUT(self):
            body = self._body()
            self._record(body)
            store = server_ref.store
            if not self.path.startswith("/v1/bundles/") or store is None:
                self._error(404, "no such resource")
                return
            digest = self.path.rsplit("/", 1)[1]
            if hashlib.sha256(body).hexdigest() != digest:
                self._error(400, "object id must be the SHA-256 of the body")
                return
            try:
                store.put(body)
            except ServiceError as exc:
                self._error(exc.status or 500, str(exc))
                return
            self._json(201, {"id": digest})

    return Handler


class ServiceServer:
    """In-process HTTP server hosting an issuer, a store, or both.

    Pass capture_traffic=True to record (method, path, body) per request —
    integration tests use this to prove no key material reaches a store.
    """

    def __init__(
        self,
        issuer: Issuer | None = None,
        store: FileStore | None = None,
        host: str = "127.0.0.1",
        port: int = 0,
        capture_traffic: bool = False,
    ):
        if issuer is None and store is None:
            raise ParameterError("server needs an issuer, a store, or both")
        self.issuer = issuer
        self.store = store
        self.traffic: list | None = [] if capture_traffic else None
        self._httpd = ThreadingHTTPServer((host, port), _handler_class(self))
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self._httpd.server_address[:2]
        return "http://%s:%d" % (host, port)

    def start(self) -> "ServiceServer":
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="pmod-service", daemon=True
        )
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        self._httpd.serve_forever()


# --------------------------------------------------------------------------
# clients

def _check(resp) -> None:
    if resp.status_code >= 400:
        try:
            message = resp.json().get("error", resp.text)
        except ValueError:
            message = resp.text
        raise ServiceError(message, resp.status_code)


class IssuerClient:
    def __init__(self, base_url: str, token: str | None = None, session=None):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self._http = session if session is not None else requests.Session()

    def get_public_params(self, ctx=None) -> PublicKey:
        resp = self._http.get(self.base_url + "/v1/params", timeout=30)
        _check(resp)
        raw = base64.b64decode(resp.json()["public_key"])
        return PublicKey.from_bytes(raw, ctx)

    def issue_key(self, requester: str, attrs, ctx=None) -> PrivateKey:
        headers = {}
        if self.token is not None:
            headers["Authorization"] = "Bearer " + self.token
        resp = self._http.post(
            self.base_url + "/v1/keys",
            json={"requester": requester, "attributes": sorted(attrs)},
            headers=headers,
            timeout=120,
        )
        _check(resp)
        return PrivateKey.from_bytes(
            base64.b64decode(resp.json()["private_key"]), ctx
        )


class StoreClient:
    def __init__(self, base_url: str, session=None):
        self.base_url = base_url.rstrip("/")
        self._http = session if session is not None else requests.Session()

    def put(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        resp = self._http.put(
            self.base_url + "/v1/bundles/" + digest,
            data=data,
            headers={"Content-Type": "application/octet-stream"},
            timeout=120,
        )
        _check(resp)
        return digest

    def get(self, digest: str) -> bytes:
        resp = self._http.get(self.base_url + "/v1/bundles/" + digest, timeout=120)
        _check(resp)
        data = resp.content
        if hashlib.sha256(data).hexdigest() != digest:
            raise IntegrityError("store returned bytes that fail the object digest")
        return data
