"""Instance file schema, round-trip exact serialization, and synthetic generation.

Files are JSON with every floating point number serialized as a hexadecimal
float literal (``float.hex``), which round-trips bit-exactly.  Dense symmetric
matrices are stored as row-major lower triangles; rank-one instances store the
factor vectors a_i with A_i = a_i a_i^T.
"""

import json

import numpy as np

from .qip import L0Ball, L1, QipInstance, qip_value

SCHEMA_VERSION = 1

DENSE_SYMMETRIC = "dense-symmetric"
RANK_ONE = "rank-one"


def _enc_vec(v):
    return [float(x).hex() for x in np.asarray(v, dtype=float)]


def _dec_vec(vals, field):
    try:
        return np.array([float.fromhex(x) for x in vals], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"field {field!r}: expected hexadecimal float strings ({exc})") from None


def _lower_triangle(A):
    d = A.shape[0]
    return [float(A[i, j]).hex() for i in range(d) for j in range(i + 1)]


def _from_lower_triangle(vals, d, field):
    flat = _dec_vec(vals, field)
    if flat.size != d * (d + 1) // 2:
        raise ValueError(f"field {field!r}: expected {d * (d + 1) // 2} entries, got {flat.size}")
    A = np.zeros((d, d))
    idx = 0
    for i in range(d):
        for j in range(i + 1):
            A[i, j] = flat[idx]
            A[j, i] = flat[idx]
            idx += 1
    return A


def _reg_to_payload(reg):
    if isinstance(reg, L1):
        return {"kind": "l1", "theta": float(reg.theta).hex()}
    return {"kind": "l0", "s": int(reg.s)}


def _reg_from_payload(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("field 'regularizer': expected an object with a 'kind'")
    kind = spec["kind"]
    if kind == "l1":
        return L1(theta=float.fromhex(spec["theta"]))
    if kind == "l0":
        return L0Ball(s=int(spec["s"]))
    raise ValueError(f"field 'regularizer.kind': unknown kind {kind!r}")


def instance_to_payload(inst, x_true=None):
    payload = {
        "schema": SCHEMA_VERSION,
        "d": inst.d,
        "m": inst.m,
        "b": _enc_vec(inst.b),
        "regularizer": _reg_to_payload(inst.regularizer),
        "x_true": None if x_true is None else _enc_vec(x_true),
    }
    if inst.factors is not None:
        payload["encoding"] = RANK_ONE
        payload["factors"] = [_enc_vec(a) for a in inst.factors]
    else:
        payload["encoding"] = DENSE_SYMMETRIC
        payload["matrices"] = [_lower_triangle(A) for A in inst.matrices]
    return payload


def payload_to_instance(payload):
    """Decode a payload dict; returns (instance, x_true-or-None)."""
    if payload.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"field 'schema': expected {SCHEMA_VERSION}, got {payload.get('schema')!r}")
    for key in ("d", "m", "encoding", "b", "regularizer"):
        if key not in payload:
            raise ValueError(f"missing required field {key!r}")
    d, m = int(payload["d"]), int(payload["m"])
    if d < 1 or m < 1:
        raise ValueError(f"fields 'd'/'m' must be positive, got d={d}, m={m}")
    b = _dec_vec(payload["b"], "b")
    if b.size != m:
        raise ValueError(f"field 'b': expected {m} entries, got {b.size}")
    reg = _reg_from_payload(payload["regularizer"])
    encoding = payload["encoding"]
    if encoding == RANK_ONE:
        rows = payload.get("factors")
        if rows is None or len(rows) != m:
            raise ValueError(f"field 'factors': expected {m} vectors")
        factors = np.stack([_dec_vec(a, "factors") for a in rows])
        if factors.shape != (m, d):
            raise ValueError(f"field 'factors': expected shape ({m}, {d}), got {factors.shape}")
        inst = QipInstance(b=b, regularizer=reg, factors=factors)
    elif encoding == DENSE_SYMMETRIC:
        rows = payload.get("matrices")
        if rows is None or len(rows) != m:
            raise ValueError(f"field 'matrices': expected {m} lower triangles")
        matrices = np.stack([_from_lower_triangle(tri, d, "matrices") for tri in rows])
        inst = QipInstance(b=b, regularizer=reg, matrices=matrices)
    else:
        raise ValueError(f"field 'encoding': unknown encoding {encoding!r}")
    x_true = payload.get("x_true")
    if x_true is not None:
        x_true = _dec_vec(x_true, "x_true")
        if x_true.size != d:
            raise ValueError(f"field 'x_true': expected {d} entries, got {x_true.size}")
    return inst, x_true


def save_instance(payload, path):
    """Write a payload as deterministic JSON (sorted keys, fixed separators)."""
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_instance(path):
    """Read an instance file; returns (instance, x_true-or-None)."""
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return payload_to_instance(payload)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def generate_instance(d, m, s_true, noise, seed, kind=RANK_ONE, regularizer=None):
    """Draw a synthetic instance with a planted sparse ground truth.

    The ground truth has exactly ``s_true`` nonzero entries (standard normal);
    measurements are b_i = x*^T A_i x* + noise * eps_i.  Deterministic under
    ``seed``.  Returns (payload, instance, x_true); by default the stored
    regularizer is the l0 ball at the true sparsity.
    """
    if d < 2 or m < 1:
        raise ValueError(f"require d >= 2 and m >= 1, got d={d}, m={m}")
    if not 1 <= s_true < d:
        raise ValueError(f"require 1 <= s_true < d, got s_true={s_true}, d={d}")
    if noise < 0:
        raise ValueError(f"noise level must be nonnegative, got {noise}")
    if kind not in (RANK_ONE, DENSE_SYMMETRIC):
        raise ValueError(f"unknown measurement kind {kind!r}")
    rng = np.random.default_rng(seed)
    x_true = np.zeros(d)
    support = rng.choice(d, size=s_true, replace=False)
    x_true[support] = rng.standard_normal(s_true)
    if regularizer is None:
        regularizer = L0Ball(s=s_true)
    if kind == RANK_ONE:
        factors = rng.standard_normal((m, d))
        clean = (factors @ x_true) ** 2
        b = clean + noise * rng.standard_normal(m)
        inst = QipInstance(b=b, regularizer=regularizer, factors=factors)
    else:
        raw = rng.standard_normal((m, d, d))
        matrices = 0.5 * (raw + np.transpose(raw, (0, 2, 1)))
        clean = np.einsum("i,mij,j->m", x_true, matrices, x_true)
        b = clean + noise * rng.standard_normal(m)
        inst = QipInstance(b=b, regularizer=regularizer, matrices=matrices)
    if noise == 0:
        assert qip_value(inst, x_true) <= 1e-20
    return instance_to_payload(inst, x_true), inst, x_true
