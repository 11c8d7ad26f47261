"""Binary containers and CSV artifacts.

All binary formats are little-endian with a magic string and a u32 version;
a bad magic or unsupported version is a hard error, never reinterpreted.

KFLOW1 (snapshot container)::

    "KFLOW1" | u32 version=1 | u32 nx | u32 ny | f64 re | u32 n |
    f64 dt | f64 save_every | u64 count | count*nx*ny f64 (row-major)

KNET1 (dense net weights)::

    "KNET1" | u32 version=1 | u32 n_layers | u32 input_dim |
    per layer: u32 out_dim, u8 activation (0=sigmoid, 1=linear) |
    per layer: f64 W (in*out, row-major), f64 b (out)

KPCA1 (orthogonal basis + normalization)::

    "KPCA1" | u32 version=1 | u32 n | u8 centered | f64 scale |
    f64 U (n*n row-major) | f64 singular_values (n) | f64 mean (n)
"""

import os
import struct
import tempfile

import numpy as np

from .errors import FormatError
from .spectral import FlowParams, Grid, SnapshotSeries

_ACT_CODES = {"sigmoid": 0, "linear": 1}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}


def atomic_write_bytes(path: str, payload: bytes):
    """Write via a temp file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str):
    atomic_write_bytes(path, text.encode())


def _expect_magic(buf: memoryview, magic: bytes, path: str):
    got = bytes(buf[: len(magic)])
    if got != magic:
        raise FormatError(f"{path}: bad magic {got!r}, expected {magic!r}")


def _expect_version(version: int, expected: int, path: str):
    if version != expected:
        raise FormatError(f"{path}: unsupported version {version} (expected {expected})")


def write_snapshots(path: str, series: SnapshotSeries):
    g, p = series.grid, series.params
    head = b"KFLOW1" + struct.pack(
        "<IIIdIddQ",
        1,
        g.nx,
        g.ny,
        p.re,
        p.n,
        p.dt,
        series.save_every,
        series.count,
    )
    data = np.ascontiguousarray(series.snapshots, dtype="<f8").tobytes()
    atomic_write_bytes(path, head + data)


def read_snapshots(path: str) -> SnapshotSeries:
    with open(path, "rb") as f:
        raw = f.read()
    buf = memoryview(raw)
    _expect_magic(buf, b"KFLOW1", path)
    off = 6
    version, nx, ny, re, n, dt, save_every, count = struct.unpack_from(
        "<IIIdIddQ", buf, off
    )
    _expect_version(version, 1, path)
    off += struct.calcsize("<IIIdIddQ")
    need = count * nx * ny * 8
    if len(raw) - off != need:
        raise FormatError(
            f"{path}: payload is {len(raw)-off} bytes, expected {need}"
        )
    snaps = np.frombuffer(raw, dtype="<f8", offset=off).reshape(count, nx, ny).copy()
    return SnapshotSeries(
        snaps, Grid(nx=nx, ny=ny), FlowParams(re=re, n=n, dt=dt), save_every
    )


def write_net(path: str, net):
    dims = net.layer_dims
    parts = [b"KNET1", struct.pack("<III", 1, len(net.weights), dims[0])]
    for out_dim, act in zip(dims[1:], net.activations):
        parts.append(struct.pack("<IB", out_dim, _ACT_CODES[act]))
    for w, b in zip(net.weights, net.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    atomic_write_bytes(path, b"".join(parts))


def read_net(path: str):
    from .nnet import DenseNet

    with open(path, "rb") as f:
        raw = f.read()
    buf = memoryview(raw)
    _expect_magic(buf, b"KNET1", path)
    off = 5
    version, n_layers, in_dim = struct.unpack_from("<III", buf, off)
    _expect_version(version, 1, path)
    off += 12
    dims = [in_dim]
    acts = []
    for _ in range(n_layers):
        out_dim, code = struct.unpack_from("<IB", buf, off)
        off += 5
        if code not in _ACT_NAMES:
            raise FormatError(f"{path}: unknown activation code {code}")
        dims.append(out_dim)
        acts.append(_ACT_NAMES[code])
    weights, biases = [], []
    for i in range(n_layers):
        nw = dims[i] * dims[i + 1]
        w = np.frombuffer(raw, dtype="<f8", offset=off, count=nw)
        off += nw * 8
        b = np.frombuffer(raw, dtype="<f8", offset=off, count=dims[i + 1])
        off += dims[i + 1] * 8
        weights.append(w.reshape(dims[i], dims[i + 1]).copy())
        biases.append(b.copy())
    if off != len(raw):
        raise FormatError(f"{path}: {len(raw)-off} trailing bytes")
    return DenseNet(weights, biases, acts)


def write_pca(path: str, basis, scale: float = 1.0):
    n = basis.u.shape[0]
    mean = basis.mean if basis.mean is not None else np.zeros(n)
    head = b"KPCA1" + struct.pack("<IIBd", 1, n, 1 if basis.mean is not None else 0, scale)
    body = (
        np.ascontiguousarray(basis.u, dtype="<f8").tobytes()
        + np.ascontiguousarray(basis.singular_values, dtype="<f8").tobytes()
        + np.ascontiguousarray(mean, dtype="<f8").tobytes()
    )
    atomic_write_bytes(path, head + body)


def read_pca(path: str):
    from .reduction import PcaBasis

    with open(path, "rb") as f:
        raw = f.read()
    buf = memoryview(raw)
    _expect_magic(buf, b"KPCA1", path)
    off = 5
    version, n, centered, scale = struct.unpack_from("<IIBd", buf, off)
    _expect_version(version, 1, path)
    off += struct.calcsize("<IIBd")
    u = np.frombuffer(raw, dtype="<f8", offset=off, count=n * n).reshape(n, n).copy()
    off += n * n * 8
    sv = np.frombuffer(raw, dtype="<f8", offset=off, count=n).copy()
    off += n * 8
    mean = np.frombuffer(raw, dtype="<f8", offset=off, count=n).copy()
    off += n * 8
    if off != len(raw):
        raise FormatError(f"{path}: {len(raw)-off} trailing bytes")
    return PcaBasis(u, sv, mean if centered else None), scale


def write_csv(path: str, header: list, columns: list):
    """Columns of equal length; floats rendered with repr (lossless round-trip)."""
    cols = [np.asarray(c) for c in columns]
    lines = [",".join(header)]
    for i in range(len(cols[0])):
        cells = []
        for c in cols:
            v = c[i]
            if isinstance(v, (np.floating, float)):
                cells.append(repr(float(v)))
            elif isinstance(v, (np.integer, int)):
                cells.append(str(int(v)))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv(path: str):
    """Returns (header, dict of float columns). Non-numeric cells become NaN."""
    with open(path) as f:
        header = f.readline().strip().split(",")
        rows = [line.strip().split(",") for line in f if line.strip()]
    cols = {}
    for j, name in enumerate(header):
        vals = []
        for r in rows:
            try:
                vals.append(float(r[j]))
            except (ValueError, IndexError):
                vals.append(float("nan"))
        cols[name] = np.array(vals)
    return header, cols
