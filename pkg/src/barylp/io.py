"""On-disk formats: instance directories, cost matrices, histories, images.

An instance directory holds a ``manifest.json`` plus one CSV per sample
distribution (columns ``weight,coord_1..coord_d``), an optional
barycenter support CSV (``coord_1..coord_d``), and optional binary cost
matrices.  Cost files store the unweighted, jointly normalized ground
costs; the ``omega`` weighting is applied on load.  When no cost files
are present the ground costs are rebuilt from the support coordinates,
which reproduces the generator's matrices exactly.

The binary cost format is an 8-byte header (two little-endian uint32:
rows, cols) followed by row-major float64 little-endian payload.
"""

import csv
import json
import os
import struct

import numpy as np

from .datagen import build_cost
from .problem import DiscreteDistribution, WbpInstance

__all__ = [
    "save_instance",
    "load_instance",
    "write_cost_matrix",
    "read_cost_matrix",
    "write_history_csv",
    "write_barycenter_csv",
    "write_summary_json",
    "write_compare_csv",
    "read_pgm",
    "write_pgm",
]

_MANIFEST_NAME = "manifest.json"
_FORMAT_NAME = "barylp-instance"


def _write_distribution_csv(path, dist):
    d = dist.dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["weight"] + [f"coord_{i + 1}" for i in range(d)])
        for weight, point in zip(dist.weights, dist.support):
            w.writerow([repr(float(weight))] + [repr(float(v)) for v in point])


def _read_distribution_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "weight":
        raise ValueError(f"{path}: expected a 'weight' first column")
    data = np.array([[float(v) for v in row] for row in body])
    return DiscreteDistribution(data[:, 0], data[:, 1:])


def _write_support_csv(path, support):
    d = support.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"coord_{i + 1}" for i in range(d)])
        for point in support:
            w.writerow([repr(float(v)) for v in point])


def _read_support_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in row] for row in rows[1:]])


def write_cost_matrix(path, matrix):
    """Write one cost matrix in the binary header+row-major format."""
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("cost matrix must be 2-d")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.astype("<f8").tobytes(order="C"))


def read_cost_matrix(path):
    """Read one binary cost matrix."""
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise ValueError(f"{path}: truncated header")
        rows, cols = struct.unpack("<II", header)
        payload = fh.read(rows * cols * 8)
    if len(payload) != rows * cols * 8:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()


def save_instance(instance, out_dir, write_cost=False, extra=None):
    """Write an instance directory: manifest, distribution CSVs, costs.

    Parameters
    ----------
    instance : WbpInstance
    out_dir : str
        Created if missing.
    write_cost : bool
        Also write binary ground-cost files.  Forced when the instance
        has no barycenter support to rebuild them from.
    extra : dict, optional
        Additional keys merged into the manifest (e.g. the seed).
    """
    os.makedirs(out_dir, exist_ok=True)
    if instance.bary_support is None:
        write_cost = True
    dist_files = []
    for t, dist in enumerate(instance.distributions):
        name = f"dist_{t:03d}.csv"
        _write_distribution_csv(os.path.join(out_dir, name), dist)
        dist_files.append(name)
    bary_file = None
    if instance.bary_support is not None:
        bary_file = "barycenter_support.csv"
        _write_support_csv(os.path.join(out_dir, bary_file),
                           instance.bary_support)
    cost_files = None
    if write_cost:
        cost_files = []
        for t in range(instance.T):
            name = f"cost_{t:03d}.bin"
            ground = instance.cost[t] / instance.omega[t]
            write_cost_matrix(os.path.join(out_dir, name), ground)
            cost_files.append(name)
    manifest = {
        "format": _FORMAT_NAME,
        "version": 1,
        "T": instance.T,
        "m": instance.m,
        "m_t": list(instance.m_ts),
        "d": instance.distributions[0].dim,
        "omega": [float(v) for v in instance.omega],
        "distributions": dist_files,
        "barycenter_support": bary_file,
        "cost_files": cost_files,
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, _MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return os.path.join(out_dir, _MANIFEST_NAME)


def load_instance(path):
    """Load an instance directory (or its manifest path).

    Cost handling: with ``cost_files`` in the manifest the files are
    read as unweighted ground costs; otherwise the ground costs are
    rebuilt from the barycenter and sample supports.  Either way the
    instance cost matrices come out as ``omega_t * ground_t``.
    """
    if os.path.isdir(path):
        manifest_path = os.path.join(path, _MANIFEST_NAME)
    else:
        manifest_path = path
    base = os.path.dirname(manifest_path)
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != _FORMAT_NAME:
        raise ValueError(f"{manifest_path}: not a {_FORMAT_NAME} manifest")
    dists = [
        _read_distribution_csv(os.path.join(base, name))
        for name in manifest["distributions"]
    ]
    omega = np.array(manifest["omega"], dtype=np.float64)
    bary_support = None
    if manifest.get("barycenter_support"):
        bary_support = _read_support_csv(
            os.path.join(base, manifest["barycenter_support"])
        )
    if manifest.get("cost_files"):
        ground = [
            read_cost_matrix(os.path.join(base, name))
            for name in manifest["cost_files"]
        ]
    elif bary_support is not None:
        ground = build_cost(bary_support, [d.support for d in dists])
    else:
        raise ValueError(
            f"{manifest_path}: needs cost_files or a barycenter support"
        )
    cost = [omega[t] * ground[t] for t in range(len(dists))]
    return WbpInstance(dists, omega, cost, bary_support=bary_support)


_LP_HISTORY_COLUMNS = [
    "iter", "kkt_primal", "kkt_nonneg", "kkt_dual", "kkt_compl", "kkt_max",
    "primal_obj", "dual_obj", "elapsed_secs", "restarted", "method",
]
_IBP_HISTORY_COLUMNS = [
    "iter", "marginal_error", "weight_change", "primal_obj", "elapsed_secs",
    "method",
]


def write_history_csv(path, records, method=None):
    """Write a convergence history CSV.

    LP records carry the four relative KKT terms and their max plus the
    restart flag; scaling-baseline records carry the marginal error and
    the barycenter weight change instead.
    """
    records = list(records)
    lp_style = not records or hasattr(records[0], "kkt")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if lp_style:
            w.writerow(_LP_HISTORY_COLUMNS)
            for r in records:
                w.writerow([
                    r.iteration,
                    f"{r.kkt.primal:.16e}", f"{r.kkt.nonneg:.16e}",
                    f"{r.kkt.dual:.16e}", f"{r.kkt.compl:.16e}",
                    f"{r.kkt.max:.16e}",
                    f"{r.primal_obj:.16e}", f"{r.dual_obj:.16e}",
                    f"{r.elapsed_secs:.6f}", int(r.restarted), r.method,
                ])
        else:
            w.writerow(_IBP_HISTORY_COLUMNS)
            for r in records:
                w.writerow([
                    r.iteration,
                    f"{r.marginal_error:.16e}", f"{r.weight_change:.16e}",
                    f"{r.primal_obj:.16e}", f"{r.elapsed_secs:.6f}",
                    method or "ibp",
                ])
    return path


def write_barycenter_csv(path, weights, support=None):
    """Write solved barycenter weights (with coordinates when known)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if support is None:
            w.writerow(["weight"])
            for v in weights:
                w.writerow([repr(float(v))])
        else:
            d = support.shape[1]
            w.writerow(["weight"] + [f"coord_{i + 1}" for i in range(d)])
            for v, point in zip(weights, support):
                w.writerow([repr(float(v))] + [repr(float(u)) for u in point])
    return path


def write_summary_json(path, summary):
    """Write a run summary as JSON."""
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


_COMPARE_COLUMNS = [
    "method", "iterations", "kkt_max", "marginal_error", "primal_obj",
    "gap_vs_best", "elapsed_secs",
]


def write_compare_csv(path, rows):
    """Write the method-comparison summary table.

    ``rows`` are dicts with the :data:`_COMPARE_COLUMNS` keys; LP rows
    leave ``marginal_error`` empty and scaling rows leave ``kkt_max``
    empty.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_COMPARE_COLUMNS)
        for row in rows:
            w.writerow([
                row["method"],
                row["iterations"],
                "" if row.get("kkt_max") is None else f"{row['kkt_max']:.6e}",
                "" if row.get("marginal_error") is None
                else f"{row['marginal_error']:.6e}",
                f"{row['primal_obj']:.16e}",
                f"{row['gap_vs_best']:.6e}",
                f"{row['elapsed_secs']:.6f}",
            ])
    return path


def read_pgm(path):
    """Read a PGM image (ascii ``P2`` or binary ``P5``) as float64."""
    with open(path, "rb") as fh:
        data = fh.read()

    pos = 0

    def token():
        nonlocal pos
        while pos < len(data):
            ch = data[pos:pos + 1]
            if ch.isspace():
                pos += 1
            elif ch == b"#":
                while pos < len(data) and data[pos:pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        return data[start:pos]

    magic = token()
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a PGM file")
    width = int(token())
    height = int(token())
    maxval = int(token())
    if maxval <= 0 or maxval > 65535:
        raise ValueError(f"{path}: bad maxval {maxval}")
    if magic == b"P2":
        values = []
        while len(values) < width * height:
            tok = token()
            if not tok:
                raise ValueError(f"{path}: truncated ascii payload")
            values.append(int(tok))
        img = np.array(values, dtype=np.float64)
    else:
        pos += 1  # single whitespace after maxval
        dtype = ">u2" if maxval > 255 else np.uint8
        count = width * height
        img = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        img = img.astype(np.float64)
    return img.reshape(height, width)


def write_pgm(path, image, maxval=255):
    """Write a float array (scaled to its max) as a binary PGM."""
    image = np.asarray(image, dtype=np.float64)
    top = image.max()
    scaled = np.zeros_like(image) if top <= 0 else image / top * maxval
    quantized = np.clip(np.rint(scaled), 0, maxval).astype(
        ">u2" if maxval > 255 else np.uint8
    )
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n{maxval}\n".encode())
        fh.write(quantized.tobytes())
    return path
