"""The shared presence/background dataset container and its CSV format."""

import csv
import io

import numpy as np

from .serialize import fmt

_WEIGHT_SUM_RTOL = 1e-9


class Dataset:
    """Labeled feature rows for one presence-only fitting problem.

    Rows carry a binary label y (1 = presence record, 0 = background point)
    and a feature vector in R^p. ``domain_area`` is the area |D| of the
    study region the background points were drawn from. Optional quadrature
    weights (one per background row, summing to |D|) turn the background
    sum into a weighted quadrature rule; by default every background point
    gets weight |D| / n0.

    Instances are immutable and safe to share across threads.
    """

    def __init__(self, X, y, domain_area, quad_weights=None):
        X = np.ascontiguousarray(np.asarray(X, dtype=float))
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array of feature rows")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise ValueError("y must have one label per row")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        y = np.ascontiguousarray(y, dtype=np.float64)

        n1 = int(y.sum())
        n0 = int(y.shape[0] - n1)
        if n1 < 1:
            raise ValueError("need at least one presence row")
        if n0 < 1:
            raise ValueError("need at least one background row")

        domain_area = float(domain_area)
        if not (np.isfinite(domain_area) and domain_area > 0):
            raise ValueError(f"domain_area must be positive, got {domain_area}")

        if quad_weights is not None:
            quad_weights = np.ascontiguousarray(quad_weights, dtype=float)
            if quad_weights.shape != (n0,):
                raise ValueError(
                    f"quad_weights must have one entry per background row "
                    f"({n0}), got shape {quad_weights.shape}"
                )
            if not np.all(quad_weights > 0):
                raise ValueError("quad_weights must be positive")
            total = float(quad_weights.sum())
            if abs(total - domain_area) > _WEIGHT_SUM_RTOL * domain_area:
                raise ValueError(
                    f"quad_weights sum to {total!r}, expected domain_area "
                    f"{domain_area!r}"
                )
            quad_weights.setflags(write=False)

        X.setflags(write=False)
        y.setflags(write=False)
        self.X = X
        self.y = y
        self.n1 = n1
        self.n0 = n0
        self.domain_area = domain_area
        self.quad_weights = quad_weights
        self._presence = np.nonzero(y == 1)[0]
        self._background = np.nonzero(y == 0)[0]
        self._presence.setflags(write=False)
        self._background.setflags(write=False)

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def presence_X(self):
        return self.X[self._presence]

    @property
    def background_X(self):
        return self.X[self._background]

    def weights(self):
        """Per-background-row quadrature weights (uniform default)."""
        if self.quad_weights is not None:
            return self.quad_weights
        w = np.full(self.n0, self.domain_area / self.n0)
        w.setflags(write=False)
        return w

    def __repr__(self):
        return (
            f"Dataset(n1={self.n1}, n0={self.n0}, p={self.p}, "
            f"domain_area={self.domain_area!r})"
        )


def write_csv(dataset, path_or_file, header_comments=()):
    """Write a dataset in the ``y,w,x1,...,xp`` CSV format.

    The ``w`` column (quadrature weight, background rows only) is included
    only when the dataset carries explicit weights. ``header_comments``
    lines are written first, prefixed with '#'.
    """
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for line in header_comments:
            f.write(f"# {line}\n")
        with_w = dataset.quad_weights is not None
        cols = ["y"] + (["w"] if with_w else []) + [f"x{j+1}" for j in range(dataset.p)]
        f.write(",".join(cols) + "\n")
        bg_pos = 0
        for i in range(dataset.X.shape[0]):
            row = [str(int(dataset.y[i]))]
            if with_w:
                if dataset.y[i] == 0:
                    row.append(fmt(dataset.quad_weights[bg_pos]))
                    bg_pos += 1
                else:
                    row.append("")
            row.extend(fmt(v) for v in dataset.X[i])
            f.write(",".join(row) + "\n")
    finally:
        if own:
            f.close()


def read_csv(path_or_file, domain_area):
    """Read a ``y,w,x1,...,xp`` CSV into a Dataset.

    Lines starting with '#' are skipped. Malformed rows raise ValueError
    naming the 1-based line number. The domain area is not stored in the
    file and must be supplied.
    """
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "r", newline="") if own else path_or_file
    try:
        return _read_csv(f, domain_area)
    finally:
        if own:
            f.close()


def _read_csv(f, domain_area):
    lines = []
    line_nos = []
    for lineno, raw in enumerate(f, start=1):
        if raw.lstrip().startswith("#") or not raw.strip():
            continue
        lines.append(raw)
        line_nos.append(lineno)
    if not lines:
        raise ValueError("empty CSV: no header row")

    reader = csv.reader(io.StringIO("".join(lines)))
    rows = list(reader)
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "y":
        raise ValueError(f"line {line_nos[0]}: header must start with 'y'")
    with_w = len(header) > 1 and header[1] == "w"
    x_cols = header[2:] if with_w else header[1:]
    expected = [f"x{j+1}" for j in range(len(x_cols))]
    if x_cols != expected:
        raise ValueError(
            f"line {line_nos[0]}: feature columns must be x1..xp, got {x_cols}"
        )
    p = len(x_cols)
    if p == 0:
        raise ValueError(f"line {line_nos[0]}: no feature columns")

    ys, xs, ws = [], [], []
    any_weight = False
    for rec, lineno in zip(rows[1:], line_nos[1:]):
        if len(rec) != len(header):
            raise ValueError(
                f"line {lineno}: expected {len(header)} fields, got {len(rec)}"
            )
        try:
            yv = int(rec[0])
            if yv not in (0, 1):
                raise ValueError
        except ValueError:
            raise ValueError(f"line {lineno}: label must be 0 or 1, got {rec[0]!r}") from None
        wv = None
        if with_w:
            cell = rec[1].strip()
            if yv == 1:
                if cell not in ("", "0"):
                    raise ValueError(
                        f"line {lineno}: presence rows must leave w empty or 0"
                    )
            else:
                try:
                    wv = float(cell)
                except ValueError:
                    raise ValueError(f"line {lineno}: bad weight {cell!r}") from None
                any_weight = True
        try:
            xv = [float(c) for c in (rec[2:] if with_w else rec[1:])]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric feature value") from None
        ys.append(yv)
        xs.append(xv)
        if yv == 0:
            ws.append(wv)

    if not ys:
        raise ValueError("CSV has a header but no data rows")
    quad = np.array(ws, dtype=float) if (with_w and any_weight) else None
    return Dataset(np.array(xs), np.array(ys), domain_area, quad_weights=quad)
