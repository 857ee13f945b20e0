"""Dataset ingestion and preprocessing.

The pipeline fitted on training rows only: median/mode imputation,
leave-one-out target encoding of categorical columns, and a per-column
quantile transform onto a standard normal.  Minority classes can be
rebalanced afterwards with SMOTE interpolation in the transformed space.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

NA_TOKENS = {"", "na", "n/a", "nan", "null", "none", "?"}
NUMERIC, CATEGORICAL = "numeric", "categorical"
QUANTILE_CLIP = 1e-7
MAX_QUANTILE_REFS = 1000
SMOTE_K = 5


# ---------------------------------------------------------------------------
# dataset container
# ---------------------------------------------------------------------------

@dataclass
class Dataset:
    feature_names: list[str]
    kinds: list[str]              # "numeric" | "categorical" per column
    columns: list[np.ndarray]     # float64 (nan = missing) or object arrays
    y: np.ndarray                 # int64 class ids
    n_classes: int
    class_names: list[str]        # original target values by class id
    target_name: str = "target"
    _X: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_rows(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return len(self.columns)

    @property
    def X(self) -> np.ndarray:
        """Row-major feature matrix; requires a fully numeric, finite dataset."""
        if self._X is None:
            for name, kind in zip(self.feature_names, self.kinds):
                if kind != NUMERIC:
                    raise ValueError(f"column {name!r} is categorical; preprocess first")
            mat = np.column_stack(self.columns) if self.columns else np.empty((self.n_rows, 0))
            if not np.all(np.isfinite(mat)):
                raise ValueError("dataset contains missing or non-finite values; preprocess first")
            self._X = mat
        return self._X

    def select(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        return Dataset(
            list(self.feature_names), list(self.kinds),
            [col[idx] for col in self.columns],
            self.y[idx], self.n_classes, list(self.class_names), self.target_name,
        )

    @classmethod
    def from_arrays(cls, X: np.ndarray, y: np.ndarray, n_classes: int | None = None,
                    feature_names: list[str] | None = None,
                    class_names: list[str] | None = None,
                    target_name: str = "target") -> "Dataset":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if n_classes is None:
            n_classes = int(y.max()) + 1
        if feature_names is None:
            feature_names = [f"f{i}" for i in range(X.shape[1])]
        if class_names is None:
            class_names = [str(k) for k in range(n_classes)]
        return cls(
            feature_names, [NUMERIC] * X.shape[1],
            [X[:, i].copy() for i in range(X.shape[1])],
            y, n_classes, class_names, target_name,
        )


def _read_table(path):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty; a header row is required") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            rows.append(row)
    if not rows:
        raise ValueError(f"{path} contains no data rows")
    return header, rows


def _parse_column(cells):
    """(kind, values): numeric float64 with NaN gaps, or object with None gaps."""
    missing = [c.strip().lower() in NA_TOKENS for c in cells]
    try:
        values = np.array(
            [np.nan if m else float(c) for c, m in zip(cells, missing)],
            dtype=np.float64)
        return NUMERIC, values
    except ValueError:
        values = np.array([None if m else c.strip() for c, m in zip(cells, missing)],
                          dtype=object)
        return CATEGORICAL, values


def load_csv(path, target_column: str) -> Dataset:
    """Read a headered CSV; columns whose non-missing cells all parse as
    numbers become numeric, the rest categorical.  Missing cells (empty, NA,
    ?, ...) are recorded for later imputation."""
    header, rows = _read_table(path)
    if target_column not in header:
        raise ValueError(f"target column {target_column!r} not found in {path}")

    t_pos = header.index(target_column)
    raw_target = [r[t_pos] for r in rows]
    if any(v.strip().lower() in NA_TOKENS for v in raw_target):
        raise ValueError(f"target column {target_column!r} contains missing values")
    class_names = _sorted_labels(set(raw_target))
    class_id = {v: i for i, v in enumerate(class_names)}
    y = np.array([class_id[v] for v in raw_target], dtype=np.int64)

    feature_names, kinds, columns = [], [], []
    for pos, name in enumerate(header):
        if pos == t_pos:
            continue
        kind, values = _parse_column([r[pos] for r in rows])
        feature_names.append(name)
        kinds.append(kind)
        columns.append(values)
    return Dataset(feature_names, kinds, columns, y, len(class_names),
                   class_names, target_column)


def load_csv_features(path) -> Dataset:
    """Read a CSV of features only (no target required); labels are dummies."""
    header, rows = _read_table(path)
    feature_names, kinds, columns = [], [], []
    for pos, name in enumerate(header):
        kind, values = _parse_column([r[pos] for r in rows])
        feature_names.append(name)
        kinds.append(kind)
        columns.append(values)
    dummy_y = np.zeros(len(rows), dtype=np.int64)
    return Dataset(feature_names, kinds, columns, dummy_y, 1, ["?"], "")


def _sorted_labels(labels: set[str]) -> list[str]:
    """Deterministic class ordering: numeric when every label parses, else lexicographic."""
    try:
        return sorted(labels, key=float)
    except ValueError:
        return sorted(labels)


# ---------------------------------------------------------------------------
# inverse standard-normal CDF
# ---------------------------------------------------------------------------

# Wichura's rational approximations (relative error ~1e-16, far inside the
# ~1e-9 class this transform needs).
_PPND_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
           1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
           3.3430575583588128105e4, 2.5090809287301226727e3)
_PPND_B = (4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
           2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
           5.2264952788528545610e3)
_PPND_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
           3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
           2.27238449892691845833e-2, 7.74545014278341407640e-4)
_PPND_D = (2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
           1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
           1.05075007164441684324e-9)
_PPND_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
           2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
           2.71155556874348757815e-5, 2.01033439929228813265e-7)
_PPND_F = (5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
           7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
           2.04426310338993978564e-15)


def _poly(coeffs, r):
    out = np.full_like(r, coeffs[-1])
    for c in coeffs[-2::-1]:
        out = out * r + c
    return out


def normal_quantile(q):
    """Inverse CDF of the standard normal for q in (0, 1)."""
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any(q_arr <= 0.0) or np.any(q_arr >= 1.0):
        raise ValueError("normal_quantile requires 0 < q < 1")
    shifted = q_arr - 0.5
    central = np.abs(shifted) <= 0.425
    out = np.empty_like(q_arr)

    r = 0.180625 - shifted * shifted
    out = np.where(central, shifted * _poly(_PPND_A, r) / (_poly((1.0,) + _PPND_B, r)), out)

    tail = np.minimum(q_arr, 1.0 - q_arr)
    # keep the argument valid everywhere; the central branch result wins there
    rt = np.sqrt(-np.log(np.where(central, 0.25, tail)))
    near = rt <= 5.0
    val_near = _poly(_PPND_C, rt - 1.6) / _poly((1.0,) + _PPND_D, rt - 1.6)
    val_far = _poly(_PPND_E, rt - 5.0) / _poly((1.0,) + _PPND_F, rt - 5.0)
    val = np.where(near, val_near, val_far)
    val = np.where(shifted < 0, -val, val)
    out = np.where(central, out, val)
    return float(out) if np.isscalar(q) or q_arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# per-column transforms
# ---------------------------------------------------------------------------

def leave_one_out_encode(values: np.ndarray, targets: np.ndarray):
    """Fit a leave-one-out target encoding on training cells.

    Each training cell becomes the mean target of the *other* rows sharing its
    category; singleton categories fall back to the global target mean.
    Returns (encoded training column, category->mean table, global mean).
    """
    targets = np.asarray(targets, dtype=np.float64)
    global_mean = float(targets.mean())
    sums: dict = {}
    counts: dict = {}
    for v, t in zip(values, targets):
        sums[v] = sums.get(v, 0.0) + float(t)
        counts[v] = counts.get(v, 0) + 1
    encoded = np.empty(len(values), dtype=np.float64)
    for i, (v, t) in enumerate(zip(values, targets)):
        if counts[v] <= 1:
            encoded[i] = global_mean
        else:
            encoded[i] = (sums[v] - float(t)) / (counts[v] - 1)
    table = {v: sums[v] / counts[v] for v in counts}
    return encoded, table, global_mean


def quantile_normal_fit(values: np.ndarray) -> np.ndarray:
    """Reference order statistics of a training column (at most 1000 points)."""
    values = np.asarray(values, dtype=np.float64)
    n_refs = min(len(values), MAX_QUANTILE_REFS)
    return np.quantile(values, np.linspace(0.0, 1.0, n_refs)) if n_refs > 1 \
        else np.repeat(values[:1], 2)


def quantile_normal_apply(values, refs: np.ndarray):
    """Map values through the empirical CDF of the references, then through
    the inverse normal CDF.  Constant training columns map everything to 0."""
    arr = np.asarray(values, dtype=np.float64)
    if refs[0] == refs[-1]:
        out = np.zeros_like(arr)
        return float(out) if arr.ndim == 0 else out
    grid = np.linspace(0.0, 1.0, len(refs))
    q = np.interp(arr, refs, grid)
    q = np.clip(q, QUANTILE_CLIP, 1.0 - QUANTILE_CLIP)
    out = normal_quantile(q)
    return float(out) if arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# fitted preprocessing model
# ---------------------------------------------------------------------------

@dataclass
class PreprocessModel:
    """Everything fitted on the training rows, enough to transform new data."""

    feature_names: list[str]
    kinds: list[str]
    impute_values: list          # median (numeric) or mode (categorical)
    encodings: list              # None or (category->mean dict, global mean)
    quantile_refs: list          # per-column reference order statistics
    dropped_columns: list[str]
    target_name: str
    class_names: list[str]

    @classmethod
    def fit_transform(cls, train: Dataset):
        """Fit on a training dataset and produce its transformed version.

        Training categorical cells are encoded leave-one-out; by contrast
        ``transform`` later applies plain per-category means.
        """
        names, kinds, imputes, encodings, refs = [], [], [], [], []
        dropped: list[str] = []
        out_cols: list[np.ndarray] = []
        targets = train.y.astype(np.float64)

        for name, kind, col in zip(train.feature_names, train.kinds, train.columns):
            if kind == NUMERIC:
                present = col[np.isfinite(col)]
                if present.size == 0:
                    dropped.append(name)
                    continue
                med = float(np.median(present))
                filled = np.where(np.isfinite(col), col, med)
                encoded, enc = filled, None
            else:
                present = [v for v in col if v is not None]
                if not present:
                    dropped.append(name)
                    continue
                med = _mode(present)
                filled = np.array([v if v is not None else med for v in col], dtype=object)
                encoded, table, global_mean = leave_one_out_encode(filled, targets)
                enc = (table, global_mean)
            ref = quantile_normal_fit(encoded)
            out_cols.append(quantile_normal_apply(encoded, ref))
            names.append(name)
            kinds.append(kind)
            imputes.append(med)
            encodings.append(enc)
            refs.append(ref)

        if dropped:
            warnings.warn(f"dropping all-missing column(s): {dropped}", stacklevel=2)
        model = cls(names, kinds, imputes, encodings, refs, dropped,
                    train.target_name, list(train.class_names))
        transformed = Dataset(
            list(names), [NUMERIC] * len(names), out_cols,
            train.y.copy(), train.n_classes, list(train.class_names), train.target_name,
        )
        return model, transformed

    def transform(self, data: Dataset) -> Dataset:
        """Apply the fitted pipeline to new rows (pure, idempotent on raw data)."""
        by_name = {n: i for i, n in enumerate(data.feature_names)}
        missing = [n for n in self.feature_names if n not in by_name]
        if missing:
            raise ValueError(f"input is missing expected columns: {missing}")
        out_cols = []
        for name, kind, imp, enc, ref in zip(
                self.feature_names, self.kinds, self.impute_values,
                self.encodings, self.quantile_refs):
            col = data.columns[by_name[name]]
            if kind == NUMERIC:
                col = np.asarray(col, dtype=np.float64)
                filled = np.where(np.isfinite(col), col, imp)
                encoded = filled
            else:
                table, global_mean = enc
                filled = [v if v is not None else imp for v in col]
                encoded = np.array(
                    [table.get(v, global_mean) for v in filled], dtype=np.float64)
            out_cols.append(quantile_normal_apply(encoded, ref))
        return Dataset(
            list(self.feature_names), [NUMERIC] * len(self.feature_names), out_cols,
            data.y.copy(), data.n_classes, list(data.class_names), data.target_name,
        )

    def to_dict(self) -> dict:
        encs = []
        for enc in self.encodings:
            if enc is None:
                encs.append(None)
            else:
                table, global_mean = enc
                encs.append({"table": {str(k): v for k, v in table.items()},
                             "global_mean": global_mean})
        return {
            "feature_names": self.feature_names,
            "kinds": self.kinds,
            "impute_values": self.impute_values,
            "encodings": encs,
            "quantile_refs": [r.tolist() for r in self.quantile_refs],
            "dropped_columns": self.dropped_columns,
            "target_name": self.target_name,
            "class_names": self.class_names,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessModel":
        encodings = []
        for enc in d["encodings"]:
            if enc is None:
                encodings.append(None)
            else:
                encodings.append((dict(enc["table"]), enc["global_mean"]))
        return cls(
            list(d["feature_names"]), list(d["kinds"]), list(d["impute_values"]),
            encodings, [np.array(r, dtype=np.float64) for r in d["quantile_refs"]],
            list(d["dropped_columns"]), d["target_name"], list(d["class_names"]),
        )


def _mode(values) -> str:
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    return sorted(v for v, c in counts.items() if c == top)[0]


# ---------------------------------------------------------------------------
# splitting and rebalancing
# ---------------------------------------------------------------------------

class SplitIndices(NamedTuple):
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def split_dataset(dataset: Dataset, seed: int) -> SplitIndices:
    """Disjoint train/val/test index sets: 20% test, then 20% of the rest as
    validation (both rounded down)."""
    n = dataset.n_rows
    if n < 10:
        raise ValueError("need at least 10 rows to split")
    perm = np.random.default_rng(seed).permutation(n)
    n_test = int(n * 0.2)
    n_val = int((n - n_test) * 0.2)
    return SplitIndices(
        train=perm[n_test + n_val:],
        val=perm[n_test:n_test + n_val],
        test=perm[:n_test],
    )


def should_rebalance(y: np.ndarray, n_classes: int) -> bool:
    """SMOTE trigger: minority class share below 25/(c-1) percent."""
    counts = np.bincount(y, minlength=n_classes)
    counts = counts[counts > 0]
    share = counts.min() / counts.sum()
    return share < 0.25 / (n_classes - 1)


def smote_rebalance(X: np.ndarray, y: np.ndarray, k: int = SMOTE_K,
                    seed: int = 0):
    """Oversample every non-majority class to the majority count.

    Synthetic points interpolate between a class member and one of its k
    nearest same-class neighbours (Euclidean): x + u * (neighbour - x) with
    u uniform in [0, 1).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    counts = np.bincount(y)
    target = counts.max()
    new_X, new_y = [X], [y]
    for cls in np.flatnonzero(counts):
        need = target - counts[cls]
        if need == 0:
            continue
        members = np.flatnonzero(y == cls)
        if members.size < 2:
            raise ValueError(
                f"class {cls} has {members.size} sample(s); SMOTE needs at least 2")
        pts = X[members]
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        k_eff = min(k, members.size - 1)
        nn = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
        base = rng.integers(0, members.size, size=need)
        pick = rng.integers(0, k_eff, size=need)
        u = rng.random(need)
        neigh = pts[nn[base, pick]]
        synth = pts[base] + u[:, None] * (neigh - pts[base])
        new_X.append(synth)
        new_y.append(np.full(need, cls, dtype=np.int64))
    return np.vstack(new_X), np.concatenate(new_y)
