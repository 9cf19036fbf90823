"""Dataset ingestion, descriptor vectorization and synthetic data generation.

Two on-disk formats are supported:

* numeric CSV with header ``id,y,f1,...,fd`` and optional leading metadata
  comments (``# name=...``, ``# provenance=...``, ``# y_range=lo,hi``);
* descriptor text with one molecule per line, ``id<TAB>y<TAB>token token ...``,
  where tokens are bracketed signature strings such as ``[C]([C]=[C])``.

Targets are the scalar reward per molecule (negated log IC50 for the assay
datasets).  A declared ``y_range`` is enforced on load.  For live advisory
campaigns where the truth is not yet known, ``load_dataset`` can accept
blank y cells, which become NaN.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, InputError
from .gp import GPBelief, KernelSpec

PROVENANCES = ("real", "projected", "synthetic")


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Candidate molecules: unique ids, equal-dimension features, rewards.

    ``targets`` may contain NaN only for live campaigns where the assay
    outcome is not yet known; simulation entry points reject NaN.
    """

    name: str
    ids: tuple[str, ...]
    features: np.ndarray
    targets: np.ndarray
    provenance: str = "real"
    y_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        feats = _frozen(np.atleast_2d(np.asarray(self.features, dtype=float)))
        targ = _frozen(np.asarray(self.targets, dtype=float).ravel())
        ids = tuple(str(i) for i in self.ids)
        if not (len(ids) == feats.shape[0] == targ.size):
            raise DataError(
                f"inconsistent dataset: {len(ids)} ids, {feats.shape[0]} feature rows, "
                f"{targ.size} targets"
            )
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise DataError(f"duplicate ids: {dup[:5]}")
        if self.provenance not in PROVENANCES:
            raise DataError(f"provenance must be one of {PROVENANCES}, got {self.provenance!r}")
        if np.isinf(targ).any():
            raise DataError("targets must not be infinite")
        if self.y_range is not None:
            lo, hi = float(self.y_range[0]), float(self.y_range[1])
            if lo > hi:
                raise DataError(f"y_range lower bound {lo} exceeds upper bound {hi}")
            finite = targ[np.isfinite(targ)]
            if finite.size and (finite.min() < lo - 1e-12 or finite.max() > hi + 1e-12):
                raise DataError(
                    f"targets outside declared y_range [{lo}, {hi}]: "
                    f"observed [{finite.min()}, {finite.max()}]"
                )
            object.__setattr__(self, "y_range", (lo, hi))
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "targets", targ)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def has_truth(self) -> bool:
        """True when every target is known (no NaN)."""
        return bool(np.isfinite(self.targets).all())

    def index_of(self, arm_id: str) -> int:
        try:
            return self.ids.index(arm_id)
        except ValueError:
            raise DataError(f"unknown arm id {arm_id!r}") from None


@dataclass(frozen=True, eq=False)
class ArmSet:
    """The policies' view of the candidates: features plus a tested mask.

    Policies never see targets; the harness keeps the truth.  ``untested``
    is a sorted tuple of global arm indices still available to play.
    """

    ids: tuple[str, ...]
    features: np.ndarray
    untested: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        feats = _frozen(np.atleast_2d(np.asarray(self.features, dtype=float)))
        if feats.shape[0] != len(self.ids):
            raise InputError(f"{len(self.ids)} ids but {feats.shape[0]} feature rows")
        untested = tuple(sorted(int(i) for i in self.untested))
        if untested and (untested[0] < 0 or untested[-1] >= len(self.ids)):
            raise InputError("untested indices out of range")
        if len(set(untested)) != len(untested):
            raise InputError("untested indices must be distinct")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "untested", untested)

    @staticmethod
    def from_dataset(dataset: Dataset) -> "ArmSet":
        return ArmSet(dataset.ids, dataset.features, tuple(range(len(dataset))))

    def __len__(self) -> int:
        return len(self.ids)

    def mark_tested(self, indices) -> "ArmSet":
        """A new ArmSet with the given global indices removed from untested."""
        drop = {int(i) for i in np.atleast_1d(indices)}
        missing = drop - set(self.untested)
        if missing:
            raise InputError(f"arms {sorted(missing)} are not untested")
        return ArmSet(self.ids, self.features, tuple(i for i in self.untested if i not in drop))

    @property
    def untested_features(self) -> np.ndarray:
        return self.features[list(self.untested)]


def standardize_features(X, stats: tuple[np.ndarray, np.ndarray] | None = None):
    """Per-dimension zero-mean unit-variance scaling.

    Statistics are estimated from X when ``stats`` is None and returned so
    they can be frozen and reapplied (e.g. to later query points).
    Constant dimensions keep scale 1 to avoid division by zero.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if stats is None:
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        stats = (mean, std)
    mean, std = stats
    return (X - mean) / std, stats


# ----------------------------------------------------------------------
# CSV format
# ----------------------------------------------------------------------


def _parse_metadata(lines: list[str]) -> dict[str, str]:
    meta = {}
    for line in lines:
        body = line.lstrip("#").strip()
        if "=" in body:
            key, _, value = body.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def load_dataset(path, require_targets: bool = True) -> Dataset:
    """Parse a dataset CSV; see the module docstring for the schema.

    With ``require_targets=False`` blank y cells are allowed and become NaN
    (used for live campaign candidates whose assay outcome is pending).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    comments = [ln for ln in raw if ln.startswith("#")]
    rows = [ln for ln in raw if ln and not ln.startswith("#")]
    if not rows:
        raise DataError(f"{path}: no header row")
    meta = _parse_metadata(comments)
    reader = csv.reader(rows)
    header = next(reader)
    if len(header) < 3 or header[0] != "id" or header[1] != "y":
        raise DataError(f"{path}: header must be id,y,f1,...,fd; got {','.join(header[:4])}...")
    expected_feats = [f"f{i}" for i in range(1, len(header) - 1)]
    if header[2:] != expected_feats:
        raise DataError(f"{path}: feature columns must be f1..f{len(header) - 2} in order")
    d = len(header) - 2

    ids: list[str] = []
    targets: list[float] = []
    feats: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != d + 2:
            raise DataError(f"{path}: row {lineno} has {len(row)} cells, expected {d + 2}")
        ids.append(row[0])
        cell = row[1].strip()
        if cell == "" or cell.lower() == "nan":
            if require_targets:
                raise DataError(f"{path}: row {lineno} column y is missing")
            targets.append(float("nan"))
        else:
            try:
                targets.append(float(cell))
            except ValueError:
                raise DataError(f"{path}: row {lineno} column y is not numeric: {cell!r}") from None
        try:
            feats.append([float(c) for c in row[2:]])
        except ValueError:
            bad = next(c for c in row[2:] if not _is_float(c))
            col = header[2 + row[2:].index(bad)]
            raise DataError(f"{path}: row {lineno} column {col} is not numeric: {bad!r}") from None

    y_range = None
    if "y_range" in meta:
        try:
            lo, hi = (float(v) for v in meta["y_range"].split(","))
        except ValueError:
            raise DataError(f"{path}: malformed y_range metadata {meta['y_range']!r}") from None
        y_range = (lo, hi)
    name = meta.get("name", path.stem)
    provenance = meta.get("provenance", "real")
    try:
        return Dataset(name, tuple(ids), np.array(feats, dtype=float).reshape(len(ids), d),
                       np.array(targets), provenance, y_range)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def save_dataset(dataset: Dataset, path) -> None:
    """Write the CSV schema read by :func:`load_dataset` (exact round trip)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# name={dataset.name}\n")
        fh.write(f"# provenance={dataset.provenance}\n")
        if dataset.y_range is not None:
            fh.write(f"# y_range={dataset.y_range[0]!r},{dataset.y_range[1]!r}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "y"] + [f"f{i}" for i in range(1, dataset.dim + 1)])
        for i, arm_id in enumerate(dataset.ids):
            y = dataset.targets[i]
            writer.writerow([arm_id, "" if np.isnan(y) else repr(float(y))]
                            + [repr(float(v)) for v in dataset.features[i]])


# ----------------------------------------------------------------------
# descriptor text format
# ----------------------------------------------------------------------

_BRACKETS = {"]": "[", ")": "("}


def _check_balanced(token: str) -> bool:
    stack: list[str] = []
    for ch in token:
        if ch in "[(":
            stack.append(ch)
        elif ch in "])":
            if not stack or stack.pop() != _BRACKETS[ch]:
                return False
    return not stack


@dataclass(frozen=True)
class DescriptorTable:
    """Per-molecule signature descriptor tokens with their assay readout."""

    ids: tuple[str, ...]
    targets: tuple[float, ...]
    tokens: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not (len(self.ids) == len(self.targets) == len(self.tokens)):
            raise DataError("ids, targets and token lists must have equal length")
        for mol_id, toks in zip(self.ids, self.tokens):
            if not toks:
                raise DataError(f"molecule {mol_id!r} has no descriptor tokens")
            for tok in toks:
                if not _check_balanced(tok):
                    raise DataError(f"molecule {mol_id!r}: unbalanced brackets in token {tok!r}")


def load_descriptor_table(path) -> DescriptorTable:
    """Parse descriptor text: one molecule per line, ``id<TAB>y<TAB>tok tok ...``."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"descriptor file not found: {path}")
    ids, targets, tokens = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}: line {lineno} has {len(parts)} tab fields, expected 3")
            ids.append(parts[0])
            try:
                targets.append(float(parts[1]))
            except ValueError:
                raise DataError(f"{path}: line {lineno} y is not numeric: {parts[1]!r}") from None
            tokens.append(tuple(t for t in parts[2].split(" ") if t))
    if not ids:
        raise DataError(f"{path}: no molecules")
    return DescriptorTable(tuple(ids), tuple(targets), tuple(tokens))


def vectorize_descriptors(table: DescriptorTable) -> tuple[np.ndarray, tuple[str, ...]]:
    """Token-count features over the corpus vocabulary.

    The vocabulary is the sorted set of distinct tokens across all
    molecules, so the column order is stable for a given corpus.  Returns
    ``(features, vocabulary)`` with one row per molecule.
    """
    vocab = tuple(sorted({tok for toks in table.tokens for tok in toks}))
    col = {tok: j for j, tok in enumerate(vocab)}
    feats = np.zeros((len(table.ids), len(vocab)))
    for i, toks in enumerate(table.tokens):
        for tok in toks:
            feats[i, col[tok]] += 1.0
    return feats, vocab


def dataset_from_descriptors(table: DescriptorTable, name: str) -> Dataset:
    """Bundle vectorized descriptors into a Dataset."""
    feats, _ = vectorize_descriptors(table)
    return Dataset(name, table.ids, feats, np.array(table.targets))


# ----------------------------------------------------------------------
# synthetic generation
# ----------------------------------------------------------------------

SYNTH_JITTER_SCALE = 0.05


def generate_synthetic(source: Dataset, n_points: int, seed: int,
                       kernel: KernelSpec | None = None, noise: float = 0.1) -> Dataset:
    """Grow a synthetic dataset by sampling a GP fitted on a source dataset.

    Candidate features are random convex combinations of source pairs plus
    Gaussian jitter with per-dimension scale ``0.05 * std`` (so candidates
    stay in the populated region of feature space); targets are one joint
    posterior sample of the fitted GP at those candidates.  Deterministic
    in ``seed``.
    """
    if n_points < 1:
        raise InputError(f"n_points must be >= 1, got {n_points}")
    if len(source) == 0:
        raise InputError("source dataset is empty")
    if not source.has_truth:
        raise DataError("source dataset has unknown targets")
    kernel = kernel or KernelSpec()
    rng = np.random.default_rng(seed)

    Xs, stats = standardize_features(source.features)
    belief = GPBelief.from_data(kernel, noise, Xs, source.targets)

    n_src = len(source)
    std = np.where(source.features.std(axis=0) > 0, source.features.std(axis=0), 1.0)
    left = rng.integers(n_src, size=n_points)
    right = rng.integers(n_src, size=n_points)
    lam = rng.uniform(size=n_points)[:, None]
    cands = lam * source.features[left] + (1.0 - lam) * source.features[right]
    cands = cands + rng.standard_normal(cands.shape) * (SYNTH_JITTER_SCALE * std)

    cands_std, _ = standardize_features(cands, stats)
    targets = belief.sample_function_values(cands_std, rng)

    width = max(5, len(str(n_points)))
    ids = tuple(f"syn-{i:0{width}d}" for i in range(1, n_points + 1))
    return Dataset(f"{source.name}-synthetic", ids, cands, targets, provenance="synthetic")
