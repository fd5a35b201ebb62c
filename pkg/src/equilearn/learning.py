"""Equivariant learning from a single ground state.

For each orbit class ``[I]`` of observable supports, every group element ``g``
turns the single training state ``rho(x0)`` into one labelled example: the
local parameter patch of ``g . x0`` around ``I`` paired with ``<O_{gI}>`` at
``x0``.  One random-Fourier-feature LASSO model per class is trained on these
rows and reused for every member of the class via ``f(O_{gI}, x) = f(O_I, g . x)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigurationError, ConvergenceError
from .lattice import Group, OrbitClass, build_group, orbits, ring_distance
from .models import ModelSpec, ObservableSpec, ops_norm
from .quantum import GroundStateSolution, ops_expectation, reduced_density_matrix
from .shadows import ShadowRecord, TWO_SITE_PAULIS, estimate_ops, pauli_matrix

__all__ = [
    "LearnerConfig",
    "PatchLayout",
    "OrbitDataset",
    "FeatureMap",
    "OrbitModel",
    "ObservableModel",
    "PairRDMModel",
    "build_patch_layout",
    "build_dataset",
    "make_feature_map",
    "rff_features",
    "lasso_fit",
    "train_orbit_model",
    "predict_term",
    "predict_observable",
    "fit_observable",
    "fit_pair_rdm_models",
    "models_to_json",
    "models_from_json",
]

DEFAULT_LAMBDAS = tuple(float(v) for v in np.logspace(-4, 0, 25))


@dataclass(frozen=True)
class LearnerConfig:
    delta: int = 2
    n_features: int = 200
    gamma: float = 0.2
    lambdas: tuple = DEFAULT_LAMBDAS
    folds: int = 5
    seed: int = 0
    standardize: bool = False
    tol: float = 1e-9
    max_iter: int = 100_000
    cv_rule: str = "min"

    def to_dict(self):
        d = dict(self.__dict__)
        d["lambdas"] = list(self.lambdas)
        return d

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        if "lambdas" in doc:
            doc["lambdas"] = tuple(float(v) for v in doc["lambdas"])
        return cls(**doc)


# ---------------------------------------------------------------------------
# patches


@dataclass(frozen=True)
class PatchLayout:
    """Parameter slots near an orbit representative and their images under ``G``.

    ``transport[k]`` lists, in canonical order, the slot indices of
    ``group[k]`` applied to the representative's patch, so the patch of
    ``g . x`` is ``x[transport[k]]``.  ``member_elements[J]`` holds the indices
    of all group elements carrying the representative onto ``J``.
    """

    representative: tuple[int, ...]
    slots: tuple[int, ...]
    delta: int
    transport: np.ndarray
    group: Group = field(repr=False)
    member_elements: dict = field(repr=False, compare=False)

    @property
    def size(self):
        return len(self.slots)

    def patch(self, x, k):
        return np.asarray(x)[self.transport[k]]


def _signed_offset(site, anchor, n):
    return (site - anchor + n // 2) % n - n // 2


def build_patch_layout(spec: ModelSpec, orbit_class: OrbitClass, delta, group=None):
    """Slots whose sites all lie within ring distance ``delta`` of the representative.

    Canonical order: by signed offsets of the slot's sites from the first
    representative site, then by slot kind.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    group = group or build_group(spec.n)
    n = spec.n
    rep = orbit_class.representative

    def dist(i):
        return min(ring_distance(i, r, n) for r in rep)

    chosen = [k for k, s in enumerate(spec.slots) if max(dist(i) for i in s.sites) <= delta]
    chosen.sort(key=lambda k: (sorted(_signed_offset(i, rep[0], n) for i in spec.slots[k].sites),
                               spec.slots[k].kind))
    chosen = np.array(chosen, dtype=np.intp)
    transport = np.stack([spec.param_permutation(g)[chosen] for g in group])
    stab = orbit_class.stabilizer
    member_elements = {
        J: np.array([group.index(group.compose(g, s)) for s in stab], dtype=np.intp)
        for g, J in orbit_class.members
    }
    return PatchLayout(rep, tuple(int(k) for k in chosen), int(delta), transport, group,
                       member_elements)


# ---------------------------------------------------------------------------
# datasets


@dataclass
class OrbitDataset:
    orbit_class: OrbitClass
    layout: PatchLayout
    ops: tuple
    patches: np.ndarray
    targets: np.ndarray
    elements: np.ndarray
    source: str = "exact"
    degenerate: bool = False

    def __len__(self):
        return len(self.targets)


def build_dataset(spec, x0, gs: GroundStateSolution, orbit_class, layout, ops,
                  source="exact"):
    """Training rows ``(patch of g . x0, <O_{gI}>(x0))`` for every ``g`` in ``G``.

    ``source`` is ``"exact"`` (expectations in the solved state) or a
    :class:`ShadowRecord` of that state.  Rows whose patch and target coincide
    exactly are kept once.
    """
    x0 = spec.check_params(x0)
    group = layout.group
    n = spec.n
    rep = orbit_class.representative
    if isinstance(source, ShadowRecord):
        tag = "shadow"

        def target(sites):
            return estimate_ops(source, sites, ops)
    elif source == "exact":
        tag = "exact"

        def target(sites):
            return ops_expectation(gs.state, sites, ops)
    else:
        raise ConfigurationError(f"unknown data source {source!r}")

    patches, targets, elements, seen = [], [], [], set()
    cache = {}
    for k, g in enumerate(group):
        sites = tuple(g.site(i, n) for i in rep)
        if sites not in cache:
            cache[sites] = target(sites)
        p = layout.patch(x0, k)
        key = (p.tobytes(), cache[sites])
        if key in seen:
            continue
        seen.add(key)
        patches.append(p)
        targets.append(cache[sites])
        elements.append(k)
    return OrbitDataset(orbit_class, layout, tuple(ops), np.array(patches), np.array(targets),
                        np.array(elements, dtype=np.intp), tag, bool(gs.degenerate))


# ---------------------------------------------------------------------------
# features


@dataclass(frozen=True)
class FeatureMap:
    frequencies: np.ndarray
    offsets: np.ndarray
    gamma: float
    seed: int

    @property
    def R(self):
        return self.offsets.shape[0]


def make_feature_map(patch_size, R, gamma, seed):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((R, patch_size))
    b = rng.uniform(0.0, 2 * np.pi, R)
    return FeatureMap(W, b, float(gamma), int(seed))


def rff_features(patch, fmap):
    """``sqrt(2/R) cos(gamma W patch + b)`` for one patch or a stack of patches."""
    patch = np.asarray(patch, dtype=float)
    if patch.shape[-1] != fmap.frequencies.shape[1]:
        from .errors import DimensionError

        raise DimensionError(
            f"patch length {patch.shape[-1]} does not match feature map input "
            f"{fmap.frequencies.shape[1]}")
    return np.sqrt(2.0 / fmap.R) * np.cos(fmap.gamma * patch @ fmap.frequencies.T + fmap.offsets)


# ---------------------------------------------------------------------------
# LASSO


@njit(cache=True)
def _cd_covariance(G, c, lam, w, tol, max_iter):
    p = w.shape[0]
    grad = c - G @ w
    for it in range(max_iter):
        max_change = 0.0
        for j in range(p):
            gjj = G[j, j]
            if gjj <= 0.0:
                continue
            wj = w[j]
            z = grad[j] + gjj * wj
            if z > lam:
                new = (z - lam) / gjj
            elif z < -lam:
                new = (z + lam) / gjj
            else:
                new = 0.0
            delta = new - wj
            if delta != 0.0:
                w[j] = new
                for k in range(p):
                    grad[k] -= delta * G[k, j]
                if abs(delta) > max_change:
                    max_change = abs(delta)
        if max_change <= tol:
            return it + 1, True
    return max_iter, False


def _duality_gap(Xc, yc, w, lam):
    N = Xc.shape[0]
    r = yc - Xc @ w
    corr = np.abs(Xc.T @ r).max() if Xc.shape[1] else 0.0
    s = 1.0 if corr <= N * lam or corr == 0 else N * lam / corr
    primal = r @ r / (2 * N) + lam * np.abs(w).sum()
    nu = s * r / N
    dual = nu @ yc - N * (nu @ nu) / 2
    return float(primal - dual)


def _center(X, y, fit_intercept):
    if fit_intercept:
        xm, ym = X.mean(axis=0), y.mean()
    else:
        xm, ym = np.zeros(X.shape[1]), 0.0
    return X - xm, y - ym, xm, ym


def _lasso(X, y, lam, tol, max_iter, fit_intercept=True, w0=None, gram=None):
    Xc, yc, xm, ym = _center(X, y, fit_intercept)
    N = X.shape[0]
    if gram is None:
        gram = (Xc.T @ Xc / N, Xc.T @ yc / N)
    G, c = gram
    w = np.zeros(X.shape[1]) if w0 is None else np.array(w0, dtype=float)
    n_iter, ok = _cd_covariance(np.ascontiguousarray(G), c, float(lam), w, float(tol), int(max_iter))
    b = ym - xm @ w
    return w, b, n_iter, ok, (Xc, yc)


def lasso_fit(features, targets, lam, tol=1e-10, max_iter=100_000, fit_intercept=True):
    """Minimize ``(1/2N)||y - X w - b||^2 + lam ||w||_1`` by cyclic coordinate descent.

    Uses covariance updates on the centred Gram matrix.  Converged when no
    coordinate moves by more than ``tol`` in a full sweep.  Returns ``(w, b)``.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1 or y.shape != (X.shape[0],):
        raise ValueError(f"bad LASSO inputs: features {X.shape}, targets {y.shape}")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    w, b, n_iter, ok, (Xc, yc) = _lasso(X, y, lam, tol, max_iter, fit_intercept)
    if not ok:
        gap = _duality_gap(Xc, yc, w, lam)
        raise ConvergenceError(
            f"coordinate descent did not converge in {max_iter} sweeps (duality gap {gap:.3e})",
            gap)
    return w, b


# ---------------------------------------------------------------------------
# per-class models


@dataclass
class OrbitModel:
    orbit_class: OrbitClass
    layout: PatchLayout
    ops: tuple
    feature_map: FeatureMap
    weights: np.ndarray
    intercept: float
    lam: float
    norm_bound: float
    cv_lambdas: np.ndarray = None
    cv_mse: np.ndarray = None
    n_rows: int = 0
    patch_shift: np.ndarray = None
    patch_scale: np.ndarray = None
    converged: bool = True

    @property
    def cv_rmse(self):
        if self.cv_mse is None or not len(self.cv_mse):
            return float("nan")
        return float(np.sqrt(np.min(self.cv_mse)))

    @property
    def sparsity(self):
        return float(np.mean(self.weights == 0)) if len(self.weights) else 1.0

    def _features(self, patches):
        patches = np.asarray(patches, dtype=float)
        if self.patch_shift is not None:
            patches = (patches - self.patch_shift) / self.patch_scale
        return rff_features(patches, self.feature_map)

    def predict_patches(self, patches):
        """Raw affine model output, unclipped."""
        return self._features(patches) @ self.weights + self.intercept


def _class_seed(seed, rep, salt=0):
    return int(np.random.SeedSequence([int(seed), salt, len(rep), *rep]).generate_state(1)[0])


def _folds(groups, k, seed, rep):
    """Split rows into ``k`` folds, keeping rows of the same group together."""
    rng = np.random.default_rng(_class_seed(seed, rep, salt=1))
    labels = np.unique(groups)
    perm = rng.permutation(len(labels))
    fold_of = {labels[p]: i % k for i, p in enumerate(perm)}
    assign = np.array([fold_of[g] for g in groups])
    return [np.nonzero(assign == i)[0] for i in range(k)]


def _row_groups(data):
    """Index of the orbit member each row's target belongs to."""
    group = data.layout.group
    n = group.n
    rep = data.orbit_class.representative
    keys = [tuple(sorted(group[k].site(i, n) for i in rep)) for k in data.elements]
    index = {key: j for j, key in enumerate(dict.fromkeys(keys))}
    return np.array([index[key] for key in keys])


def train_orbit_model(data: OrbitDataset, config: LearnerConfig = LearnerConfig(),
                      feature_map=None):
    """Fit one RFF + LASSO model, choosing lambda by k-fold cross-validation.

    Rows sharing a target site set (images under the stabilizer) are kept in
    the same fold.  With fewer such groups than folds this becomes
    leave-one-group-out; a single row gives a constant model.
    """
    rep = data.orbit_class.representative
    N = len(data)
    norm = ops_norm(data.ops)
    patches = data.patches
    shift = scale = None
    if config.standardize and N > 1:
        shift = patches.mean(axis=0)
        scale = patches.std(axis=0)
        scale[scale == 0] = 1.0
    if feature_map is None:
        feature_map = make_feature_map(data.layout.size, config.n_features, config.gamma,
                                       _class_seed(config.seed, rep))
    model = OrbitModel(data.orbit_class, data.layout, data.ops, feature_map,
                       np.zeros(feature_map.R), float(np.mean(data.targets)) if N else 0.0,
                       0.0, norm, n_rows=N, patch_shift=shift, patch_scale=scale)
    if N < 2:
        import warnings

        warnings.warn(f"orbit class {rep} has {N} training row(s); using a constant model",
                      stacklevel=2)
        model.cv_lambdas = np.array([])
        model.cv_mse = np.array([])
        return model

    X = model._features(patches)
    y = data.targets
    lambdas = np.array(sorted(config.lambdas, reverse=True), dtype=float)
    groups = _row_groups(data)
    n_groups = len(np.unique(groups))
    if n_groups < 2:
        groups = np.arange(N)
        n_groups = N
    k = min(config.folds, n_groups)
    folds = _folds(groups, k, config.seed, rep)
    sse = np.zeros(len(lambdas))
    fold_mse = np.zeros((len(folds), len(lambdas)))
    for fi, val in enumerate(folds):
        train = np.setdiff1d(np.arange(N), val)
        Xt, yt = X[train], y[train]
        Xc, yc, xm, ym = _center(Xt, yt, True)
        gram = (Xc.T @ Xc / len(train), Xc.T @ yc / len(train))
        w = None
        for li, lam in enumerate(lambdas):
            w, b, _, _, _ = _lasso(Xt, yt, lam, config.tol, config.max_iter, True, w, gram)
            err = np.sum((X[val] @ w + b - y[val]) ** 2)
            sse[li] += err
            fold_mse[fi, li] = err / max(len(val), 1)
    mse = sse / N
    best = int(np.argmin(mse))
    if config.cv_rule == "1se":
        # largest lambda within one standard error of the minimum
        se = fold_mse[:, best].std(ddof=1) / np.sqrt(len(folds)) if len(folds) > 1 else 0.0
        best = int(np.nonzero(mse <= mse[best] + se)[0][0])
    # warm-start along the path down to the chosen lambda for the final fit
    w = None
    ok = True
    Xc, yc, xm, ym = _center(X, y, True)
    gram = (Xc.T @ Xc / N, Xc.T @ yc / N)
    for lam in lambdas[: best + 1]:
        w, b, _, ok, _ = _lasso(X, y, lam, config.tol, config.max_iter, True, w, gram)
    model.weights = w
    model.intercept = float(b)
    model.lam = float(lambdas[best])
    model.cv_lambdas = lambdas
    model.cv_mse = mse
    model.converged = bool(ok)
    return model


def _member_key(member):
    if isinstance(member, tuple) and len(member) == 2 and not isinstance(member[0], int):
        member = member[1]
    return tuple(sorted(member))


def predict_term(model: OrbitModel, x, member):
    """Prediction of ``<O_J>(x)`` for a class member ``J``.

    ``member`` is a ``(g, J)`` pair or a site set.  The model output is
    averaged over all group elements mapping the representative onto ``J``,
    which makes ``f(O_{gI}, x) = f(O_I, g . x)`` hold for every ``g``.
    Result is clipped to the operator-norm bound of ``O_I``.
    """
    elems = model.layout.member_elements[_member_key(member)]
    patches = np.asarray(x, dtype=float)[model.layout.transport[elems]]
    value = float(np.mean(model.predict_patches(patches)))
    return float(np.clip(value, -model.norm_bound, model.norm_bound))


# ---------------------------------------------------------------------------
# observables


def _ops_on_sites(sites, ops):
    return sorted((w, tuple(sorted(zip(sites, label)))) for w, label in ops)


def observable_classes(obs: ObservableSpec, group: Group):
    """Orbit classes of the observable's term supports, plus per-term lookup."""
    supports = [tuple(sorted(t.sites)) for t in obs.terms]
    if len(set(supports)) != len(supports):
        raise ConfigurationError("observable has several terms on the same site set")
    classes = orbits(supports, group)
    where = {}
    for ci, cls in enumerate(classes):
        for _, J in cls.members:
            where[J] = ci
    return classes, [where[s] for s in supports]


def _rep_ops(obs, cls):
    for t in obs.terms:
        if tuple(sorted(t.sites)) == cls.representative:
            return t
    raise ConfigurationError(f"no observable term on representative {cls.representative}")


def _check_transported(obs, cls, group):
    """Each term must be the image of the representative's operator."""
    n = group.n
    rep_term = _rep_ops(obs, cls)
    by_support = {tuple(sorted(t.sites)): t for t in obs.terms}
    for g in group:
        J = tuple(sorted(g.site(i, n) for i in cls.representative))
        t = by_support.get(J)
        if t is None:
            continue
        image = [g.site(i, n) for i in rep_term.sites]
        if _ops_on_sites(image, rep_term.ops) != _ops_on_sites(t.sites, t.ops) \
                or t.coeff != rep_term.coeff:
            raise ConfigurationError(
                f"term on {t.sites} is not the image of the term on {rep_term.sites}; "
                "the observable is not equivariant")


@dataclass
class ObservableModel:
    """One :class:`OrbitModel` per class of observable supports."""

    spec: ModelSpec
    obs: ObservableSpec
    models: dict
    term_class: list = field(repr=False)
    predict_calls: int = 0

    def predict_terms(self, x):
        return _predict_terms(self.models, np.asarray(x, dtype=float), self.obs)

    def predict(self, x):
        return predict_observable(self.models, x, self.obs, self.spec)


def _predict_terms(models, x, obs, counter=None):
    out = np.empty(len(obs.terms))
    groups = {}
    for k, t in enumerate(obs.terms):
        J = tuple(sorted(t.sites))
        for model in models.values():
            if J in model.layout.member_elements:
                groups.setdefault(id(model), (model, []))[1].append((k, J))
                break
        else:
            raise ConfigurationError(f"no trained model covers the term on {t.sites}")
    for model, items in groups.values():
        elems = np.stack([model.layout.member_elements[J] for _, J in items])
        patches = x[model.layout.transport[elems]]
        raw = model.predict_patches(patches.reshape(-1, patches.shape[-1]))
        vals = raw.reshape(elems.shape).mean(axis=1)
        vals = np.clip(vals, -model.norm_bound, model.norm_bound)
        for (k, _), v in zip(items, vals):
            out[k] = v
    return out


def predict_observable(models, x, obs: ObservableSpec, spec: ModelSpec = None):
    """``normalization * sum_I coeff_I(x) * f_hat(O_I, x)``.

    ``models`` maps class representatives to :class:`OrbitModel`; coefficients
    come from the Hamiltonian when the observable is tied to one.
    """
    x = np.asarray(x, dtype=float)
    if spec is not None:
        x = spec.check_params(x)
    models = models.models if isinstance(models, ObservableModel) else models
    coeffs = obs.term_coefficients(x)
    terms = _predict_terms(models, x, obs)
    return float(obs.normalization * coeffs @ terms)


def fit_observable(spec, x0, gs, obs, config: LearnerConfig = LearnerConfig(), source="exact",
                   group=None):
    """Train one model per orbit class of the observable's supports from a single state."""
    group = group or build_group(spec.n)
    classes, term_class = observable_classes(obs, group)
    models = {}
    for cls in classes:
        _check_transported(obs, cls, group)
        rep_term = _rep_ops(obs, cls)
        # orient the template along the representative's sorted sites
        order = np.argsort(rep_term.sites)
        ops = tuple((w, "".join(label[i] for i in order)) for w, label in rep_term.ops)
        layout = build_patch_layout(spec, cls, config.delta, group)
        data = build_dataset(spec, x0, gs, cls, layout, ops, source)
        models[cls.representative] = train_orbit_model(data, config)
    return ObservableModel(spec, obs, models, term_class)


# ---------------------------------------------------------------------------
# two-site reduced density matrices


@dataclass
class PairRDMModel:
    """Per-Pauli models predicting the two-site RDM for one class of site pairs."""

    orbit_class: OrbitClass
    layout: PatchLayout
    models: dict

    def predict_paulis(self, x, sites):
        """Predicted Pauli coefficients ``<P>`` on the pair ordered as ``sorted(sites)``."""
        x = np.asarray(x, dtype=float)
        J = tuple(sorted(sites))
        elems = self.layout.member_elements[J]
        group = self.layout.group
        n = group.n
        r0 = self.orbit_class.representative[0]
        patches = x[self.layout.transport[elems]]
        swapped = np.array([group[k].site(r0, n) != J[0] for k in elems])
        out = {}
        raw = {label: m.predict_patches(patches) for label, m in self.models.items()}
        for label, m in self.models.items():
            swap_label = label[::-1]
            vals = np.where(swapped, raw[swap_label], raw[label]) if swap_label in raw else raw[label]
            out[label] = float(np.clip(np.mean(vals), -1.0, 1.0))
        return out

    def predict_rdm(self, x, sites):
        """Predicted RDM with basis ordered as ``sorted(sites)``."""
        coeffs = self.predict_paulis(x, sites)
        rho = np.eye(4, dtype=complex)
        for label, c in coeffs.items():
            rho += c * pauli_matrix(label)
        return rho / 4

    def predict_correlation(self, x, i, j):
        rho = self.predict_rdm(x, (i, j))
        C = sum(pauli_matrix(p) for p in ("XX", "YY", "ZZ")) / 3
        return float(np.trace(rho @ C).real)


def fit_pair_rdm_models(spec, x0, gs, config: LearnerConfig = LearnerConfig(), source="exact",
                        group=None, labels=TWO_SITE_PAULIS, pairs=None):
    """Learn two-site RDMs for every class of site pairs from one state.

    Targets are Pauli expectations taken from the exact state or from a shadow
    record of it.  All labels of one class share one feature map.
    """
    group = group or build_group(spec.n)
    n = spec.n
    if pairs is None:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = {}
    for cls in orbits(pairs, group):
        layout = build_patch_layout(spec, cls, config.delta, group)
        fmap = make_feature_map(layout.size, config.n_features, config.gamma,
                                _class_seed(config.seed, cls.representative))
        models = {}
        for label in labels:
            data = build_dataset(spec, x0, gs, cls, layout, ((1.0, label),), source)
            models[label] = train_orbit_model(data, config, feature_map=fmap)
        out[cls.representative] = PairRDMModel(cls, layout, models)
    return out


def exact_pauli_coefficients(state, sites, labels=TWO_SITE_PAULIS):
    rho = reduced_density_matrix(state, sites)
    return {label: float(np.trace(rho @ pauli_matrix(label)).real) for label in labels}


# ---------------------------------------------------------------------------
# serialization


def models_to_json(models, spec):
    """JSON bundle of trained class models (reload with :func:`models_from_json`)."""
    bundle = {"model": spec.to_dict(), "classes": []}
    for rep, m in models.items():
        bundle["classes"].append({
            "representative": list(rep),
            "ops": [[w, label] for w, label in m.ops],
            "layout": {"slots": list(m.layout.slots), "delta": m.layout.delta},
            "include_reflections": m.layout.group.include_reflections,
            "seed": m.feature_map.seed,
            "gamma": m.feature_map.gamma,
            "frequencies": m.feature_map.frequencies.tolist(),
            "offsets": m.feature_map.offsets.tolist(),
            "weights": m.weights.tolist(),
            "intercept": m.intercept,
            "lambda": m.lam,
            "norm_bound": m.norm_bound,
            "patch_shift": None if m.patch_shift is None else m.patch_shift.tolist(),
            "patch_scale": None if m.patch_scale is None else m.patch_scale.tolist(),
            "diagnostics": {
                "cv_lambdas": [] if m.cv_lambdas is None else list(map(float, m.cv_lambdas)),
                "cv_mse": [] if m.cv_mse is None else list(map(float, m.cv_mse)),
                "n_rows": m.n_rows,
                "sparsity": m.sparsity,
                "converged": m.converged,
            },
        })
    return json.dumps(bundle)


def models_from_json(text, spec):
    doc = json.loads(text)
    out = {}
    for c in doc["classes"]:
        rep = tuple(c["representative"])
        group = build_group(spec.n, c["include_reflections"])
        cls = next(k for k in orbits([rep], group) if k.representative == rep)
        layout = build_patch_layout(spec, cls, c["layout"]["delta"], group)
        if list(layout.slots) != c["layout"]["slots"]:
            raise ConfigurationError(f"stored patch layout for {rep} does not match the model")
        fmap = FeatureMap(np.array(c["frequencies"]), np.array(c["offsets"]), c["gamma"], c["seed"])
        diag = c["diagnostics"]
        out[rep] = OrbitModel(
            cls, layout, tuple((w, label) for w, label in c["ops"]), fmap,
            np.array(c["weights"]), c["intercept"], c["lambda"], c["norm_bound"],
            np.array(diag["cv_lambdas"]), np.array(diag["cv_mse"]), diag["n_rows"],
            None if c["patch_shift"] is None else np.array(c["patch_shift"]),
            None if c["patch_scale"] is None else np.array(c["patch_scale"]),
            diag["converged"])
    return out
