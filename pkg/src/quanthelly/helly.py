"""Colorful selection combinatorics, Minkowski differences, hypothesis
verification, and the constructive theorem pipelines.

Selection evaluation is embarrassingly parallel: workers share only immutable
inputs and results are merged by a deterministic reduction (height, then
center, then shape entries), so reports are identical for any worker count.
"""
from __future__ import annotations

import dataclasses
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog

from .errors import (DimensionMismatch, HypothesisViolated, InstanceError,
                     NormalizationFailed, NoWitness, Step3Failed,
                     Unbounded, WitnessContainmentFailed)
from .geometry import (AffineMap, Ellipsoid, HPolytope, chebyshev_center,
                       ellipsoid_in_polytope, ellipsoid_height,
                       ellipsoid_volume, has_interior, intersect_all,
                       is_bounded, min_semiaxis, support_value,
                       transform_ellipsoid, transform_polytope)
from .solvers import (DEFAULT_SETTINGS, SolverSettings, SolveOutcome,
                      height_halfspace, lowest_ellipsoid, lp_feasible, mvie,
                      slice_below)

# How closely two ellipsoids must agree (max of shape Frobenius distance and
# center distance) to count as equal in the drop-one-body comparison.
_STEP3_TOL = 1e-5
# Safety shrink applied to the computed common radius before the translate
# search, absorbing solver noise in the feasibility LPs.
_RADIUS_SHRINK = 1e-6


@dataclasses.dataclass(frozen=True)
class ColorClasses:
    """Indexed finite families of bounded full-dimensional H-polytopes."""

    dim: int
    classes: tuple

    def __post_init__(self):
        classes = tuple(tuple(members) for members in self.classes)
        if not classes:
            raise InstanceError("at least one color class is required")
        for ci, members in enumerate(classes):
            if not members:
                raise InstanceError(f"class {ci} is empty")
            for mi, body in enumerate(members):
                if body.dim != self.dim:
                    raise InstanceError(
                        f"class {ci} member {mi} has dimension {body.dim}, "
                        f"expected {self.dim}")
        object.__setattr__(self, "classes", classes)

    @classmethod
    def validated(cls, dim, classes) -> "ColorClasses":
        """Construct and check every member is bounded with nonempty interior."""
        obj = cls(dim, classes)
        for ci, members in enumerate(obj.classes):
            for mi, body in enumerate(members):
                if not is_bounded(body):
                    raise InstanceError(
                        f"class {ci} member {mi} is unbounded")
                if not has_interior(body):
                    raise InstanceError(
                        f"class {ci} member {mi} has empty interior")
        return obj

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def sizes(self) -> tuple:
        return tuple(len(m) for m in self.classes)

    def body(self, ci: int, mi: int) -> HPolytope:
        return self.classes[ci][mi]


@dataclasses.dataclass(frozen=True)
class ColorfulSelection:
    """One member from each of k distinct classes, class indices increasing."""

    picks: tuple  # ((class index, member index), ...)

    def __post_init__(self):
        picks = tuple((int(c), int(m)) for c, m in self.picks)
        cs = [c for c, _ in picks]
        if any(b <= a for a, b in zip(cs, cs[1:])):
            raise InstanceError("class indices must be strictly increasing")
        object.__setattr__(self, "picks", picks)

    def class_indices(self) -> tuple:
        return tuple(c for c, _ in self.picks)


@dataclasses.dataclass(frozen=True)
class PipelineReport:
    witness_class: int
    witness_ellipsoid: Ellipsoid
    witness_volume: float
    normalization: Optional[AffineMap]
    certificates: dict
    wall_time: float

    def to_dict(self) -> dict:
        out = {
            "witness_class": self.witness_class,
            "witness_ellipsoid": _ellipsoid_dict(self.witness_ellipsoid),
            "witness_volume": self.witness_volume,
            "certificates": _plain(self.certificates),
            "wall_time": self.wall_time,
        }
        if self.normalization is not None:
            out["normalization"] = {
                "linear": self.normalization.linear.tolist(),
                "shift": self.normalization.shift.tolist(),
            }
        return out


def _ellipsoid_dict(E: Ellipsoid) -> dict:
    return {"shape": E.shape.tolist(), "center": E.center.tolist()}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Ellipsoid):
        return _ellipsoid_dict(obj)
    if isinstance(obj, ColorfulSelection):
        return [list(p) for p in obj.picks]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


# ---------------------------------------------------------------------------
# Selection enumeration


def colorful_selections(classes: ColorClasses, k: int):
    """All choices of k classes and one member per chosen class, lexicographic."""
    n = classes.n_classes
    if k > n:
        raise InstanceError(f"cannot select {k} classes out of {n}")
    sizes = classes.sizes()
    for subset in itertools.combinations(range(n), k):
        for members in itertools.product(*(range(sizes[c]) for c in subset)):
            yield ColorfulSelection(tuple(zip(subset, members)))


def selection_count(classes: ColorClasses, k: int) -> int:
    sizes = classes.sizes()
    total = 0
    for subset in itertools.combinations(range(classes.n_classes), k):
        prod = 1
        for c in subset:
            prod *= sizes[c]
        total += prod
    return total


def selection_intersection(classes: ColorClasses,
                           sel: ColorfulSelection) -> HPolytope:
    bodies = []
    for ci, mi in sel.picks:
        body = classes.body(ci, mi)
        tagged = HPolytope(body.dim, body.halfspaces,
                           ((ci, mi),) * body.n_constraints)
        bodies.append(tagged)
    return intersect_all(bodies)


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# Minkowski difference and translate search


def _support(L: Union[Ellipsoid, HPolytope], a: np.ndarray) -> float:
    if isinstance(L, Ellipsoid):
        return support_value(L, a)
    res = linprog(-a, A_ub=L.A, b_ub=L.b, bounds=[(None, None)] * L.dim,
                  method="highs")
    if res.status == 3:
        raise Unbounded("support LP unbounded; Minkowski difference needs a "
                        "bounded subtrahend")
    if res.status != 0:
        raise InstanceError("support LP failed")
    return float(-res.fun)


def minkowski_difference(P: HPolytope,
                         L: Union[Ellipsoid, HPolytope]) -> HPolytope:
    """The erosion {t : L + t is contained in P}: offsets shrink by h_L(a)."""
    if P.dim != L.dim:
        raise DimensionMismatch("Minkowski difference dimension mismatch")
    if isinstance(L, Ellipsoid):
        shrink = P.A @ L.center + np.linalg.norm(P.A @ L.shape, axis=1)
    else:
        shrink = np.array([_support(L, a) for a in P.A])
    return HPolytope.from_arrays(P.A, P.b - shrink, P.provenance)


def translate_margin(P: HPolytope, L: Union[Ellipsoid, HPolytope]):
    """Best translate of L into P plus its slack margin (negative: impossible)."""
    diff = minkowski_difference(P, L)
    return chebyshev_center(diff)


def contains_translate(P: HPolytope, L: Union[Ellipsoid, HPolytope],
                       settings: SolverSettings = DEFAULT_SETTINGS
                       ) -> Optional[np.ndarray]:
    """A vector t with L + t inside P, or None when no translate fits."""
    return lp_feasible(minkowski_difference(P, L), settings)


# ---------------------------------------------------------------------------
# Hypothesis verification


@dataclasses.dataclass(frozen=True)
class HypothesisReport:
    passed: bool
    selections_checked: int
    min_volume: Optional[float]
    min_selection: Optional[ColorfulSelection]
    failure: Optional[ColorfulSelection]
    failure_reason: Optional[str]

    def to_dict(self) -> dict:
        return _plain({
            "passed": self.passed,
            "selections_checked": self.selections_checked,
            "min_volume": self.min_volume,
            "min_selection": self.min_selection,
            "failure": self.failure,
            "failure_reason": self.failure_reason,
        })


def verify_colorful_hypothesis(classes: ColorClasses, k: int,
                               target_volume: float,
                               settings: SolverSettings = DEFAULT_SETTINGS,
                               threads: int = 1) -> HypothesisReport:
    """Checks every colorful k-selection's intersection for an inscribed
    ellipsoid of the target volume; stops at the first failure."""
    inner = dataclasses.replace(settings, check_preconditions=False,
                                cross_check=False,
                                gap_target=max(settings.gap_target, 1e-7))
    sels = list(colorful_selections(classes, k))

    def volume_of(sel):
        try:
            return mvie(selection_intersection(classes, sel), inner).volume, None
        except Exception as exc:  # solver errors attributed to the selection
            return None, f"{type(exc).__name__}: {exc}"

    results = _pmap(volume_of, sels, threads)
    min_volume = None
    min_sel = None
    for sel, (vol, err) in zip(sels, results):
        if err is not None:
            return HypothesisReport(False, len(sels), min_volume, min_sel,
                                    sel, err)
        if min_volume is None or vol < min_volume:
            min_volume, min_sel = vol, sel
        if vol < target_volume * (1.0 - 1e-6):
            return HypothesisReport(
                False, len(sels), min_volume, min_sel, sel,
                f"ellipsoid volume {vol:.12g} below target {target_volume:.12g}")
    return HypothesisReport(True, len(sels), min_volume, min_sel, None, None)


# ---------------------------------------------------------------------------
# Colorful Helly witness via Minkowski differences


def colorful_helly_witness(classes: ColorClasses, L: Ellipsoid,
                           settings: SolverSettings = DEFAULT_SETTINGS,
                           verify_hypothesis: bool = False):
    """First class whose full intersection contains a translate of L.

    Requires d+1 classes.  When the colorful hypothesis holds (every colorful
    selection of d+1 sets contains a translate of L), a witness class exists;
    NoWitness therefore signals a hypothesis violation or tolerance breakdown.
    """
    d = classes.dim
    if classes.n_classes != d + 1:
        raise InstanceError(
            f"translate witness search needs exactly {d + 1} classes, "
            f"got {classes.n_classes}")
    if verify_hypothesis:
        for sel in colorful_selections(classes, d + 1):
            if contains_translate(selection_intersection(classes, sel),
                                  L, settings) is None:
                raise HypothesisViolated(
                    "a colorful selection admits no translate of L",
                    failure=sel)
    margins = []
    for j in range(classes.n_classes):
        Pj = intersect_all(classes.classes[j])
        t, margin = translate_margin(Pj, L)
        margins.append(margin)
        if margin >= -settings.feasibility_tol:
            return j, t
    raise NoWitness("no class intersection contains a translate of L",
                    margins=margins)


# ---------------------------------------------------------------------------
# Pipelines


def _ellipsoid_sort_key(E: Ellipsoid):
    return (ellipsoid_height(E), tuple(E.center), tuple(E.shape.ravel()))


def _ellipsoid_gap(E1: Ellipsoid, E2: Ellipsoid) -> float:
    return max(float(np.linalg.norm(E1.shape - E2.shape)),
               float(np.linalg.norm(E1.center - E2.center)))


def _check_witness_containment(E: Ellipsoid, members, tol: float = 1e-6):
    for mi, body in enumerate(members):
        if not ellipsoid_in_polytope(E, body, tol):
            raise WitnessContainmentFailed(
                f"witness ellipsoid leaves member {mi} of the witness class")


def colell_pipeline(classes: ColorClasses, target_volume: float,
                    settings: SolverSettings = DEFAULT_SETTINGS,
                    check_hypothesis: bool = True,
                    threads: int = 1) -> PipelineReport:
    """Many-color-classes pipeline: with d(d+3)/2 classes whose colorful
    selections all contain an ellipsoid of the target volume, produce a class
    whose full intersection contains one.

    Steps: take the lowest ellipsoid of every colorful selection, keep the
    highest of them, find the class whose removal leaves that ellipsoid
    lowest, and certify containment in every member of that class.
    """
    t_start = time.perf_counter()
    d = classes.dim
    nc = d * (d + 3) // 2
    if classes.n_classes != nc:
        raise InstanceError(
            f"pipeline needs exactly {nc} classes for d={d}, "
            f"got {classes.n_classes}")
    if check_hypothesis:
        rep = verify_colorful_hypothesis(classes, nc, target_volume,
                                         settings, threads)
        if not rep.passed:
            raise HypothesisViolated(
                f"colorful hypothesis fails: {rep.failure_reason}",
                failure=rep.failure)
    inner = dataclasses.replace(settings, check_preconditions=False,
                                cross_check=False,
                                gap_target=max(settings.gap_target, 1e-7))
    sels = list(colorful_selections(classes, nc))

    def lowest_of(sel):
        out = lowest_ellipsoid(selection_intersection(classes, sel),
                               target_volume, inner)
        return out

    outs = _pmap(lowest_of, sels, threads)
    keys = [_ellipsoid_sort_key(o.ellipsoid) for o in outs]
    best = max(range(len(sels)), key=lambda i: keys[i])
    e_max = outs[best].ellipsoid
    sel_max = sels[best]

    # Drop one body at a time from the defining selection; some class's removal
    # must leave e_max lowest.
    bodies = [classes.body(ci, mi) for ci, mi in sel_max.picks]
    gaps = []
    witness = None
    for pos in range(nc):
        K_j = intersect_all(bodies[:pos] + bodies[pos + 1:])
        out_j = lowest_ellipsoid(K_j, target_volume, inner)
        gap = _ellipsoid_gap(out_j.ellipsoid, e_max)
        gaps.append(gap)
        if gap <= _STEP3_TOL:
            witness = sel_max.picks[pos][0]
            break
    if witness is None:
        raise Step3Failed("no class removal preserves the lowest ellipsoid",
                          gaps=gaps)
    _check_witness_containment(e_max, classes.classes[witness])
    return PipelineReport(
        witness_class=witness,
        witness_ellipsoid=e_max,
        witness_volume=ellipsoid_volume(e_max),
        normalization=None,
        certificates={
            "target_volume": target_volume,
            "defining_selection": sel_max,
            "e_max_height": ellipsoid_height(e_max),
            "selection_heights": [ellipsoid_height(o.ellipsoid) for o in outs],
            "drop_one_gaps": gaps,
        },
        wall_time=time.perf_counter() - t_start)


def theorem1_pipeline(classes: ColorClasses, target_volume: float,
                      settings: SolverSettings = DEFAULT_SETTINGS,
                      check_hypothesis: bool = True,
                      threads: int = 1) -> PipelineReport:
    """Few-color-classes pipeline: 3d classes, colorful selections of 2d sets.

    Constructs the highest lowest-ellipsoid over (2d-1)-selections, normalizes
    it to the unit ball, cuts with the height-1 half-space, extracts a common
    inscribed-ball radius over the remaining d+1 families, and finds the
    witness class by the translate search.
    """
    t_start = time.perf_counter()
    d = classes.dim
    if classes.n_classes != 3 * d:
        raise InstanceError(
            f"pipeline needs exactly {3 * d} classes for d={d}, "
            f"got {classes.n_classes}")
    if check_hypothesis:
        rep = verify_colorful_hypothesis(classes, 2 * d, target_volume,
                                         settings, threads)
        if not rep.passed:
            raise HypothesisViolated(
                f"colorful hypothesis fails: {rep.failure_reason}",
                failure=rep.failure)
    inner = dataclasses.replace(settings, check_preconditions=False,
                                cross_check=False,
                                gap_target=max(settings.gap_target, 1e-7))

    # (1) highest of the lowest ellipsoids over (2d-1)-selections
    sels = list(colorful_selections(classes, 2 * d - 1))

    def lowest_of(sel):
        return lowest_ellipsoid(selection_intersection(classes, sel),
                                target_volume, inner)

    outs = _pmap(lowest_of, sels, threads)
    keys = [_ellipsoid_sort_key(o.ellipsoid) for o in outs]
    best = max(range(len(sels)), key=lambda i: keys[i])
    e_star = outs[best].ellipsoid
    sel_star = sels[best]

    # (2) normalize so the chosen ellipsoid becomes the unit ball and its
    # supporting height half-space {x_d <= height} becomes {x_d <= 1}.  The
    # half-space's image under B^{-1} has normal B e_d / |B e_d|; a Householder
    # reflection carries that normal back to e_d.
    try:
        Binv = np.linalg.inv(e_star.shape)
    except np.linalg.LinAlgError as exc:
        raise NormalizationFailed(f"singular normalization: {exc}")
    u = e_star.shape[:, -1]
    u = u / np.linalg.norm(u)
    e_d = np.zeros(d)
    e_d[-1] = 1.0
    v = u - e_d
    if np.linalg.norm(v) < 1e-12:
        R = np.eye(d)
    else:
        R = np.eye(d) - 2.0 * np.outer(v, v) / float(v @ v)
    lin = R @ Binv
    T = AffineMap(lin, -lin @ e_star.center)

    defining = set(sel_star.class_indices())
    remaining = [ci for ci in range(classes.n_classes) if ci not in defining]

    # (3) the cut body M and its MVIE certificate
    imgs = [transform_polytope(T, classes.body(ci, mi))
            for ci, mi in sel_star.picks]
    M = slice_below(intersect_all(imgs), 1.0)
    m_out = mvie(M, inner)
    ball = Ellipsoid.unit_ball(d)
    m_gap = _ellipsoid_gap(m_out.ellipsoid, ball)
    if m_gap > _STEP3_TOL:
        raise NormalizationFailed(
            f"MVIE of the cut body is not the unit ball (gap {m_gap:.3e})")

    # (4) common inscribed-ball radius over the remaining families
    rem_classes = ColorClasses(
        d, tuple(tuple(transform_polytope(T, C) for C in classes.classes[ci])
                 for ci in remaining))
    rem_sels = list(colorful_selections(rem_classes, d + 1))

    def semiaxis_of(sel):
        Q = intersect_all([selection_intersection(rem_classes, sel), M])
        return min_semiaxis(mvie(Q, inner).ellipsoid)

    minima = _pmap(semiaxis_of, rem_sels, threads)
    r = min(minima)
    if r <= 0.0:
        raise NoWitness(f"common inscribed radius collapsed (r={r:.3e})",
                        margins=minima)
    r_eff = r * (1.0 - _RADIUS_SHRINK)

    # (5) translate witness among the remaining families
    L = Ellipsoid.ball(np.zeros(d), r_eff)
    j_local, t_vec = colorful_helly_witness(rem_classes, L, settings)
    witness = remaining[j_local]

    # (6) map the ball back through the normalization
    E_w = transform_ellipsoid(T.inverse(), Ellipsoid.ball(t_vec, r_eff))
    _check_witness_containment(E_w, classes.classes[witness])
    return PipelineReport(
        witness_class=witness,
        witness_ellipsoid=E_w,
        witness_volume=ellipsoid_volume(E_w),
        normalization=T,
        certificates={
            "target_volume": target_volume,
            "defining_selection": sel_star,
            "e_star": e_star,
            "e_star_height": ellipsoid_height(e_star),
            "cut_mvie_gap": m_gap,
            "common_radius": r,
            "selection_min_semiaxes": minima,
            "witness_translate": t_vec,
            "remaining_classes": remaining,
        },
        wall_time=time.perf_counter() - t_start)


def saxuso_scenario(classes: ColorClasses,
                    settings: SolverSettings = DEFAULT_SETTINGS,
                    threads: int = 1) -> PipelineReport:
    """d(d+3)/2 classes with 2d-selection hypothesis at volume 1: measure the
    worst full-selection MVIE volume and run the many-classes pipeline at it."""
    t_start = time.perf_counter()
    d = classes.dim
    nc = d * (d + 3) // 2
    if classes.n_classes != nc:
        raise InstanceError(
            f"scenario needs exactly {nc} classes for d={d}, "
            f"got {classes.n_classes}")
    rep = verify_colorful_hypothesis(classes, 2 * d, 1.0, settings, threads)
    if not rep.passed:
        raise HypothesisViolated(
            f"2d-selection hypothesis fails: {rep.failure_reason}",
            failure=rep.failure)
    inner = dataclasses.replace(settings, check_preconditions=False,
                                cross_check=False,
                                gap_target=max(settings.gap_target, 1e-7))
    sels = list(colorful_selections(classes, nc))

    def volume_of(sel):
        return mvie(selection_intersection(classes, sel), inner).volume

    vols = _pmap(volume_of, sels, threads)
    v = min(vols)
    v_eff = v * (1.0 - 1e-9)
    report = colell_pipeline(classes, v_eff, settings,
                             check_hypothesis=False, threads=threads)
    certs = dict(report.certificates)
    certs["worst_selection_volume"] = v
    certs["hypothesis_min_volume"] = rep.min_volume
    return PipelineReport(
        witness_class=report.witness_class,
        witness_ellipsoid=report.witness_ellipsoid,
        witness_volume=report.witness_volume,
        normalization=report.normalization,
        certificates=certs,
        wall_time=time.perf_counter() - t_start)
