"""Seeded verification runs: point sampling, engine self-tests, condition
evaluation, and report assembly.

Determinism contract: a report body is a pure function of (spec, seed,
points, tolerance).  A single ``numpy.random.default_rng(seed)`` stream
drives every random choice, consumed in a fixed documented order:

1. point sampling — each attempt (accepted or rejected) draws one
   uniform vector in the chart box;
2. probe directions — one ``(probes, 4, dim)`` block of uniform [-1, 1]
   draws per accepted point, in point order;
3. target measurement — plane-spanning vector pairs for the sectional
   curvature target, drawn per point as needed.

Everything downstream of the draws (check evaluation, aggregation,
serialization) is an ordered deterministic reduction.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .conditions import CONDITIONS, classify, evaluate_condition, \
    expand_checks, trit
from .errors import (
    DegenerateMetric,
    DegeneratePlane,
    DomainError,
    OutsidePatch,
    ParseError,
    SamplingExhausted,
    SingularFrame,
    ValidationError,
)
from .expr import eval_expr, parse
from .geometry import PointFrame
from .jets import nth_tangent, seed_multi, value_of

_FD_STEP = 1e-5
# Acceptance bound for corpus expressions: with |f|, |f'|, |f''|, |f'''|
# all below this at the probe points, the central-difference truncation
# error (h^2/6 * f''') and the subtraction roundoff (eps * |f| / 2h) both
# stay below ~2e-7, two orders under the 1e-5 comparison tolerance.
_CORPUS_MAGNITUDE_CAP = 1e4

REPORT_KEY_ORDER = (
    "spec_digest", "seed", "points", "tolerance", "engine", "checks",
    "classification", "targets", "wall_clock_seconds",
)

SELF_TEST_NAMES = (
    "metric_symmetry", "inverse_identity", "gamma_symmetry", "nabla_g",
    "bianchi", "riemann_skew", "dd_eta", "mixed_partial",
)


# ---------------------------------------------------------------------------
# random expression corpus (shared by the jet/finite-difference self-test)
# ---------------------------------------------------------------------------

def _random_expression_text(rng, names, max_depth):
    """One random expression string over ``names`` in the parser grammar."""
    def leaf():
        if rng.random() < 0.7:
            return names[int(rng.integers(len(names)))]
        return format(float(rng.uniform(-2.0, 2.0)), ".3f")

    def node(depth):
        if depth >= max_depth or rng.random() < 0.25:
            return leaf()
        roll = rng.random()
        if roll < 0.15:
            fn = ("sinh", "cosh", "tanh", "exp", "sqrt",
                  "ln")[int(rng.integers(6))]
            return f"{fn}({node(depth + 1)})"
        if roll < 0.22:
            return f"-({node(depth + 1)})"
        if roll < 0.30:
            return f"({node(depth + 1)})^{int(rng.integers(2, 4))}"
        op = ("+", "-", "*", "/")[int(rng.integers(4))]
        return f"({node(depth + 1)} {op} {node(depth + 1)})"

    return node(0)


def _jet_orders(fn, point, direction, orders=3):
    xs = seed_multi(point, [direction] * orders)
    y = fn(xs)
    return [nth_tangent(y, k) for k in range(orders + 1)]


def _tame_at(fn, point, direction):
    """All derivatives through order three finite and moderately sized."""
    for value in _jet_orders(fn, point, direction):
        if not np.isfinite(value) or abs(value) > _CORPUS_MAGNITUDE_CAP:
            return False
    return True


@lru_cache(maxsize=4)
def random_expression_corpus(seed, count, max_depth):
    """Deterministic corpus of ``(expr_fn, point, direction)`` triples.

    Each expression is random text in the parser grammar over two to four
    variables; ``expr_fn`` accepts a tuple of floats or of jets.  Sampling
    rejects expressions whose value or first three directional
    derivatives are non-finite or large at the probe point and at the
    two finite-difference stencil points, so a central difference with
    step 1e-5 is trustworthy there; agreement with the jet itself is
    never part of the filter.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    attempts = 0
    budget = 200 * count
    while len(corpus) < count:
        if attempts >= budget:
            raise RuntimeError(
                f"expression corpus: accepted {len(corpus)}/{count} "
                f"after {attempts} attempts")
        attempts += 1
        nvars = int(rng.integers(2, 5))
        names = tuple(f"x{i}" for i in range(1, nvars + 1))
        text = _random_expression_text(rng, names, max_depth)
        point = tuple(float(v) for v in rng.uniform(0.3, 1.7, nvars))
        direction = int(rng.integers(nvars))
        try:
            node = parse(text, names)
        except ParseError:
            continue

        def expr_fn(xs, _node=node):
            return eval_expr(_node, xs)

        try:
            ok = True
            for shift in (-_FD_STEP, 0.0, _FD_STEP):
                probe = list(point)
                probe[direction] += shift
                if not _tame_at(expr_fn, tuple(probe), direction):
                    ok = False
                    break
        except (DomainError, OverflowError, ZeroDivisionError, ValueError):
            continue
        if not ok:
            continue
        corpus.append((expr_fn, point, direction))
    return corpus


def jet_fd_worst(corpus):
    """Worst relative gap between an order-1 jet and a central difference."""
    worst = 0.0
    for fn, point, direction in corpus:
        xs = seed_multi(point, [direction])
        jet = nth_tangent(fn(xs), 1)
        plus = list(point)
        plus[direction] += _FD_STEP
        minus = list(point)
        minus[direction] -= _FD_STEP
        fd = (value_of(fn(tuple(plus))) - value_of(fn(tuple(minus)))) \
            / (2.0 * _FD_STEP)
        worst = max(worst, abs(jet - fd) / max(1.0, abs(jet), abs(fd)))
    return worst


# ---------------------------------------------------------------------------
# point sampling
# ---------------------------------------------------------------------------

_REJECTABLE = (SingularFrame, DegenerateMetric, OutsidePatch, DomainError)


def sample_points(structure, rng, count):
    """``count`` PointFrames at uniform box points, resampling rejects.

    A draw is rejected when the structure is singular or degenerate
    there (frame not invertible, metric determinant too small, point
    outside the patch, or a domain error in an expression).  More than
    ten rejected-plus-accepted attempts per requested point raises
    SamplingExhausted.
    """
    chart = structure.chart
    lo = np.array([b[0] for b in chart.box])
    hi = np.array([b[1] for b in chart.box])
    frames = []
    attempts = 0
    budget = 10 * count
    while len(frames) < count:
        if attempts >= budget:
            raise SamplingExhausted(
                f"accepted {len(frames)}/{count} points after "
                f"{attempts} attempts in the box")
        attempts += 1
        point = tuple(float(v)
                      for v in lo + (hi - lo) * rng.random(chart.dim))
        try:
            pf = PointFrame(structure, point)
            pf.ginv
        except _REJECTABLE:
            continue
        frames.append(pf)
    return frames


# ---------------------------------------------------------------------------
# engine self-tests
# ---------------------------------------------------------------------------

def engine_self_tests(frames, corpus_seed=1234, corpus_count=200,
                      corpus_depth=6):
    """Worst structural-identity residuals over the sample, plus the
    jet-versus-finite-difference property on the shared expression
    corpus.  These identities hold for any pseudo-Riemannian structure,
    so they exercise the engine rather than the example."""
    summary = {}
    for name in SELF_TEST_NAMES:
        worst = 0.0
        for pf in frames:
            worst = max(worst, float(getattr(pf, name + "_residual")()))
        summary[name] = worst
    corpus = random_expression_corpus(corpus_seed, corpus_count,
                                      corpus_depth)
    summary["jet_vs_fd"] = jet_fd_worst(corpus)
    return summary


# ---------------------------------------------------------------------------
# check evaluation and classification
# ---------------------------------------------------------------------------

def _verdict(scaled, tolerance, separation):
    flag = trit(scaled, tolerance, separation)
    if flag is True:
        return "pass"
    if flag is False:
        return "fail"
    return "ambiguous"


def evaluate_checks(check_ids, frames, probe_sets, tolerance, separation):
    """Worst-case evaluation of every requested check over the sample.

    Returns (rows, worst) where rows are report entries in request order
    and worst maps condition id to its worst scaled residual.
    """
    rows = []
    worst_scaled = {}
    for cid in check_ids:
        cond = CONDITIONS[cid]
        worst = None
        for pf, probes in zip(frames, probe_sets):
            cv = evaluate_condition(cid, pf, probes)
            if worst is None or cv.scaled > worst.scaled:
                worst = cv
        worst_scaled[cid] = worst.scaled
        rows.append({
            "id": cid,
            "scope": cond.scope,
            "raw": worst.raw,
            "scaled": worst.scaled,
            "part": worst.part,
            "verdict": _verdict(worst.scaled, tolerance, separation),
        })
    return rows, worst_scaled


# ---------------------------------------------------------------------------
# preset target measurement
# ---------------------------------------------------------------------------

def _random_plane(pf, rng, max_tries=100):
    for _ in range(max_tries):
        X = rng.uniform(-1.0, 1.0, pf.m)
        Y = rng.uniform(-1.0, 1.0, pf.m)
        try:
            return pf.sectional(X, Y)
        except DegeneratePlane:
            continue
    raise DegeneratePlane(
        f"no nondegenerate plane found in {max_tries} draws at {pf.point}")


def measure_targets(descriptor, frames, rng, planes_per_point=4):
    """Deviation of measured invariants from the preset's known values."""
    if descriptor is None or not descriptor.targets:
        return None
    out = {}
    for name, expected in descriptor.targets.items():
        dev = 0.0
        for pf in frames:
            if name == "sectional":
                for _ in range(planes_per_point):
                    dev = max(dev, abs(_random_plane(pf, rng) - expected))
            elif name == "r":
                dev = max(dev, abs(pf.r - expected))
            elif name == "r_star":
                dev = max(dev, abs(pf.r_star - expected))
            elif name == "riemann_max":
                dev = max(dev, float(np.max(np.abs(pf.Riem))) - expected)
            elif name == "h_on_dz":
                e_last = np.zeros(pf.m)
                e_last[pf.m - 1] = 1.0
                dev = max(dev, float(np.max(np.abs(
                    pf.h @ e_last - expected * e_last))))
            elif name == "h_squared_max":
                dev = max(dev,
                          float(np.max(np.abs(pf.h @ pf.h))) - expected)
            else:
                raise ValidationError(f"unknown target {name!r}")
        out[name] = {"expected": expected, "max_abs_deviation": dev}
    return out


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class Report:
    """One verification run; the body (everything except wall clock) is
    byte-reproducible for a given (spec, seed, points, tolerance)."""

    spec_digest: str
    seed: int
    points: int
    tolerance: float
    engine: dict
    checks: list
    classification: dict
    targets: object
    wall_clock_seconds: float

    def body(self):
        data = self.to_dict()
        del data["wall_clock_seconds"]
        return data

    def to_dict(self):
        return {key: getattr(self, key) for key in REPORT_KEY_ORDER}

    def json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def body_json(self):
        return json.dumps(self.body(), indent=2) + "\n"

    @property
    def all_passed(self):
        return all(row["verdict"] == "pass" for row in self.checks)

    def text(self):
        lines = [f"spec digest   {self.spec_digest}",
                 f"seed          {self.seed}",
                 f"points        {self.points}",
                 f"tolerance     {self.tolerance:g}",
                 "",
                 "engine self-tests (worst residual over the sample)"]
        for name, value in self.engine.items():
            lines.append(f"  {name:<18} {value:.3e}")
        lines.append("")
        lines.append("checks (worst over the sample)")
        lines.append(f"  {'id':<14} {'scope':<13} {'raw':>10} "
                     f"{'scaled':>10}  verdict")
        for row in self.checks:
            part = f"  [{row['part']}]" if row["part"] else ""
            lines.append(
                f"  {row['id']:<14} {row['scope']:<13} "
                f"{row['raw']:>10.3e} {row['scaled']:>10.3e}  "
                f"{row['verdict']}{part}")
        lines.append("")
        lines.append("classification")
        for name, flag in self.classification.items():
            mark = {True: "yes", False: "no", None: "undetermined"}[flag]
            lines.append(f"  {name:<26} {mark}")
        if self.targets:
            lines.append("")
            lines.append("targets")
            for name, entry in self.targets.items():
                lines.append(
                    f"  {name:<16} expected {entry['expected']:g}, "
                    f"max deviation {entry['max_abs_deviation']:.3e}")
        lines.append("")
        status = "PASS" if self.all_passed else "FAIL"
        lines.append(f"result        {status}")
        lines.append(f"wall clock    {self.wall_clock_seconds:.2f} s")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# the run itself
# ---------------------------------------------------------------------------

def _merge_numeric(spec, points, seed, tolerance):
    numeric = dict(spec.numeric)
    if points is not None:
        if points < 1:
            raise ValidationError("points must be >= 1")
        numeric["points"] = int(points)
    if seed is not None:
        if seed < 0:
            raise ValidationError("seed must be >= 0")
        numeric["seed"] = int(seed)
    if tolerance is not None:
        if not tolerance > 0:
            raise ValidationError("tolerance must be positive")
        numeric["tolerance"] = float(tolerance)
        # Keep the ambiguity band open when a loose tolerance is asked for.
        if numeric["separation"] <= numeric["tolerance"]:
            numeric["separation"] = 10.0 * numeric["tolerance"]
    return numeric


def run(spec, checks=None, points=None, seed=None, tolerance=None):
    """Execute one verification run and return its Report.

    ``checks``, ``points``, ``seed``, and ``tolerance`` override the
    spec's own blocks when given (command-line flags); the RNG
    consumption order documented at module level makes the report body
    reproducible byte for byte.
    """
    numeric = _merge_numeric(spec, points, seed, tolerance)
    requested = spec.checks if checks is None else checks
    try:
        check_ids = expand_checks(requested, spec.chart.dim)
    except KeyError as exc:
        raise ValidationError(f"checks: {exc.args[0]}") from exc

    start = time.perf_counter()
    rng = np.random.default_rng(numeric["seed"])
    frames = sample_points(spec.structure, rng, numeric["points"])
    probe_sets = [rng.uniform(-1.0, 1.0, (numeric["probes"], 4,
                                          spec.chart.dim))
                  for _ in frames]

    engine = engine_self_tests(frames)
    rows, worst_scaled = evaluate_checks(
        check_ids, frames, probe_sets,
        numeric["tolerance"], numeric["separation"])
    classification = classify(worst_scaled, tol=numeric["tolerance"],
                              separation=numeric["separation"])
    targets = measure_targets(spec.descriptor, frames, rng)
    wall = time.perf_counter() - start

    return Report(
        spec_digest=spec.digest,
        seed=numeric["seed"],
        points=numeric["points"],
        tolerance=numeric["tolerance"],
        engine=engine,
        checks=rows,
        classification=classification,
        targets=targets,
        wall_clock_seconds=wall,
    )
