"""Seeded verification suites behind ``openimage verify``.

Each suite returns a JSON-ready dict with trial and failure counts.  Reports
hold no timings or addresses, so a fixed seed gives byte-identical output.
"""

from __future__ import annotations

import random

import numpy as np

from . import bounds as B
from .errors import HypothesisFails, OpenImageError, PrecisionExhausted
from .groups import (ball_generators, ball_index, contains_ball, enumerate_ball,
                     enumerate_sl2, goursat_exponents, pairwise_exponents,
                     subgroup_closure, twisted_diagonal)
from .inner import (ApproxMorphism, alpha_of, construct_inner_matrix,
                    verify_trace_congruence)
from .lattice import LieLattice, conj_stable_gain, conjugation_closure
from .matrices import (AdjointOp, Mat2, TracelessMat, approx_eigen_defect,
                       char_poly_adjoint)
from .padic import MonicPoly, PadicContext, hensel_lift, vp

MAX_EXAMPLES = 5


def _rng(seed: int, name: str) -> random.Random:
    return random.Random(f"{seed}:{name}")


class _Tally:
    def __init__(self):
        self.trials = 0
        self.failures = 0
        self.examples = []

    def check(self, ok: bool, msg):
        self.trials += 1
        if not ok:
            self.failures += 1
            if len(self.examples) < MAX_EXAMPLES:
                self.examples.append(msg() if callable(msg) else str(msg))

    def report(self, name, seed, **details):
        return {"suite": name, "seed": seed, "trials": self.trials,
                "failures": self.failures, "passed": self.failures == 0,
                "failure_examples": self.examples, "details": details}


# -- hensel -----------------------------------------------------------------

def _roots_mod(coeffs, mod):
    x = np.arange(mod, dtype=object)
    acc = np.zeros(mod, dtype=object)
    for c in reversed(coeffs):
        acc = (acc * x + c) % mod
    return set(int(r) for r in np.nonzero(acc == 0)[0])


def _random_hensel_instance(rng, ctx):
    ell, N, mod = ctx.ell, ctx.N, ctx.modulus
    while True:
        r = rng.randrange(mod)
        if rng.random() < 0.5:
            r2 = rng.randrange(mod)
            cs = [r * r2, -(r + r2), 1]
        else:
            b, c = rng.randrange(mod), rng.randrange(mod)
            # (x - r)(x^2 + b x + c)
            cs = [-r * c, c - r * b, b - r, 1]
        alpha = (r + ell ** rng.randrange(0, N + 1) * rng.randrange(mod)) % mod
        p = MonicPoly(cs, ctx)
        fv = vp(p._eval_int(alpha) % mod, ell, N)
        dv = vp(p._deriv_int(alpha) % mod, ell, N)
        if (fv >= N or fv > 2 * dv) and 2 * dv < N:
            return p, alpha, fv, dv


def suite_hensel(seed=0, trials=None):
    trials = 1000 if trials is None else trials
    tally = _Tally()
    rng = _rng(seed, "hensel")
    for ell, N in ((2, 8), (3, 6), (5, 5)):
        ctx = PadicContext(ell, N)
        for _ in range(trials):
            p, alpha, fv, dv = _random_hensel_instance(rng, ctx)
            root = hensel_lift(p, ctx(alpha)).residue
            roots = _roots_mod(p.coefficients, ctx.modulus)
            dist = vp((root - alpha) % ctx.modulus, ell, N)
            tally.check(root in roots and dist >= min(N, fv - dv),
                        lambda: f"l={ell} N={N} p={p.coefficients} alpha={alpha} root={root}")
    return tally.report("hensel", seed, configs=[[2, 8], [3, 6], [5, 5]],
                        trials_per_config=trials)


# -- eigen_defect ----------------------------------------------------------------

def _eigen_instance(rng, ctx, m):
    """Random (g, lam, w, n) with g w == lam w mod l^n, and b < n."""
    ell, N, mod = ctx.ell, ctx.N, ctx.modulus
    n = rng.randrange(1, N + 1)
    b = rng.randrange(0, n)
    wp = [rng.randrange(mod) for _ in range(m)]
    i = rng.randrange(m)
    if wp[i] % ell == 0:
        wp[i] += 1
    lam = rng.randrange(mod)
    g = [[rng.randrange(mod) for _ in range(m)] for _ in range(m)]
    inv = pow(wp[i], -1, mod)
    q = ell ** (n - b)
    for r in range(m):
        rest = sum(g[r][j] * wp[j] for j in range(m) if j != i)
        g[r][i] = (lam * wp[r] - rest) * inv % mod
        # perturb: w = l^b w' absorbs l^(n-b) noise up to l^n
        g[r] = [(e + q * rng.randrange(mod)) % mod for e in g[r]]
    w = [x * ell ** b % mod for x in wp]
    return g, lam, w, n


def suite_eigen_defect(seed=0, trials=None):
    trials = 100_000 if trials is None else trials
    tally = _Tally()
    rng = _rng(seed, "eigen_defect")
    primes = (2, 3, 5)
    for k in range(trials):
        ell = primes[k % 3]
        ctx = PadicContext(ell, rng.randrange(2, 7))
        m = 3 if k % 10 == 9 else 2
        g, lam, w, n = _eigen_instance(rng, ctx, m)
        try:
            src = Mat2.from_rows(g, ctx) if m == 2 else g
            approx_eigen_defect(src, lam, w, n, ctx)
            tally.check(True, "")
        except OpenImageError as exc:
            tally.check(False, lambda: f"l={ell} N={ctx.N} g={g} lam={lam} w={w} n={n}: {exc}")
    # exhaustive grid at l = 3, N = 3
    ctx = PadicContext(3, 3)
    grid = (0, 1, 2, 3, 9, 26)
    wgrid = (0, 1, 3, 9)
    swept = 0
    for a in grid:
        for bb in grid:
            for c in grid:
                for d in grid:
                    g = Mat2(a, bb, c, d, ctx)
                    for lam in (0, 1, 2, 3, 9):
                        for w in ((x, y) for x in wgrid for y in wgrid):
                            bw = min(vp(e, 3, 3) for e in w)
                            gw = g.apply(w)
                            for n in range(bw + 1, 4):
                                q = 3 ** n
                                if (gw[0] - lam * w[0]) % q or (gw[1] - lam * w[1]) % q:
                                    continue
                                swept += 1
                                try:
                                    approx_eigen_defect(g, lam, w, n)
                                    ok = True
                                except OpenImageError:
                                    ok = False
                                tally.check(ok, lambda: f"grid g={g.rows()} lam={lam} w={w} n={n}")
    return tally.report("eigen_defect", seed, random_trials=trials, grid_instances=swept)


# -- adjoint_charpoly ----------------------------------------------------------------

def suite_adjoint_charpoly(seed=0, trials=None):
    trials = 10_000 if trials is None else trials
    tally = _Tally()
    rng = _rng(seed, "adjoint_charpoly")
    for ell in (2, 3, 5):
        ctx = PadicContext(ell, 6)
        for _ in range(trials):
            a, b, c = (rng.randrange(ctx.modulus) for _ in range(3))
            g = TracelessMat(a, b, c, -a, ctx)
            sym = char_poly_adjoint(g).coefficients
            oracle = AdjointOp.of(g).char_poly().coefficients
            tally.check(sym == oracle, lambda: f"l={ell} g={g.rows()} {sym} != {oracle}")
    return tally.report("adjoint_charpoly", seed, trials_per_prime=trials)


# -- inner ------------------------------------------------------------------

INNER_CONFIGS = ((3, 14, 1), (5, 12, 1), (2, 18, 2))


def _random_conjugator(rng, ctx):
    while True:
        M0 = Mat2(*(rng.randrange(ctx.modulus) for _ in range(4)), ctx)
        if M0.det % ctx.ell:
            return M0


def _noise(rng, ctx, n):
    q = ctx.ell ** n
    out = []
    for _ in range(3):
        a, b, c = (q * rng.randrange(ctx.modulus) for _ in range(3))
        out.append(TracelessMat(a, b, c, -a, ctx))
    return out


def run_inner_instance(ctx, s, M0, noise_rng):
    """One reconstruction at ``n = alpha + 10s + 5v + 6``; returns a dict of
    observed facts."""
    v = ctx.v
    alpha = alpha_of(ApproxMorphism.conjugation(M0, s, 0))
    n = alpha + 10 * s + 5 * v + 6
    phi = ApproxMorphism.conjugation(M0, s, n, _noise(noise_rng, ctx, n))
    cert = construct_inner_matrix(phi)
    depth = max(0, min(ctx.N, n - alpha - 6 * s - 4 * v - 6))
    M = cert.M
    inter_ok = all((M * g).congruent(img * M, depth) for g, img in phi.pairs())
    # random elements of the domain
    for _ in range(3):
        cs = [noise_rng.randrange(ctx.modulus) for _ in range(3)]
        g = sum((d * c for d, c in zip(phi.domain, cs)), Mat2.scalar(0, ctx))
        im = sum((d * c for d, c in zip(phi.images, cs)), Mat2.scalar(0, ctx))
        inter_ok = inter_ok and (M * g).congruent(im * M, depth)
    return {"alpha": alpha, "n": n, "depth": depth, "intertwines": inter_ok,
            "det_ok": cert.det_valuation <= 4 * s + v,
            "trace_ok": verify_trace_congruence(phi, cert, seed=noise_rng.randrange(2 ** 31)),
            "certified_precision": cert.certified_precision,
            "trace_depth": cert.trace_depth}


def suite_inner(seed=0, trials=None):
    trials = 200 if trials is None else trials
    tally = _Tally()
    rng = _rng(seed, "inner")
    depths = {}
    for ell, N, s in INNER_CONFIGS:
        ctx = PadicContext(ell, N)
        seen = set()
        for _ in range(trials):
            M0 = _random_conjugator(rng, ctx)
            try:
                r = run_inner_instance(ctx, s, M0, rng)
                ok = r["intertwines"] and r["det_ok"] and r["trace_ok"]
                seen.add((r["certified_precision"], r["trace_depth"]))
                msg = f"l={ell} N={N} s={s} M0={M0.rows()}: {r}"
            except OpenImageError as exc:
                ok, msg = False, f"l={ell} N={N} s={s} M0={M0.rows()}: {exc!r}"
            tally.check(ok, msg)
        depths[f"{ell},{N},{s}"] = sorted(seen)
    return tally.report("inner", seed, configs=[list(c) for c in INNER_CONFIGS],
                        trials_per_config=trials,
                        certified_and_trace_depths=depths)


# -- goursat ----------------------------------------------------------------

def goursat_instances(seed=0, count=20):
    """Deterministic list of ``(label, group)`` inside SL_2(Z/9)^3 and
    SL_2(Z/8)^2: twisted diagonals, planted balls and products."""
    rng = _rng(seed, "goursat")
    out = []
    fams = [(3, 2, 3), (2, 3, 2)]
    for k in range(count):
        ell, N, n = fams[k % 2]
        ctx = PadicContext(ell, N)
        ident = (1, 0, 0, 1)
        kind = ("diagonal", "twisted", "planted", "planted2", "product")[(k // 2) % 5]
        base = ball_generators(ctx, 0)
        conj = [Mat2.identity(ctx)] + [_random_conjugator(rng, ctx) for _ in range(n - 1)]
        if kind == "diagonal":
            gens = twisted_diagonal(base, [Mat2.identity(ctx)] * n, ell, N)
        else:
            gens = twisted_diagonal(base, conj, ell, N)
        if kind in ("planted", "planted2"):
            lo = 2 if ell == 2 else 1
            blocks = rng.sample(range(n), 1 if kind == "planted" else 2)
            for blk in blocks:
                level = rng.randrange(lo, N)
                for g in ball_generators(ctx, level):
                    gens.append(tuple(g.entries() if j == blk else ident for j in range(n)))
        if kind == "product":
            # full first block times a twisted diagonal on the rest
            rest = twisted_diagonal(base, conj[1:], ell, N)
            gens = [tuple(g.entries() if j == 0 else ident for j in range(n)) for g in base]
            gens += [(ident,) + tuple(row) for row in rest]
        out.append((f"{kind}/SL2(Z/{ell ** N})^{n}", subgroup_closure(gens, ell, N, n)))
    return out


def suite_goursat(seed=0, trials=None):
    count = 20 if trials is None else trials
    tally = _Tally()
    rows = []
    for label, G in goursat_instances(seed, count):
        S = pairwise_exponents(G)
        exps = goursat_exponents(S, G.ell)
        ok = contains_ball(G, exps) and G.order < 500_000
        rows.append({"group": label, "order": G.order, "s": S, "exponents": exps,
                     "nontrivial": any(e < G.N for e in exps), "contains_ball": ok})
        tally.check(ok, lambda: f"{label}: s={S} exponents={exps}")
    return tally.report("goursat", seed, instances=rows)


# -- ball_index ---------------------------------------------------------------

BALL_CONFIGS = ((2, 3, 1), (2, 3, 2), (3, 2, 1))


def suite_ball_index(seed=0, trials=None):
    tally = _Tally()
    rows = []
    for ell, N, s in BALL_CONFIGS:
        ctx = PadicContext(ell, N)
        sl2 = len(enumerate_sl2(ell, N))
        ball = len(enumerate_ball(ell, N, s))
        closure = subgroup_closure([[g] for g in ball_generators(ctx, s)], ell, N, 1).order
        idx = ball_index(ell, s)
        ok = idx * ball == sl2 and closure == ball
        rows.append({"ell": ell, "N": N, "s": s, "ball_index": idx, "ball_order": ball,
                     "closure_order": closure, "sl2_order": sl2})
        tally.check(ok, lambda: str(rows[-1]))
    return tally.report("ball_index", seed, rows=rows)


# -- conj_gain ----------------------------------------------------------------

def suite_conj_gain(seed=0, trials=None):
    trials = 100 if trials is None else trials
    tally = _Tally()
    rng = _rng(seed, "conj_gain")
    ell, s = 5, 1
    per_t = {}
    for _ in range(trials):
        t = rng.randrange(0, 4)
        ctx = PadicContext(ell, t + 9)
        mod = ctx.modulus
        q = ell ** t
        v0 = [rng.randrange(mod) for _ in range(3)]
        j = rng.randrange(3)
        if v0[j] % ell == 0:
            v0[j] += 1
        gens = [[q * x % mod for x in v0]]
        if rng.random() < 0.5:
            gens.append([q * ell * rng.randrange(mod) % mod for _ in range(3)])
        W = conjugation_closure(LieLattice(ctx, 3, gens), s)
        try:
            ok = conj_stable_gain(W, s, t)
            msg = f"t={t} W={list(W.basis)}"
        except (HypothesisFails, PrecisionExhausted) as exc:
            ok, msg = False, f"t={t}: {exc}"
        per_t[t] = per_t.get(t, 0) + 1
        tally.check(ok, msg)
    return tally.report("conj_gain", seed, ell=ell, s=s,
                        instances_per_t={str(k): per_t[k] for k in sorted(per_t)})


# -- bounds -----------------------------------------------------------------

GRID = [(n, K, H) for n in (2, 3, 5) for K in (1, 10, 100) for H in (1, 10)]


def suite_bounds(seed=0, trials=None):
    tally = _Tally()
    # integer formulas against their closed forms
    tally.check(B.alpha_g(2) == 8192, "alpha(2)")
    tally.check(B.GAMMA == 10 ** 13, "gamma")
    tally.check(B.K_ELL_CAP == 4608 and B.K2_CAP == 589824, "degree caps")
    tally.check(B.f_of_ell(3, 0, 0, 0) == 800 and B.f_of_ell(2, 0, 0, 0) == 15421, "f constants")
    for ell in (2, 3, 5, 7):
        for vd in range(4):
            for vb in range(6):
                n1 = B.n_j_from_valuations(ell, vd)
                v = 1 if ell == 2 else 0
                chained = B.ball_exponent_pair(ell, B.f_pair(vb, n1, n1, v), n1, n1)
                tally.check(chained <= B.f_of_ell(ell, vb, vd, vd),
                            f"chain l={ell} vD={vd} vb0={vb}: {chained}")
    verdicts = []
    for n, K, H in GRID:
        inp = B.BoundInputs(K, n, (H,) * n)
        ok = B.check_implication(inp)
        verdicts.append({"n": n, "K_degree": K, "H": H, "holds": ok})
        tally.check(ok, f"implication fails at n={n} K={K} H={H}")
    marks = B.delta_power_landmarks(2)
    # closed form e^12 log10 e - log10 ln 10 + log10 2 versus the tower evaluation
    import mpmath
    with mpmath.workdps(40):
        closed = (mpmath.exp(12) * mpmath.log10(mpmath.e) - mpmath.log10(mpmath.log(10))
                  + mpmath.log10(2))
    tally.check(abs(float(marks["log10_log10"]) - float(closed)) < 1e-9,
                "delta^2 log10 log10 disagrees with its closed form")
    return tally.report("bounds", seed, grid=verdicts, delta_squared=marks)


SUITES = {
    "hensel": suite_hensel,
    "eigen_defect": suite_eigen_defect,
    "adjoint_charpoly": suite_adjoint_charpoly,
    "inner": suite_inner,
    "goursat": suite_goursat,
    "ball_index": suite_ball_index,
    "conj_gain": suite_conj_gain,
    "bounds": suite_bounds,
}


def run_suites(names, seed=0, trials=None):
    reports = [SUITES[name](seed=seed, trials=trials) for name in names]
    return {"seed": seed, "suites": reports,
            "passed": all(r["passed"] for r in reports)}
