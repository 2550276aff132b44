"""Registry of reproducible experiments and the machinery to run them.

Each scenario computes named metrics, compares them with pinned bands and
optionally writes CSV data plus a ``summary.json`` into an output directory.
Coupled-wave scenarios evolve the linearized error directly (model
``coupled-wave-linear``) from unit-amplitude noise, which isolates the
linear stability behaviour from round-off and nonlinear saturation. Long
runs with growing low-k modes start from tiny noise instead so they stay
below the blow-up guard; the linear dynamics are scale free.
"""

import dataclasses
import hashlib
import json
import os
import tempfile
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.optimize

from . import spectral as sp
from . import stability as st
from .config import ScenarioConfig
from .errors import ConfigError
from .model import RNG_NAME, NoiseSpec, make_grid, make_model
from .schemes import SchemeId, run

DEFAULT_MASTER_SEED = 20240601
SEED_ENV = "MOCLAB_SEED"


@dataclass
class Metric:
    """A measured value with an optional pass band ``[lo, hi]``.

    ``passed`` is ``None`` for informational values.
    """

    name: str
    value: object
    lo: float = None
    hi: float = None
    passed: bool = None
    note: str = ""


@dataclass
class RunSummary:
    scenario: str
    name: str
    figure: str
    criteria: tuple
    metrics: list
    wall_time: float
    master_seed: int
    seed: int
    rng: str
    fingerprints: dict
    config: dict
    files: list = field(default_factory=list)

    @property
    def passed(self):
        return all(m.passed is not False for m in self.metrics)

    def metric(self, name):
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(name)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["passed"] = self.passed
        d["criteria"] = list(self.criteria)
        return d


@dataclass(frozen=True)
class Scenario:
    id: str
    figure: str
    description: str
    criteria: tuple
    defaults: dict
    fn: object


# ---------------------------------------------------------------- output


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_num(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _tag(t):
    return ("%.10g" % t).replace("+", "")


# ---------------------------------------------------------------- seeds


def master_seed(cfg=None):
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env, 0)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
    if cfg is not None and cfg.seed is not None:
        return int(cfg.seed)
    return DEFAULT_MASTER_SEED


def derive_seed(master, scenario_id):
    """64-bit run seed from the master seed and the scenario id."""
    ss = np.random.SeedSequence([int(master) % 2**64, zlib.crc32(scenario_id.encode())])
    hi, lo = ss.generate_state(2, np.uint32)
    return (int(hi) << 32) | int(lo)


def spawn_seeds(seed, n):
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def code_fingerprint():
    h = hashlib.sha256()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


def config_fingerprint(cfg_dict):
    return hashlib.sha256(json.dumps(cfg_dict, sort_keys=True).encode()).hexdigest()


# ---------------------------------------------------------------- context


class Context:
    """Per-run state handed to scenario functions."""

    def __init__(self, cfg, seed, out=None):
        self.cfg = cfg
        self.seed = seed
        self.out = Path(out) if out is not None else None
        self.metrics = []
        self.files = []

    def band(self, name, value, lo=None, hi=None, note=""):
        value = float(value)
        ok = np.isfinite(value) and (lo is None or value >= lo) and (hi is None or value <= hi)
        self.metrics.append(Metric(name, value, lo, hi, bool(ok), note))
        return value

    def check(self, name, ok, value=None, note=""):
        self.metrics.append(Metric(name, value if value is not None else bool(ok),
                                   passed=bool(ok), note=note))
        return bool(ok)

    def info(self, name, value, note=""):
        if isinstance(value, (list, tuple, np.ndarray)):
            value = [float(v) for v in value]
        else:
            value = float(value)
        self.metrics.append(Metric(name, value, note=note))
        return value

    def csv(self, name, header, rows):
        if self.out is None:
            return
        atomic_write(self.out / name, csv_text(header, rows))
        self.files.append(name)

    def spectra(self, spec, times=None, prefix=""):
        """Write ``spectrum_<t>.csv`` with columns k, kh, |amp| per component."""
        if self.out is None:
            return
        kh = spec.k * spec.h
        for t, amp in zip(spec.times, spec.amplitudes):
            if times is not None and not np.any(np.isclose(t, times)):
                continue
            mag = np.abs(amp)
            header = ["k", "kh"] + [f"amp{j}" for j in range(mag.shape[1])]
            rows = np.column_stack([spec.k, kh, mag])
            self.csv(f"spectrum_{prefix}{_tag(t)}.csv", header, rows)

    def seeds(self, n):
        return spawn_seeds(self.seed, n)


# ---------------------------------------------------------------- helpers


def _model(cfg):
    if cfg.model == "gross-neveu":
        return make_model(cfg.model, cfg.omega if cfg.omega is not None else 0.7)
    return make_model(cfg.model)


def _run(cfg, grid, seed, t_final, sample_every, *, scheme=None, bc=None, noise=None,
         startup=None, model=None):
    model = model or _model(cfg)
    sid = SchemeId(scheme or cfg.scheme, startup or cfg.startup or "me")
    amp = cfg.noise if noise is None else noise
    return run(model, sid, bc or cfg.bc, grid, NoiseSpec(amp, seed), t_final, sample_every)


def _staircase_runs(ctx, scheme, L, h, seed, boxes, periods=4):
    """Run ``periods`` domain lengths and fit ``|lambda|^{2M}`` per box.

    ``boxes`` maps a label to ``(m_ave, kh)``. Returns ``(lam2M, norms,
    series, spec)`` with the first two keyed like ``boxes``.
    """
    cfg = ctx.cfg
    grid = make_grid(L, h)
    series = _run(cfg, grid, seed, periods * L, L, scheme=scheme)
    spec = sp.spectrum_series(series, grid, windowed=cfg.windowed)
    norms, lam2M = {}, {}
    for key, (m, kh) in boxes.items():
        nr = sp.mid_norms(spec, m, kh)
        norms[key] = nr
        lam = sp.staircase_lambda(series.times[1:], nr[1:], L, h)
        lam2M[key] = lam ** (2 * grid.M)
    return lam2M, norms, series, spec


def _fold_kh(spec):
    kh = spec.k * spec.h
    return np.minimum(kh, 2 * np.pi - kh)


# ---------------------------------------------------------------- scenarios


def _vn_curves(ctx):
    c = ctx.cfg
    h = c.h
    schemes = [c.scheme] if c.scheme else ["se", "me", "lf"]
    kh = np.linspace(0.0, np.pi, c.n_points)

    def gmax(s, q):
        return float(np.max(np.abs(st.von_neumann_factors(s, q, h))))

    cols = {s: st.von_neumann_curve(s, kh, h) for s in schemes}
    ctx.csv("vn.csv", ["kh"] + [f"max_abs_lambda_{s}" for s in schemes],
            np.column_stack([kh] + [cols[s] for s in schemes]))
    if "se" in schemes:
        ctx.band("se_growth_over_h2_kh0", (gmax("se", 0.0) - 1) / h**2, 2.97, 3.03)
        ctx.band("se_growth_over_h2_khpi", (gmax("se", np.pi) - 1) / h**2, 2.97, 3.03)
    if "me" in schemes:
        mid, zero = gmax("me", np.pi / 2), gmax("me", 0.0)
        ctx.check("me_mid_exceeds_kh0", mid > 1.0 and mid > zero, mid - zero)
    if "lf" in schemes:
        g = cols["lf"]
        i = int(np.argmax(g))
        lo, hi = kh[max(i - 1, 0)], kh[min(i + 1, len(kh) - 1)]
        res = scipy.optimize.minimize_scalar(lambda q: -gmax("lf", q), bounds=(lo, hi),
                                             method="bounded", options={"xatol": 1e-12})
        peak = max(-res.fun, g[i])
        where = res.x if -res.fun >= g[i] else kh[i]
        ctx.band("lf_peak_alpha", (peak - 1) / h, 1.47, 1.53)
        ctx.band("lf_peak_kh_offset", abs(where - np.pi / 2), 0.0, 0.05)


def _fig2(ctx):
    c = ctx.cfg
    grid = make_grid(c.L, c.h)
    series = _run(c, grid, ctx.seed, c.t_final, c.sample_every)
    spec = sp.spectrum_series(series, grid, windowed=c.windowed)
    kh = _fold_kh(spec)
    ends = (kh < np.pi / 8) | (kh > 7 * np.pi / 8)
    end_norm = np.array([np.sqrt(np.mean(spec.norms(j)[ends] ** 2)) for j in range(len(spec.times))])
    mid = sp.mid_norms(spec, c.m_ave)
    ctx.spectra(spec)
    ctx.csv("series.csv", ["t", "mid_norm", "end_norm", "total_norm"],
            np.column_stack([series.times, mid, end_norm, series.norms]))
    ctx.band("end_growth", end_norm[-1] / end_norm[-2], lo=1.0)
    ctx.band("mid_decay", mid[-1] / mid[-2], hi=1.0)


def _fig3(ctx):
    c = ctx.cfg
    L, h = c.L, c.h
    grid = make_grid(L, h)
    series = _run(c, grid, ctx.seed, c.t_final, c.sample_every)
    spec = sp.spectrum_series(series, grid, windowed=c.windowed)
    mid = sp.mid_norms(spec, c.m_ave)
    ctx.csv("series.csv", ["t", "mid_norm"], np.column_stack([series.times, mid]))
    k = np.round(series.times / L)
    on = np.isclose(series.times, k * L) & (k >= 1)
    ctx.spectra(spec, times=series.times[on])
    lam = sp.staircase_lambda(series.times[on], mid[on], L, h)
    meas = lam ** (2 * grid.M)
    pred = st.se_lambda_predictions(L, h)["magnitude_2M"]
    ctx.info("abs_lambda", lam)
    ctx.info("lambda_2M_predicted", pred)
    ctx.band("lambda_2M_ratio", meas / pred, 0.5, 2.0)


def _fig4(ctx):
    c = ctx.cfg
    cases = [(50.0, 0.02), (25.0, 0.0125), (25.0, 0.00625)]
    seeds = ctx.seeds(len(cases) + len(c.h_list))
    rows = []
    box = {"mid": (c.m_ave, np.pi / 2)}
    for (L, h), seed in zip(cases, seeds):
        lam2M, *_ = _staircase_runs(ctx, "se", L, h, seed, box)
        pred = st.se_lambda_predictions(L, h)["magnitude_2M"]
        rows.append((L, h, lam2M["mid"], pred))
        ctx.band(f"ratio_L{L:g}_h{h:g}", lam2M["mid"] / pred, 0.5, 2.0)
    vals = []
    for h, seed in zip(c.h_list, seeds[len(cases):]):
        lam2M, *_ = _staircase_runs(ctx, "se", c.L, h, seed, box)
        vals.append(lam2M["mid"])
        rows.append((c.L, h, lam2M["mid"], st.se_lambda_predictions(c.L, h)["magnitude_2M"]))
    ctx.csv("series.csv", ["L", "h", "lambda_2M_measured", "lambda_2M_predicted"], rows)
    ctx.band("slope", sp.loglog_slope(c.h_list, vals), 1.7, 2.4)


def _fig7(ctx):
    c = ctx.cfg
    grid = make_grid(c.L, c.h)
    M = grid.M
    near = c.m_ave_near if c.m_ave_near is not None else int(0.025 * M)
    away = c.m_ave_away if c.m_ave_away is not None else int(0.1 * M)
    seeds = ctx.seeds(c.realizations)
    r_wide, r_wing = [], []
    for i, seed in enumerate(seeds):
        series = _run(c, grid, seed, 3 * c.L, c.L)
        spec = sp.spectrum_series(series, grid, windowed=c.windowed)
        amps = spec.amplitudes[1:4]
        r_wide.append(sp.dip_ratio(amps, near, away))
        r_wing.append(sp.dip_ratio(amps, near, near, kh_away=np.pi / 4))
        if i == 0:
            ctx.spectra(spec)
            ctx.csv("series.csv", ["t", "near_norm", "wide_norm", "wing_norm"],
                    np.column_stack([series.times, sp.mid_norms(spec, near),
                                     sp.mid_norms(spec, away), sp.mid_norms(spec, near, np.pi / 4)]))
    r = np.mean(r_wide, axis=0)
    ctx.band("dip_ratio_12", r[0], 1.6, 2.2, note=f"near box {near}, away box {away}, both at pi/2")
    ctx.band("dip_ratio_23", r[1], 1.6, 2.2)
    ctx.info("dip_ratio_wing_pi4", np.mean(r_wing, axis=0),
             note="away box of the same width centred at pi/4")


def _fig8(ctx):
    c = ctx.cfg
    L = c.L
    labels = ("narrow", "wide", "m20")
    logs = {k: [] for k in labels}
    rows = []
    for h, hseed in zip(c.h_list, ctx.seeds(len(c.h_list))):
        M = make_grid(L, h).M
        boxes = {"narrow": (int(0.025 * M), np.pi / 2), "wide": (int(0.1 * M), np.pi / 2),
                 "m20": (c.m_ave, np.pi / 2)}
        acc = {k: [] for k in labels}
        for seed in spawn_seeds(hseed, c.realizations):
            lam2M, *_ = _staircase_runs(ctx, "me", L, h, seed, boxes)
            for k in labels:
                acc[k].append(np.log(lam2M[k]))
        for k in labels:
            logs[k].append(np.mean(acc[k]))
        rows.append([h] + [np.exp(logs[k][-1]) for k in labels])
    ctx.csv("series.csv", ["h"] + [f"lambda_2M_{k}" for k in labels], rows)
    hs = np.asarray(c.h_list)
    slope = {k: float(np.polyfit(np.log(hs), logs[k], 1)[0]) for k in labels}
    ctx.band("slope_narrow", slope["narrow"], 3.5, 4.5, note="m_ave = floor(0.025 M)")
    ctx.band("slope_wide", slope["wide"], 1.5, 2.5, note="m_ave = floor(0.1 M)")
    ctx.info("slope_m20", slope["m20"], note="fixed m_ave")


def _fig9(ctx):
    c = ctx.cfg
    scan = st.lf_alpha_scan(c.L, c.h, (c.alpha_min, c.alpha_max), c.n_points)
    ctx.csv("detphi_scan.csv", ["alpha", "abs_detphi_plus"],
            np.column_stack([scan["alphas"], scan["detphi"]]))
    roots = scan["roots_nonreflecting"]
    per = scan["alphas_periodic"]
    ctx.csv("roots.csv", ["alpha_root"], roots[:, None])
    ctx.csv("periodic_alphas.csv", ["alpha_periodic"], per[:, None])
    ctx.check("roots_found", len(roots) > 0, len(roots))
    inside = bool(len(roots) and np.all((roots >= np.sqrt(2) - 1e-12) & (roots <= 1.5 + 1e-12)))
    ctx.check("roots_in_window", inside)
    if len(roots):
        ctx.info("max_root", roots.max())
        ctx.info("max_periodic", per.max())
        ctx.band("max_alpha_gap", abs(roots.max() - per.max()) / per.max(), 0.0, 0.02)


def _fig10a(ctx):
    c = ctx.cfg
    grid = make_grid(c.L, c.h)
    series = _run(c, grid, ctx.seed, c.t_final, c.L)
    spec = sp.spectrum_series(series, grid, windowed=c.windowed)
    mid = sp.mid_norms(spec, c.m_ave)
    ctx.spectra(spec)
    ctx.csv("series.csv", ["t", "mid_norm"], np.column_stack([series.times, mid]))
    ctx.info("growth_factors", mid[2:] / mid[1:-1])
    r = np.polyfit(series.times[1:], np.log(mid[1:]), 1)[0]
    ctx.band("growth_per_L", np.exp(r * c.L), 4.0, 16.0, note="fit over t = L .. t_final")


def _fig10b(ctx):
    c = ctx.cfg
    rows = []
    Ls = list(c.L_list)
    for i, (L, seed) in enumerate(zip(Ls, ctx.seeds(len(Ls)))):
        grid = make_grid(L, c.h)
        series = _run(c, grid, seed, c.periods * L, L)
        spec = sp.spectrum_series(series, grid, windowed=c.windowed)
        mid = sp.mid_norms(spec, c.m_ave)
        d = np.diff(np.log(mid[1:]))
        rows.extend((L, t, v) for t, v in zip(series.times, mid))
        ctx.info(f"log_steps_L{L:g}", d)
        if i == 0:
            ctx.check(f"nonincreasing_L{L:g}", np.all(d <= 0), float(d.max()))
        if i == len(Ls) - 1:
            ctx.check(f"increasing_L{L:g}", np.all(d > 0), float(d.min()))
    ctx.csv("series.csv", ["L", "t", "mid_norm"], rows)


def _gn_grid(c, L=None):
    return make_grid(L if L is not None else c.L, c.h, centered=True)


def _fig12(ctx):
    c = ctx.cfg
    grid = _gn_grid(c)
    model = _model(c)
    s_per, s_nr = ctx.seeds(2)
    t_per = min(1000.0, c.t_final)
    per = _run(c, grid, s_per, t_per, c.sample_every, bc="periodic", model=model)
    nr = _run(c, grid, s_nr, c.t_final, c.sample_every, bc="nonreflecting", model=model)
    sp_per = sp.spectrum_series(per, grid, windowed=False)
    sp_nr = sp.spectrum_series(nr, grid, windowed=False)
    mid_per = sp.mid_norms(sp_per, c.m_ave)
    mid_nr = sp.mid_norms(sp_nr, c.m_ave)
    ctx.spectra(sp_per, times=[t_per], prefix="periodic_")
    ctx.spectra(sp_nr, times=[1000.0, c.t_final], prefix="nonreflecting_")
    rows = [("periodic", t, m, e) for t, m, e in zip(per.times, mid_per, per.norms)]
    rows += [("nonreflecting", t, m, e) for t, m, e in zip(nr.times, mid_nr, nr.norms)]
    if ctx.out is not None:
        text = "bc,t,mid_norm,err_tot\n" + "".join(
            f"{b},{_num(t)},{_num(m)},{_num(e)}\n" for b, t, m, e in rows)
        atomic_write(ctx.out / "series.csv", text)
        ctx.files.append("series.csv")
    j0 = int(np.argmin(np.abs(per.times - t_per / 4)))
    ctx.band("periodic_mid_growth", mid_per[-1] / mid_per[j0], lo=1.0,
             note=f"t = {per.times[j0]:g} to {t_per:g}")
    kh = _fold_kh(sp_per)
    sel = (kh >= np.pi / 8) & (kh <= 7 * np.pi / 8)
    nrm = sp_per.norms(len(sp_per.times) - 1)
    peak = kh[sel][np.argmax(nrm[sel])]
    ctx.band("periodic_peak_kh", peak, np.pi / 2 - np.pi / 8, np.pi / 2 + np.pi / 8,
             note="peak over kh in [pi/8, 7pi/8]")
    i1 = int(np.argmin(np.abs(nr.times - 1000.0)))
    ctx.band("nonreflecting_mid_ratio", mid_nr[-1] / mid_nr[i1], hi=1.0,
             note=f"t = {c.t_final:g} over t = 1000")
    ctx.info("err_tot_periodic", per.norms[-1])
    ctx.info("err_tot_nonreflecting_1000", nr.norms[i1])
    ctx.info("err_tot_nonreflecting_final", nr.norms[-1])


def _fig13(ctx):
    c = ctx.cfg
    L_dip, L_grow = c.L_list
    s_dip, s_grow = ctx.seeds(2)
    model = _model(c)
    grid = _gn_grid(c, L_dip)
    M = grid.M
    near = c.m_ave_near if c.m_ave_near is not None else int(0.025 * M)
    series = _run(c, grid, s_dip, c.periods * L_dip, L_dip, bc="nonreflecting", model=model)
    spec = sp.spectrum_series(series, grid, windowed=True)
    ctx.spectra(spec, prefix=f"L{L_dip:g}_")
    ratios = sp.dip_ratio(spec.amplitudes[1:], near, near, kh_away=np.pi / 4)
    ctx.info("dip_ratios", ratios, note=f"box {near} at pi/2 against pi/4")
    ctx.band("dip_ratio_min", min(ratios), 1.5, 2.5)
    ctx.band("dip_ratio_max", max(ratios), 1.5, 2.5)
    grid2 = _gn_grid(c, L_grow)
    periods = max(c.periods - 1, 3)
    ser2 = _run(c, grid2, s_grow, periods * L_grow, L_grow, bc="nonreflecting", model=model,
                noise=1e-12)
    spec2 = sp.spectrum_series(ser2, grid2, windowed=True)
    mid2 = sp.mid_norms(spec2, c.m_ave)
    d = np.diff(np.log(mid2[1:]))
    ctx.info(f"log_steps_L{L_grow:g}", d)
    ctx.check(f"growth_L{L_grow:g}", np.all(d > 0), float(d.min()))
    rows = [(L_dip, t, v) for t, v in zip(series.times, sp.mid_norms(spec, near))]
    rows += [(L_grow, t, v) for t, v in zip(ser2.times, mid2)]
    ctx.csv("series.csv", ["L", "t", "mid_norm"], rows)


def _growth_alpha(series, h, t_from):
    sel = series.times >= t_from
    r = np.polyfit(series.times[sel], np.log(series.norms[sel]), 1)[0]
    return (np.exp(r * h) - 1) / h


def _lf_growth(ctx):
    c = ctx.cfg
    grid = make_grid(c.L, c.h)
    scan = st.lf_alpha_scan(c.L, c.h, (c.alpha_min, c.alpha_max), c.n_points)
    ref = float(scan["roots_nonreflecting"].max())
    ctx.info("alpha_scan_max_root", ref)
    t0 = c.t_final / 4
    runs = [("periodic", "me"), ("nonreflecting", "me"), ("nonreflecting", "se"),
            ("nonreflecting", "rk4")]
    alphas = {}
    rows = []
    seed = ctx.seed
    for bc, startup in runs:
        s = _run(c, grid, seed, c.t_final, c.sample_every, bc=bc, startup=startup)
        alphas[(bc, startup)] = _growth_alpha(s, c.h, t0)
        rows.extend((bc, startup, t, n) for t, n in zip(s.times, s.norms))
    if ctx.out is not None:
        text = "bc,startup,t,total_norm\n" + "".join(
            f"{b},{u},{_num(t)},{_num(n)}\n" for b, u, t, n in rows)
        atomic_write(ctx.out / "series.csv", text)
        ctx.files.append("series.csv")
    for bc in ("periodic", "nonreflecting"):
        a = alphas[(bc, "me")]
        ctx.info(f"alpha_{bc}", a)
        ctx.band(f"alpha_gap_{bc}", abs(a / ref - 1), 0.0, 0.10)
    base = alphas[("nonreflecting", "me")]
    spread = max(abs(alphas[("nonreflecting", s)] / base - 1) for s in ("se", "rk4"))
    ctx.band("startup_spread", spread, 0.0, 0.01)


def _eigs(ctx):
    c = ctx.cfg
    M = make_grid(c.L, c.h).M
    A = st.assemble_amplification_matrix(c.scheme, M, c.h, periodic=(c.bc == "periodic"),
                                         startup=c.startup or "se")
    ev = st.eig_dense(A.matrix)
    ctx.csv("eigs.csv", ["re", "im", "abs"], np.column_stack([ev.real, ev.imag, np.abs(ev)]))
    ctx.info("max_abs_lambda", np.abs(ev).max())
    ctx.check("zero_eigenvalues", np.sum(np.abs(ev) < 1e-8) >= (4 if c.bc != "periodic" else 0),
              int(np.sum(np.abs(ev) < 1e-8)))
    if c.scheme == "se" and c.bc != "periodic":
        sel = (np.abs(ev) > 1e-8) & (np.abs(np.angle(ev**2) - np.pi) < 0.5)
        meas = np.abs(ev[sel]).max()
        pred = st.se_lambda_predictions(c.L, c.h)["magnitude_2M"] ** (1 / (2 * M))
        ctx.band("mid_modulus_rel_gap", abs(meas / pred - 1), 0.0, 0.02)


def _custom(ctx):
    c = ctx.cfg
    grid = make_grid(c.L, c.h, centered=(c.model == "gross-neveu"))
    series = _run(c, grid, ctx.seed, c.t_final, c.sample_every)
    spec = sp.spectrum_series(series, grid, windowed=c.windowed)
    ctx.spectra(spec)
    cols = [series.times, series.norms]
    header = ["t", "total_norm"]
    if grid.M >= 4 * c.m_ave + 4:
        cols.append(sp.mid_norms(spec, c.m_ave, c.kh))
        header.append("mid_norm")
    ctx.csv("series.csv", header, np.column_stack(cols))
    ctx.info("final_total_norm", series.norms[-1])


_CW = {"model": "coupled-wave-linear", "bc": "nonreflecting", "noise": 1.0, "windowed": True,
       "m_ave": 20, "realizations": 1, "kh": np.pi / 2}
_GN = {"model": "gross-neveu", "scheme": "me", "bc": "nonreflecting", "omega": 0.7,
       "windowed": False, "m_ave": 20, "realizations": 1, "kh": np.pi / 2}
_LF = {"alpha_min": float(np.sqrt(2)), "alpha_max": 1.5}


def _d(base, **kw):
    out = dict(base)
    out.update(kw)
    return out


SCENARIOS = {s.id: s for s in [
    Scenario("vn-curves", "Fig. 1", "von Neumann amplification factors over kh",
             (1, 2), {"h": 0.01, "n_points": 2001}, _vn_curves),
    Scenario("fig2", "Fig. 2", "SE spectra: growing ends and decaying middle",
             (), _d(_CW, scheme="se", L=50.0, h=0.02, t_final=200.0, sample_every=100.0), _fig2),
    Scenario("fig3", "Fig. 3", "SE staircase evolution of the mid-spectrum norm",
             (3,), _d(_CW, scheme="se", L=25.0, h=0.00625, t_final=100.0, sample_every=1.0),
             _fig3),
    Scenario("fig4", "Fig. 4", "SE |lambda|^2M against the closed form and its h-slope",
             (3, 4), _d(_CW, scheme="se", L=25.0,
                        h_list=(0.01, 0.005, 0.0025, 0.00125, 0.000625)), _fig4),
    Scenario("fig7", "Fig. 7", "ME dip at kh = pi/2 deepening faster than the wide box",
             (5,), _d(_CW, scheme="me", L=25.0, h=0.05), _fig7),
    Scenario("fig8", "Fig. 8", "ME slope of |lambda|^2M for narrow and wide boxes",
             (6,), _d(_CW, scheme="me", L=25.0, realizations=10,
                      h_list=(0.01, 0.005, 0.0025, 0.001, 0.0005)), _fig8),
    Scenario("fig9", "Fig. 9", "LF det Phi+ scan against periodic growth rates",
             (9,), _d(_LF, L=50.0, h=0.01, n_points=20001), _fig9),
    Scenario("fig10a", "Fig. 10(a)", "SE growth at large Lh",
             (8,), _d(_CW, scheme="se", L=200.0, h=0.02, t_final=600.0, noise=1e-12), _fig10a),
    Scenario("fig10b", "Fig. 10(b)", "ME stability lost as L grows at fixed h",
             (7,), _d(_CW, scheme="me", L_list=(300.0, 600.0), h=0.02, periods=4,
                      noise=1e-12), _fig10b),
    Scenario("fig12", "Fig. 12", "Gross-Neveu soliton under periodic and nonreflecting BC",
             (11,), _d(_GN, L=64.0, h=64 / 2**12, noise=1e-12, t_final=5000.0,
                       sample_every=250.0), _fig12),
    Scenario("fig13", "Fig. 13", "Gross-Neveu dip dynamics and growth at large L",
             (12,), _d(_GN, L_list=(128.0, 600.0), h=128 / 2**12, noise=1e-6, periods=5,
                       windowed=True), _fig13),
    Scenario("lf-growth", "Sec. 6", "LF growth rate in simulation against the scan",
             (10,), _d(_CW | _LF, scheme="lf", L=50.0, h=0.01, noise=1e-10, t_final=20.0,
                       sample_every=0.5, n_points=4001, startup="me"), _lf_growth),
    Scenario("eigs", "-", "dense spectrum of the amplification matrix",
             (), {"scheme": "se", "bc": "nonreflecting", "L": 16.0, "h": 0.25}, _eigs),
    Scenario("custom", "-", "single simulation with user parameters",
             (), _d(_CW, scheme="me", L=25.0, h=0.05, t_final=100.0, sample_every=25.0), _custom),
]}


def resolve(cfg):
    """Merge ``cfg`` with its scenario defaults."""
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    return cfg.merged(SCENARIOS[cfg.scenario].defaults)


def run_scenario(cfg, out=None):
    """Run one configured scenario and return its :class:`RunSummary`.

    ``cfg`` may also be a scenario id. With ``out`` set, data files and
    ``summary.json`` are written there.
    """
    if isinstance(cfg, str):
        cfg = ScenarioConfig(name=cfg, scenario=cfg)
    full = resolve(cfg)
    sc = SCENARIOS[full.scenario]
    master = master_seed(cfg)
    seed = derive_seed(master, full.scenario)
    ctx = Context(full, seed, out)
    t0 = time.perf_counter()
    sc.fn(ctx)
    wall = time.perf_counter() - t0
    cfg_dict = full.as_dict()
    summary = RunSummary(full.scenario, full.name, sc.figure, sc.criteria, ctx.metrics, wall,
                         master, seed, RNG_NAME,
                         {"code": code_fingerprint(), "config": config_fingerprint(cfg_dict)},
                         cfg_dict, ctx.files)
    if ctx.out is not None:
        summary.files.append("summary.json")
        atomic_write(ctx.out / "summary.json",
                     json.dumps(summary.to_dict(), indent=2, sort_keys=True, default=float) + "\n")
    return summary


def _job(args):
    cfg, out = args
    return run_scenario(cfg, out)


def run_many(configs, out=None, jobs=1):
    """Run several configs, each into ``out/<name>``, on up to ``jobs`` processes.

    Results come back in input order regardless of completion order.
    """
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ConfigError("section names must be unique")
    args = [(c, None if out is None else Path(out) / c.name) for c in configs]
    if jobs <= 1 or len(args) <= 1:
        return [_job(a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_job, args))
