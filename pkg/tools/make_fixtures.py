"""One-time generator for the frozen fixtures under tests/fixtures/.

Runs the in-repo estimators against independent references
(statsmodels for the two time-series tests, mpmath at 50 digits for
the F distribution) and freezes series plus reference numbers into
JSON. The library never imports any of these packages; regenerate only
when the fixture set itself needs to change, then re-run the test
suite against the new files.

Usage: python3 tools/make_fixtures.py
"""

from __future__ import annotations

import json
import pathlib
import sys
import warnings

import mpmath
import numpy as np
from statsmodels.tsa.stattools import adfuller, grangercausalitytests

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from crosstalk.causality import granger_f
from crosstalk.stationarity import adf_test, default_max_lag

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"

GRANGER_MAX_LAG = 10


def _ar1(rng: np.random.Generator, n: int, phi: float, scale: float = 1.0) -> np.ndarray:
    x = np.empty(n)
    x[0] = rng.normal(0.0, scale)
    eps = rng.normal(0.0, scale, n)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + eps[t]
    return x


def _coupled_pair(
    rng: np.random.Generator,
    n: int,
    phi_x: float,
    phi_y: float,
    gain: float,
    lag: int,
    noise_y: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Source AR(1) driving the target at a fixed delay."""
    x = _ar1(rng, n, phi_x)
    y = np.empty(n)
    eps = rng.normal(0.0, noise_y, n)
    y[:lag] = eps[:lag]
    for t in range(lag, n):
        y[t] = phi_y * y[t - 1] + gain * x[t - lag] + eps[t]
    return x, y


def granger_cases() -> list[dict]:
    specs = [
        # (name, n, builder kwargs)
        ("coupled_lag1_strong", 200, dict(phi_x=0.6, phi_y=0.4, gain=0.9, lag=1)),
        ("coupled_lag1_weak", 320, dict(phi_x=0.5, phi_y=0.3, gain=0.25, lag=1)),
        ("coupled_lag2", 280, dict(phi_x=0.7, phi_y=0.2, gain=0.7, lag=2)),
        ("coupled_lag3", 360, dict(phi_x=0.5, phi_y=0.5, gain=0.6, lag=3)),
        ("coupled_lag5", 500, dict(phi_x=0.6, phi_y=0.3, gain=0.8, lag=5)),
        ("coupled_noisy_target", 440, dict(phi_x=0.6, phi_y=0.4, gain=0.5, lag=1, noise_y=3.0)),
        ("coupled_near_unit_source", 400, dict(phi_x=0.95, phi_y=0.3, gain=0.4, lag=2)),
        ("coupled_negative_gain", 300, dict(phi_x=0.4, phi_y=0.6, gain=-0.7, lag=1)),
    ]
    cases = []
    for i, (name, n, kw) in enumerate(specs):
        rng = np.random.default_rng(9100 + i)
        x, y = _coupled_pair(rng, n, **kw)
        cases.append((name, x, y))

    # Null pairs: independent processes, no directed influence.
    null_specs = [
        ("null_white_noise", 200, 0.0, 0.0),
        ("null_ar_vs_ar", 350, 0.6, 0.5),
        ("null_near_unit", 500, 0.9, 0.92),
        ("null_mixed", 260, 0.0, 0.7),
    ]
    for i, (name, n, phi_a, phi_b) in enumerate(null_specs):
        rng = np.random.default_rng(9300 + i)
        x = _ar1(rng, n, phi_a) if phi_a else rng.normal(0.0, 1.0, n)
        y = _ar1(rng, n, phi_b) if phi_b else rng.normal(0.0, 1.0, n)
        cases.append((name, x, y))

    # Reverse direction of a coupled pair: y drives x, test x -> y.
    rng = np.random.default_rng(9500)
    y_src, x_tgt = _coupled_pair(rng, 380, phi_x=0.6, phi_y=0.4, gain=0.8, lag=2)
    cases.append(("reverse_of_coupled", x_tgt, y_src))

    # Bidirectional feedback.
    rng = np.random.default_rng(9501)
    n = 420
    x = np.zeros(n)
    y = np.zeros(n)
    ex = rng.normal(0.0, 1.0, n)
    ey = rng.normal(0.0, 1.0, n)
    for t in range(1, n):
        x[t] = 0.4 * x[t - 1] + 0.3 * y[t - 1] + ex[t]
        y[t] = 0.5 * y[t - 1] + 0.4 * x[t - 1] + ey[t]
    cases.append(("bidirectional_feedback", x, y))

    # Scaled and shifted copy of a coupled pair (affine units).
    rng = np.random.default_rng(9502)
    x, y = _coupled_pair(rng, 240, phi_x=0.5, phi_y=0.4, gain=0.6, lag=1)
    cases.append(("affine_units", 250.0 + 40.0 * x, 1e6 + 2.5e4 * y))

    # Trending pair: common linear trend plus an actual coupling.
    rng = np.random.default_rng(9503)
    x, y = _coupled_pair(rng, 460, phi_x=0.5, phi_y=0.3, gain=0.5, lag=1)
    t = np.arange(460, dtype=np.float64)
    cases.append(("common_trend_coupled", x + 0.02 * t, y + 0.015 * t))

    # Common trend, no coupling: classic spurious-regression shape.
    rng = np.random.default_rng(9504)
    t = np.arange(320, dtype=np.float64)
    cases.append((
        "common_trend_null",
        0.03 * t + rng.normal(0.0, 1.0, 320),
        0.03 * t + rng.normal(0.0, 1.0, 320),
    ))

    # Seasonal target with a lagged driver.
    rng = np.random.default_rng(9505)
    n = 480
    x = _ar1(rng, n, 0.6)
    season = 2.0 * np.sin(2.0 * np.pi * np.arange(n) / 24.0)
    y = np.empty(n)
    eps = rng.normal(0.0, 1.0, n)
    y[:4] = eps[:4]
    for tt in range(4, n):
        y[tt] = 0.3 * y[tt - 1] + 0.6 * x[tt - 4] + eps[tt]
    cases.append(("seasonal_lag4", x, y + season))

    # Heavy-tailed innovations.
    rng = np.random.default_rng(9506)
    n = 300
    x = _ar1(rng, n, 0.5)
    y = np.empty(n)
    eps = rng.standard_t(3, n)
    y[0] = eps[0]
    for tt in range(1, n):
        y[tt] = 0.4 * y[tt - 1] + 0.5 * x[tt - 1] + eps[tt]
    cases.append(("heavy_tails", x, y))

    # Small-n boundary for the default search depth.
    rng = np.random.default_rng(9507)
    x, y = _coupled_pair(rng, 200, phi_x=0.3, phi_y=0.3, gain=0.45, lag=1)
    cases.append(("small_n_boundary", x, y))

    assert len(cases) == 20, f"expected 20 granger cases, got {len(cases)}"

    out = []
    for name, x, y in cases:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        q, f_mine, p_mine, n_eff = granger_f(x, y, max_lag=GRANGER_MAX_LAG)
        data = np.column_stack([y, x])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = grangercausalitytests(data, maxlag=[q])
        f_ref, p_ref, df_denom, df_num = res[q][0]["ssr_ftest"]
        rel = abs(f_mine - f_ref) / abs(f_ref)
        if rel > 1e-10:
            raise SystemExit(f"{name}: F mismatch at generation, rel={rel:.3e}")
        if abs(p_mine - p_ref) > 5e-11:
            raise SystemExit(f"{name}: p mismatch at generation, abs={abs(p_mine - p_ref):.3e}")
        if df_num != q or df_denom != n_eff - 2 * q - 1:
            raise SystemExit(f"{name}: degree-of-freedom convention drifted")
        out.append({
            "name": name,
            "x": x.tolist(),
            "y": y.tolist(),
            "max_lag": GRANGER_MAX_LAG,
            "lag": int(q),
            "n_effective": int(n_eff),
            "f_stat": float(f_ref),
            "p_value": float(p_ref),
        })
        print(f"granger {name:26s} n={len(x):3d} q={q} F={f_ref:10.4f} p={p_ref:.3e} rel={rel:.1e}")
    return out


def adf_cases() -> list[dict]:
    specs: list[tuple[str, np.ndarray]] = []

    rng = np.random.default_rng(4100)
    specs.append(("white_noise_500", rng.normal(0.0, 1.0, 500)))
    rng = np.random.default_rng(4101)
    specs.append(("white_noise_240", rng.normal(5.0, 2.0, 240)))
    rng = np.random.default_rng(4102)
    specs.append(("random_walk_500", np.cumsum(rng.normal(0.0, 1.0, 500))))
    rng = np.random.default_rng(4103)
    specs.append(("random_walk_320", np.cumsum(rng.normal(0.0, 0.5, 320))))
    rng = np.random.default_rng(4104)
    specs.append(("ar_08_450", _ar1(rng, 450, 0.8)))
    rng = np.random.default_rng(4105)
    specs.append(("ar_08_260", _ar1(rng, 260, 0.8, scale=3.0)))
    rng = np.random.default_rng(4106)
    t = np.arange(500, dtype=np.float64)
    specs.append(("linear_trend_500", 0.05 * t + rng.normal(0.0, 1.0, 500)))
    rng = np.random.default_rng(4107)
    t = np.arange(280, dtype=np.float64)
    specs.append(("linear_trend_280", 10.0 + 0.08 * t + rng.normal(0.0, 2.0, 280)))
    rng = np.random.default_rng(4108)
    specs.append(("drifting_walk_400", np.cumsum(rng.normal(0.05, 1.0, 400))))
    rng = np.random.default_rng(4109)
    specs.append(("ar_05_350", _ar1(rng, 350, 0.5)))

    out = []
    for name, x in specs:
        x = np.asarray(x, dtype=np.float64)
        mine = adf_test(x)
        ref = adfuller(x, maxlag=mine.lag, autolag=None, regression="c")
        stat_ref = float(ref[0])
        if abs(mine.statistic - stat_ref) > 1e-8:
            raise SystemExit(
                f"{name}: statistic mismatch at generation, "
                f"mine={mine.statistic!r} ref={stat_ref!r}"
            )
        # Decisions must agree with the reference's own critical values,
        # i.e. the case sits far from the 5% boundary.
        ref_reject = stat_ref < ref[4]["5%"]
        if ref_reject != mine.stationary:
            raise SystemExit(f"{name}: verdict disagrees with reference critical values")
        if abs(stat_ref - ref[4]["5%"]) < 0.15:
            raise SystemExit(f"{name}: too close to the 5% boundary to freeze")
        out.append({
            "name": name,
            "values": x.tolist(),
            "max_lag": default_max_lag(len(x)),
            "lag": int(mine.lag),
            "n_effective": int(mine.n_effective),
            "statistic": stat_ref,
            "stationary": bool(mine.stationary),
            "p_band": mine.p_band.value,
        })
        print(
            f"adf {name:20s} n={len(x):3d} k={mine.lag} stat={stat_ref:9.4f} "
            f"stationary={mine.stationary}"
        )
    return out


def f_cdf_grid() -> list[dict]:
    mpmath.mp.dps = 50
    df_pairs = [
        (1, 1), (1, 10), (2, 2), (3, 7), (5, 5),
        (7, 3), (2, 500), (4, 250), (10, 100), (10, 500),
    ]
    xs = [0.1, 0.5, 1.0, 2.5, 10.0]
    out = []
    for d1, d2 in df_pairs:
        for x in xs:
            t = mpmath.mpf(d1) * x / (mpmath.mpf(d1) * x + d2)
            cdf = mpmath.betainc(
                mpmath.mpf(d1) / 2, mpmath.mpf(d2) / 2, 0, t, regularized=True
            )
            out.append({"d1": d1, "d2": d2, "x": x, "cdf": float(cdf)})
    print(f"f_cdf grid: {len(out)} points, df up to {df_pairs[-1]}")
    return out


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    files = {
        "granger_pairs.json": granger_cases(),
        "adf_cases.json": adf_cases(),
        "f_cdf_grid.json": f_cdf_grid(),
    }
    for fname, payload in files.items():
        path = FIXTURES / fname
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        print(f"wrote {path} ({path.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
