"""Numerical kernels: prefix RSS, OLS, regularized incomplete beta."""

import math
import subprocess
import sys

import numpy as np
import pytest

from crosstalk import _pykernels, kernels

from conftest import load_fixture


def _random_problem(rng, n, p):
    X = rng.normal(0.0, 1.0, (n, p))
    X[:, 0] = 1.0
    beta = rng.normal(0.0, 2.0, p)
    y = X @ beta + rng.normal(0.0, 0.5, n)
    return X, y


def _rss_by_lstsq(X, y, k):
    if k == 0:
        return float(y @ y)
    resid = y - X[:, :k] @ np.linalg.lstsq(X[:, :k], y, rcond=None)[0]
    return float(resid @ resid)


class TestPrefixRss:
    def test_matches_per_prefix_lstsq(self):
        rng = np.random.default_rng(11)
        X, y = _random_problem(rng, 120, 6)
        rss, rdiag = kernels.prefix_rss(X, y)
        assert rss.shape == (7,)
        assert rdiag.shape == (6,)
        for k in range(7):
            expect = _rss_by_lstsq(X, y, k)
            assert rss[k] == pytest.approx(expect, rel=1e-10)

    def test_monotone_nonincreasing(self):
        rng = np.random.default_rng(12)
        X, y = _random_problem(rng, 200, 8)
        rss, _ = kernels.prefix_rss(X, y)
        assert np.all(np.diff(rss) <= 1e-9 * rss[0])

    def test_rdiag_flags_duplicate_column(self):
        rng = np.random.default_rng(13)
        X, y = _random_problem(rng, 80, 4)
        X[:, 3] = X[:, 2]
        _, rdiag = kernels.prefix_rss(X, y)
        assert abs(rdiag[3]) < 1e-8 * np.abs(rdiag).max()

    def test_shape_mismatch_raises(self):
        X = np.ones((10, 2))
        with pytest.raises(ValueError):
            kernels.prefix_rss(X, np.ones(9))


class TestOlsFit:
    def test_matches_lstsq(self):
        rng = np.random.default_rng(21)
        X, y = _random_problem(rng, 150, 5)
        beta, rss, diag_inv, rdiag = kernels.ols_fit(X, y)
        expect = np.linalg.lstsq(X, y, rcond=None)[0]
        np.testing.assert_allclose(beta, expect, rtol=1e-10)
        resid = y - X @ expect
        assert rss == pytest.approx(float(resid @ resid), rel=1e-10)
        np.testing.assert_allclose(
            diag_inv, np.diag(np.linalg.inv(X.T @ X)), rtol=1e-8
        )

    def test_standard_errors_against_closed_form(self):
        # Simple regression y = a + b t has textbook variance formulas.
        rng = np.random.default_rng(22)
        n = 100
        t = np.arange(n, dtype=float)
        y = 3.0 + 0.5 * t + rng.normal(0.0, 1.0, n)
        X = np.column_stack([np.ones(n), t])
        beta, rss, diag_inv, _ = kernels.ols_fit(X, y)
        sxx = float(((t - t.mean()) ** 2).sum())
        assert diag_inv[1] == pytest.approx(1.0 / sxx, rel=1e-10)
        assert diag_inv[0] == pytest.approx(1.0 / n + t.mean() ** 2 / sxx, rel=1e-10)


class TestBetaincReg:
    def test_frozen_grid_both_backends(self):
        worst = 0.0
        for row in load_fixture("f_cdf_grid.json"):
            d1, d2, x = row["d1"], row["d2"], row["x"]
            t = d1 * x / (d1 * x + d2)
            for impl in (kernels.betainc_reg, _pykernels.betainc_reg):
                worst = max(worst, abs(impl(d1 / 2.0, d2 / 2.0, t) - row["cdf"]))
        assert worst <= 1e-10

    def test_bounds_and_edges(self):
        assert kernels.betainc_reg(2.0, 3.0, 0.0) == 0.0
        assert kernels.betainc_reg(2.0, 3.0, 1.0) == 1.0
        for x in np.linspace(0.01, 0.99, 25):
            v = kernels.betainc_reg(0.5, 250.0, float(x))
            assert 0.0 <= v <= 1.0

    def test_symmetry_identity(self):
        # I_x(a, b) + I_{1-x}(b, a) = 1
        for a, b, x in [(0.5, 0.5, 0.3), (2.0, 7.0, 0.62), (5.0, 250.0, 0.015)]:
            total = kernels.betainc_reg(a, b, x) + kernels.betainc_reg(b, a, 1.0 - x)
            assert total == pytest.approx(1.0, abs=1e-12)


class TestBackends:
    def test_both_backends_agree(self):
        if kernels.BACKEND != "compiled":
            pytest.skip("compiled extension not available")
        rng = np.random.default_rng(31)
        X, y = _random_problem(rng, 90, 5)
        rss_c, rdiag_c = kernels.prefix_rss(X, y)
        rss_p, rdiag_p = _pykernels.prefix_rss(X, y)
        np.testing.assert_allclose(rss_c, rss_p, rtol=1e-12)
        np.testing.assert_allclose(np.abs(rdiag_c), np.abs(rdiag_p), rtol=1e-9)
        beta_c, r_c, di_c, _ = kernels.ols_fit(X, y)
        beta_p, r_p, di_p, _ = _pykernels.ols_fit(X, y)
        np.testing.assert_allclose(beta_c, beta_p, rtol=1e-10)
        assert r_c == pytest.approx(r_p, rel=1e-12)
        np.testing.assert_allclose(di_c, di_p, rtol=1e-9)
        for a, b, x in [(1.5, 4.0, 0.2), (5.0, 50.0, 0.08)]:
            assert kernels.betainc_reg(a, b, x) == pytest.approx(
                _pykernels.betainc_reg(a, b, x), abs=1e-12
            )

    def test_env_var_selects_backend(self):
        for requested in ("python", "compiled", "auto"):
            code = (
                "from crosstalk import kernels; print(kernels.BACKEND)"
            )
            proc = subprocess.run(
                [sys.executable, "-c", code],
                capture_output=True,
                text=True,
                env={"PATH": "/usr/bin:/bin", "CROSSTALK_KERNELS": requested},
            )
            if proc.returncode != 0:
                assert requested == "compiled", proc.stderr
                continue
            got = proc.stdout.strip()
            if requested == "auto":
                assert got in ("compiled", "python")
            else:
                assert got == requested

    def test_bad_env_var_rejected(self):
        proc = subprocess.run(
            [sys.executable, "-c", "import crosstalk.kernels"],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "CROSSTALK_KERNELS": "gpu"},
        )
        assert proc.returncode != 0
        assert "CROSSTALK_KERNELS" in proc.stderr
