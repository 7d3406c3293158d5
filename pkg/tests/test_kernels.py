"""Backend parity: compiled kernels must match the NumPy fallback bitwise.

Both implementations keep the same per-element evaluation order and
leave reductions other than max to NumPy, so results are expected to be
identical down to the last bit, not merely close.
"""

import numpy as np
import pytest

from spectralns import _kernels_py
from spectralns.grid import GridSpec

cy = pytest.importorskip("spectralns._kernels_cy")


def _case(n=16, seed=0):
    rng = np.random.default_rng(seed)
    g = GridSpec(n)
    u = rng.standard_normal((3, n, n, n))
    du = rng.standard_normal((3, 3, n, n, n))
    c = np.ascontiguousarray(
        rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))
    )
    f = np.ascontiguousarray(
        rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))
    )
    return g, u, du, c, f


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_advective_sum_bitwise(seed):
    _, u, du, _, _ = _case(seed=seed)
    assert np.array_equal(_kernels_py.advective_sum(u, du), cy.advective_sum(u, du))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_project_bitwise(seed):
    g, _, _, c, _ = _case(seed=seed)
    assert np.array_equal(_kernels_py.project(c, g.k1d), cy.project(c, g.k1d))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_combine_rhs_bitwise(seed):
    g, _, _, c, f = _case(seed=seed)
    a = _kernels_py.combine_rhs(c, c, f, g.k1d, 3.7e-4)
    b = cy.combine_rhs(c, c, f, g.k1d, 3.7e-4)
    assert np.array_equal(a, b)


def test_combine_rhs_without_forcing_bitwise():
    g, _, _, c, _ = _case(seed=3)
    a = _kernels_py.combine_rhs(c, c, None, g.k1d, 1e-2)
    b = cy.combine_rhs(c, c, None, g.k1d, 1e-2)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_apply_mask_bitwise(seed):
    g, _, _, c, _ = _case(seed=seed)
    assert np.array_equal(
        _kernels_py.apply_mask(c, g.dealias_mask), cy.apply_mask(c, g.dealias_mask)
    )


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_max_magnitude_identical(seed):
    _, u, _, _, _ = _case(seed=seed)
    assert _kernels_py.max_magnitude(u) == cy.max_magnitude(u)


def test_max_magnitude_nan_propagates_in_both():
    _, u, _, _, _ = _case(seed=4)
    u[1, 3, 2, 1] = np.nan
    assert np.isnan(_kernels_py.max_magnitude(u))
    assert np.isnan(cy.max_magnitude(u))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_max_divergence_identical(seed):
    g, _, _, c, _ = _case(seed=seed)
    assert _kernels_py.max_divergence(c, g.k1d) == cy.max_divergence(c, g.k1d)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_shell_max_bitwise(seed):
    g, _, _, c, _ = _case(seed=seed)
    a = _kernels_py.shell_max(c, g.shell_index, g.k_max)
    b = cy.shell_max(c, g.shell_index, g.k_max)
    assert np.array_equal(a, b)


def test_shell_max_nan_propagates_in_both():
    g, _, _, c, _ = _case(seed=5)
    c[0, 1, 0, 0] = np.nan + 0j  # lands in shell 0
    a = _kernels_py.shell_max(c, g.shell_index, g.k_max)
    b = cy.shell_max(c, g.shell_index, g.k_max)
    assert np.isnan(a[0]) and np.isnan(b[0])
    np.testing.assert_array_equal(a[1:], b[1:])


def test_rhs_identical_across_backends():
    """End-to-end: one full right-hand side through each backend."""
    import subprocess
    import sys

    snippet = (
        "import numpy as np\n"
        "from spectralns.grid import GridSpec\n"
        "from spectralns.dynamics import InitialConditionSpec, PhysicsParams, "
        "make_initial_condition, rhs\n"
        "g = GridSpec(16)\n"
        "u = make_initial_condition(InitialConditionSpec(kind='taylor_green'), g)\n"
        "out = rhs(u, 0.0, PhysicsParams(nu=0.01))\n"
        "import sys; sys.stdout.buffer.write(out.coeffs.tobytes())\n"
    )
    outs = []
    for disable in ("0", "1"):
        import os

        env = dict(os.environ, SPECTRALNS_DISABLE_EXT=disable)
        r = subprocess.run(
            [sys.executable, "-c", snippet], env=env, capture_output=True, check=True
        )
        outs.append(r.stdout)
    assert outs[0] == outs[1]
