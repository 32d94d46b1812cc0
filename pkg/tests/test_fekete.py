import numpy as np
import pytest

from simapprox.errors import InvalidArgument
from simapprox.fekete import equilibrium_diagnostic, fekete_points, log_energy, spacing_diagnostic
from simapprox.geometry import builtin_domain

SEG = builtin_domain("segment")
DISK = builtin_domain("disk")


def test_log_energy():
    assert log_energy([-1, 1]) == pytest.approx(np.log(2))
    assert log_energy([0, 1, 1]) == -np.inf


def test_segment_two_points():
    S = fekete_points(SEG, 2)
    assert np.allclose(S.points, [-1, 1])


def _brute_force_triple(grid):
    a, b, c = np.meshgrid(grid, grid, grid, indexing="ij")
    v = np.abs((a - b) * (a - c) * (b - c))
    i = np.unravel_index(np.argmax(v), v.shape)
    return np.sort([grid[i[0]], grid[i[1]], grid[i[2]]])


def test_segment_three_points_against_brute_force():
    # maximize |(a-b)(a-c)(b-c)| on a 1e-2 grid, then on a 1e-3 grid around the optimum
    coarse = _brute_force_triple(np.linspace(-1, 1, 201))
    fine = np.unique(np.clip(np.concatenate([x + np.arange(-20, 21) * 1e-3 for x in coarse]), -1, 1))
    best = _brute_force_triple(fine)
    S = fekete_points(SEG, 3)
    assert np.allclose(np.sort(S.points.real), best, atol=1e-3)
    assert S.energy == pytest.approx(log_energy(best), abs=1e-5)


def test_circle_five_points_are_rotated_roots():
    S = fekete_points(DISK, 5)
    th = np.sort(np.mod(np.angle(S.points), 2 * np.pi))
    gaps = np.diff(np.r_[th, th[0] + 2 * np.pi])
    assert np.allclose(gaps, 2 * np.pi / 5, atol=1e-4)
    # brute force over one rotation angle: every rotation of the roots has the same energy
    roots = np.exp(2j * np.pi * np.arange(5) / 5)
    assert S.energy == pytest.approx(log_energy(roots), abs=1e-8)


def test_energy_history_monotone_and_points_distinct():
    S = fekete_points(builtin_domain("lshape"), 12)
    h = np.array(S.history)
    assert np.all(np.diff(h) >= -1e-9 * np.abs(h[:-1]).clip(1))
    d = np.abs(S.points[:, None] - S.points[None, :])
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0


@pytest.mark.parametrize("name,N", [("square", 5), ("segment", 4), ("disk", 6)])
def test_restart_stability(name, N):
    S = fekete_points(builtin_domain(name), N, restarts=2, seed=3)
    assert S.method == "exact-small"
    assert all(abs(e - S.energy) <= 1e-6 for e in S.restart_energies)


def test_disk_roots_spacing_and_discrepancy(maps):
    N = 12
    z = np.exp(2j * np.pi * np.arange(N) / N)
    tab = spacing_diagnostic(maps["disk"], z)
    assert np.allclose(tab.gaps, 2 * np.pi / N)
    assert equilibrium_diagnostic(maps["disk"], z) <= 1 / N + 1e-12


def test_square_spacing_and_discrepancy(maps):
    E = builtin_domain("square")
    assert spacing_diagnostic(maps["square"], fekete_points(E, 16)).ratio <= 3
    assert equilibrium_diagnostic(maps["square"], fekete_points(E, 32)) <= 0.1


def test_segment_spacing_and_arcsine_law(maps):
    S8 = fekete_points(SEG, 8)
    tab = spacing_diagnostic(maps["segment"], S8)
    # recorded constants: N * gap stays within [c1, c2]
    assert 0.5 <= tab.scaled_min <= tab.scaled_max <= 8
    assert equilibrium_diagnostic(maps["segment"], fekete_points(SEG, 32)) <= 0.1


def test_invalid_arguments(maps):
    with pytest.raises(InvalidArgument):
        fekete_points(DISK, 1)
    with pytest.raises(InvalidArgument):
        fekete_points(DISK, 4, grid=16)
    with pytest.raises(InvalidArgument):
        spacing_diagnostic(maps["disk"], np.array([1.0, 0.5]))
