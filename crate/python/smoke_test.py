"""Smoke test for the teukolsky_py extension module."""

import math

import teukolsky_py as tk


def main():
    bh = tk.Kerr(0.6)
    r0, r1 = bh.horizons()
    assert abs(r1 - (1 + math.sqrt(1 - 0.36))) < 1e-12
    assert abs(bh.r_of_u(bh.u_of_r(5.0)) - 5.0) < 1e-9

    # Ω_a = 0, k = s: eigenvalues ℓ(ℓ+1) − s²
    lam = tk.angular_eigenvalues(2.0, 2.0, 0j, n_max=3)
    expected = [l * (l + 1) - 4 for l in (2, 3, 4, 5)]
    assert all(abs(a - b) < 1e-9 for a, b in zip(lam, expected)), lam

    lam0 = tk.angular_eigenvalues(0.0, 0.0, complex(-0.6 * 0.5, 0.0), n_max=0)[0]
    sol = tk.jost(bh, 0.0, 0.0, 0.5 - 0.1j, lam0, [-5.0, 0.0, 5.0])
    assert sol["wronskian_spread"] < 1e-6, sol["wronskian_spread"]

    field = tk.FieldProblem(tk.Kerr(0.0), 0.0, 0.0, -12.0, 12.0, 0.2, angular_size=6)
    bump = {"center": 0.0, "width": 1.0, "amplitude": [1.0, 0.0], "angular": [1.0]}
    (t, phi), = field.evolve(bump, [-1.0], {"dt": 0.02, "sponge_width": 3.0})
    assert t == -1.0 and len(phi) == len(field.u) and len(phi[0]) == len(field.theta)
    peak = max(abs(z) for row in phi for z in row)
    assert 0.0 < peak < 1.0, peak

    spec = field.propagate(bump, [-1.0], {"omega_max": 8.0, "n_max": 1, "tail_budget": 1.0})
    diff = max(abs(a - b) for ra, rb in zip(spec[0][1], phi) for a, b in zip(ra, rb))
    assert diff < 0.05 * peak, diff

    try:
        tk.Kerr(1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("extreme Kerr accepted")
    print(f"teukolsky_py {tk.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
