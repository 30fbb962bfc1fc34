"""Fidelity metric checks against hand-computable channels."""

import math

import numpy as np
import pytest

from holosim.engine import DensityMatrix, NoiseSpec, collapse_operators, process_matrix, propagate
from holosim.hamiltonians import TermSet, TimeDependentHamiltonian, build_h_effective_1q
from holosim.metrics import (
    CurvePoint,
    FidelityCurve,
    average_unitary_fidelity,
    gate_fidelity_1q,
    gate_fidelity_2q,
    leakage,
    product_grid,
    rotation_grid,
    state_fidelity,
)
from holosim.operators import matrix_exp


def zero_ham(dim):
    return TimeDependentHamiltonian.from_terms(TermSet.from_entries(dim, []))


def embed_unitary(u_small, rows, dim):
    """Identity except for u_small on the given flat indices."""
    u = np.eye(dim, dtype=complex)
    u[np.ix_(rows, rows)] = u_small
    return u


class TestStateFidelity:
    def test_pure_match(self):
        psi = np.array([1.0, 1.0j, 0.0]) / math.sqrt(2.0)
        rho = np.outer(psi, psi.conj())
        assert state_fidelity(rho, psi) == pytest.approx(1.0, abs=1e-14)

    def test_orthogonal(self):
        psi = np.array([1.0, 0.0], dtype=complex)
        phi = np.array([0.0, 1.0], dtype=complex)
        assert state_fidelity(np.outer(phi, phi.conj()), psi) == pytest.approx(0.0, abs=1e-14)

    def test_maximally_mixed(self):
        rho = np.eye(9, dtype=complex) / 9.0
        psi = np.zeros(9, dtype=complex)
        psi[0] = 1.0
        assert state_fidelity(rho, psi) == pytest.approx(1.0 / 9.0, abs=1e-14)

    def test_accepts_density_matrix_type(self):
        psi = np.array([0.0, 1.0, 0.0], dtype=complex)
        dm = DensityMatrix.from_state(psi)
        assert state_fidelity(dm, psi) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            state_fidelity(np.eye(3, dtype=complex) / 3.0, np.array([1.0, 0.0]))

    def test_unnormalized_target(self):
        with pytest.raises(ValueError, match="norm"):
            state_fidelity(np.eye(2, dtype=complex) / 2.0, np.array([1.0, 1.0]))


class TestLeakage:
    def test_computational_state(self):
        psi = np.array([1.0, 0.0, 0.0], dtype=complex)
        p = np.diag([1.0, 1.0, 0.0]).astype(complex)
        assert leakage(np.outer(psi, psi.conj()), p) == pytest.approx(0.0, abs=1e-14)

    def test_fully_leaked(self):
        rho = np.diag([0.0, 0.0, 1.0]).astype(complex)
        p = np.diag([1.0, 1.0, 0.0]).astype(complex)
        assert leakage(rho, p) == pytest.approx(1.0, abs=1e-14)

    def test_partial(self):
        rho = np.diag([0.25, 0.35, 0.4]).astype(complex)
        p = np.diag([1.0, 1.0, 0.0]).astype(complex)
        assert leakage(rho, p) == pytest.approx(0.4, abs=1e-14)

    def test_rejects_non_projector(self):
        with pytest.raises(ValueError, match="idempotent"):
            leakage(np.eye(2, dtype=complex) / 2.0, 0.5 * np.eye(2, dtype=complex))


class TestGrids:
    def test_rotation_grid_includes_endpoints(self):
        t = rotation_grid(1001)
        assert t.size == 1001
        assert t[0] == 0.0
        assert t[-1] == pytest.approx(2.0 * math.pi)
        assert t[1] == pytest.approx(2.0 * math.pi / 1000.0)

    def test_product_grid_half_open(self):
        t = product_grid(100)
        assert t.size == 100
        assert t[0] == 0.0
        assert t[-1] == pytest.approx(2.0 * math.pi * 99.0 / 100.0)


class TestGateFidelity1Q:
    @staticmethod
    def basis_9():
        b = np.zeros((2, 9), dtype=complex)
        b[0, 0] = b[1, 3] = 1.0
        return b

    def test_identity_channel(self):
        assert gate_fidelity_1q(lambda rho: rho, self.basis_9(), np.eye(2)) == pytest.approx(1.0, abs=1e-12)

    def test_exact_gate_channel(self):
        u_p = np.diag([1.0, np.exp(1j * math.pi / 4.0)])
        u_full = embed_unitary(u_p, (0, 3), 9)
        apply = lambda rho: u_full @ rho @ u_full.conj().T
        assert gate_fidelity_1q(apply, self.basis_9(), u_p) == pytest.approx(1.0, abs=1e-12)

    def test_global_phase_invariance(self):
        u_p = np.diag([1.0, np.exp(1j * math.pi / 4.0)])
        u_full = embed_unitary(u_p, (0, 3), 9)
        apply = lambda rho: u_full @ rho @ u_full.conj().T
        f1 = gate_fidelity_1q(apply, self.basis_9(), u_p, n=41)
        f2 = gate_fidelity_1q(apply, self.basis_9(), np.exp(1j * 0.7) * u_p, n=41)
        assert f1 == pytest.approx(f2, abs=1e-14)

    def test_wrong_gate_average(self):
        # identity channel scored against a Z flip: |<psi|psi_f>|^2 =
        # (cos^2 t - sin^2 t)^2 = cos^2(2t).  Over 400 half-open points the
        # sum is exactly 200; the duplicated endpoint adds one more unit,
        # so the inclusive-grid mean is 201/401.
        z = np.diag([1.0, -1.0]).astype(complex)
        f = gate_fidelity_1q(lambda rho: rho, self.basis_9(), z, n=401)
        assert f == pytest.approx(201.0 / 401.0, abs=1e-12)

    def test_out_basis_relocation(self):
        # channel moves the logical qubit from slot (0,3) to slot (0,1)
        swap = np.eye(9, dtype=complex)
        swap[[1, 3]] = swap[[3, 1]]
        apply = lambda rho: swap @ rho @ swap.conj().T
        out_b = np.zeros((2, 9), dtype=complex)
        out_b[0, 0] = out_b[1, 1] = 1.0
        f = gate_fidelity_1q(apply, self.basis_9(), np.eye(2), out_basis=out_b, n=101)
        assert f == pytest.approx(1.0, abs=1e-12)

    def test_per_state_results_match_channel(self, pair_model, op_point):
        h_eff = build_h_effective_1q(op_point.gp, op_point.eps_drive, 0.0)
        ham = TimeDependentHamiltonian.from_terms(TermSet.from_static(h_eff))
        noise = collapse_operators(pair_model, NoiseSpec(2.0 * math.pi * 5e3, 2.0 * math.pi * 5e3))
        t1 = 30e-9
        basis = self.basis_9()
        chan = process_matrix(ham, noise, basis, 0.0, t1)
        n = 11
        t = rotation_grid(n)
        results = []
        for theta in t:
            psi = math.cos(theta) * basis[0] + math.sin(theta) * basis[1]
            rho0 = DensityMatrix(np.outer(psi, psi.conj()))
            results.append(propagate(ham, noise, rho0, 0.0, t1))
        ideal = np.eye(2)
        f_direct = gate_fidelity_1q(results, basis, ideal, n=n)
        f_channel = gate_fidelity_1q(chan.apply, basis, ideal, n=n)
        assert abs(f_direct - f_channel) <= 1e-9

    def test_result_count_mismatch(self):
        with pytest.raises(ValueError, match="results"):
            gate_fidelity_1q([np.eye(9) / 9.0] * 3, self.basis_9(), np.eye(2), n=5)

    def test_basis_validation(self):
        bad = np.ones((2, 9), dtype=complex)
        with pytest.raises(ValueError, match="orthonormal"):
            gate_fidelity_1q(lambda rho: rho, bad, np.eye(2))


class TestGateFidelity2Q:
    @staticmethod
    def basis_27():
        b = np.zeros((4, 27), dtype=complex)
        for row, idx in enumerate((0, 1, 9, 10)):
            b[row, idx] = 1.0
        return b

    def test_identity_channel(self):
        f = gate_fidelity_2q(lambda rho: rho, self.basis_27(), np.eye(4), n=10)
        assert f == pytest.approx(1.0, abs=1e-12)

    def test_exact_swap_like(self):
        v_s = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex)
        u_full = embed_unitary(v_s, (0, 1, 9, 10), 27)
        apply = lambda rho: u_full @ rho @ u_full.conj().T
        f = gate_fidelity_2q(apply, self.basis_27(), v_s, n=20)
        assert f == pytest.approx(1.0, abs=1e-12)

    def test_pi_shift_symmetry(self):
        # shifting both product angles by pi flips the state sign only, so
        # shifting the half-open grid start must not change the average
        v_s = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex)
        rng = np.random.default_rng(47)
        herm = rng.normal(size=(27, 27)) + 1j * rng.normal(size=(27, 27))
        herm = herm + herm.conj().T
        u_rand = matrix_exp(herm, 1e-2)
        apply = lambda rho: u_rand @ rho @ u_rand.conj().T
        basis = self.basis_27()
        n = 8  # even: grid contains t and t+pi pairs
        f = gate_fidelity_2q(apply, basis, v_s, n=n)
        t = product_grid(n)
        coeffs = np.stack([np.cos(t + math.pi), np.sin(t + math.pi)], axis=1)
        fids = []
        for c1 in coeffs:
            for c2 in coeffs:
                quad = np.array([c1[0] * c2[0], c1[0] * c2[1], c1[1] * c2[0], c1[1] * c2[1]])
                psi_in = quad @ basis
                psi_out = (v_s @ quad) @ basis
                rho = apply(np.outer(psi_in, psi_in.conj()))
                fids.append(np.vdot(psi_out, rho @ psi_out).real)
        assert f == pytest.approx(float(np.mean(fids)), abs=1e-12)


class TestAverageUnitaryFidelity:
    def test_identical(self):
        rng = np.random.default_rng(53)
        h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u = matrix_exp(h + h.conj().T, 0.3)
        assert average_unitary_fidelity(u, u) == pytest.approx(1.0, abs=1e-12)

    def test_global_phase(self):
        u = np.diag([1.0, 1.0j])
        assert average_unitary_fidelity(np.exp(1j * 1.1) * u, u) == pytest.approx(1.0, abs=1e-12)

    def test_leaky_block(self):
        m = np.diag([1.0, 1.0, 1.0, 0.0]).astype(complex)
        # Tr(M M^+) = 3, |Tr M|^2 = 9 -> (3 + 9) / 20
        assert average_unitary_fidelity(m, np.eye(4)) == pytest.approx(0.6, abs=1e-12)

    def test_orthogonal_gate(self):
        u = np.eye(2, dtype=complex)
        v = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        # M = X: Tr(M M^+) = 2, Tr M = 0 -> 2/6
        assert average_unitary_fidelity(v, u) == pytest.approx(1.0 / 3.0, abs=1e-12)


class TestFidelityCurve:
    @staticmethod
    def points():
        return (
            CurvePoint(0.0, 1.0, 1.0, 0.0),
            CurvePoint(2.0 * math.pi * 5e3, 0.9964, 0.9963, 0.003),
            CurvePoint(2.0 * math.pi * 10e3, 0.9929, 0.9927, 0.004),
        )

    def test_csv_format(self):
        curve = FidelityCurve(self.points(), {"scenario": "phase_gate", "beta": 1.6})
        text = curve.to_csv()
        lines = text.splitlines()
        assert lines[0] == "# params: scenario=phase_gate beta=1.6"
        assert lines[1] == "kappa_over_2pi_kHz,state_fidelity,gate_fidelity,leakage"
        assert lines[2] == "0.0,1.0,1.0,0.0"
        assert lines[3].startswith("5.0,0.9964,0.9963,")
        assert text.endswith("\n")

    def test_deterministic(self):
        curve = FidelityCurve(self.points(), {"a": 0.1})
        assert curve.to_csv() == curve.to_csv()

    def test_rejects_descending_kappa(self):
        pts = (CurvePoint(1.0, 1.0, 1.0, 0.0), CurvePoint(0.5, 1.0, 1.0, 0.0))
        with pytest.raises(ValueError, match="ascending"):
            FidelityCurve(pts, {})

    def test_rejects_out_of_range_fidelity(self):
        with pytest.raises(ValueError, match="fidelity"):
            FidelityCurve((CurvePoint(0.0, 1.1, 1.0, 0.0),), {})

    def test_allows_tolerance_slack(self):
        FidelityCurve((CurvePoint(0.0, 1.0 + 0.5e-9, 1.0, 0.0),), {})
