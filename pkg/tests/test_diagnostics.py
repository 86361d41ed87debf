import numpy as np
import pytest

from backflow.diagnostics import (
    bound_term1_branch,
    bound_term1_from_couplings,
    correlation_distance,
    correlation_operator,
    distinguishability_bound,
    env_indistinguishability,
    guess_probability,
    mutual_information,
    mutual_information_rate,
    pair_step_series,
    sigma_series,
    trace_distance,
)
from backflow.linalg import (
    Bipartition,
    haar_random_state,
    partial_trace,
    trace_norm,
    von_neumann_entropy,
)
from backflow.model import ChainParams, build_chain_model


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_trace_distance_values():
    z0 = np.diag([1.0, 0.0]).astype(complex)
    z1 = np.diag([0.0, 1.0]).astype(complex)
    assert abs(trace_distance(z0, z1) - 1.0) < 1e-14
    assert trace_distance(z0, z0) == 0.0
    # diagonal qubit states: distance is the population gap
    rng = np.random.default_rng(0)
    for _ in range(10):
        p, q = rng.uniform(size=2)
        d = trace_distance(np.diag([p, 1 - p]), np.diag([q, 1 - q]))
        assert abs(d - abs(p - q)) < 1e-12


def test_trace_distance_contractivity():
    # discarding a subsystem never increases distinguishability
    rng = np.random.default_rng(1)
    for d_sys, d_env in ((2, 3), (3, 4)):
        bp = Bipartition(d_sys, d_env)
        for _ in range(8):
            r1 = random_density(rng, d_sys * d_env)
            r2 = random_density(rng, d_sys * d_env)
            full = trace_distance(r1, r2)
            red = trace_distance(
                partial_trace(r1, bp, "system"), partial_trace(r2, bp, "system")
            )
            assert red <= full + 1e-12


def test_guess_probability():
    assert guess_probability(0.0) == 0.5
    assert guess_probability(1.0) == 1.0
    with pytest.raises(ValueError):
        guess_probability(1.5)


def test_sigma_series_tracks_derivative():
    t = np.linspace(0.0, 2.0, 2001)
    d = np.cos(t)
    sigma = sigma_series(d, t[1] - t[0])
    # interior samples are second order accurate
    assert np.max(np.abs(sigma[1:-1] + np.sin(t[1:-1]))) < 1e-6
    rate = mutual_information_rate(d, t[1] - t[0])
    assert np.array_equal(rate, sigma)


def test_sigma_series_input_checks():
    with pytest.raises(ValueError):
        sigma_series(np.array([1.0, 0.9]), 0.1)
    with pytest.raises(ValueError):
        sigma_series(np.array([1.0, 0.9, 0.8]), 0.0)


def test_correlation_operator_bell():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    bp = Bipartition(2, 2)
    chi = correlation_operator(rho, bp)
    assert np.max(np.abs(partial_trace(chi, bp, "system"))) < 1e-14
    assert np.max(np.abs(partial_trace(chi, bp, "environment"))) < 1e-14
    # projector minus I/4: eigenvalues 3/4 and three times -1/4
    assert abs(trace_norm(chi) - 1.5) < 1e-12


def test_correlation_operator_traceless_everywhere():
    rng = np.random.default_rng(2)
    bp = Bipartition(3, 4)
    for _ in range(6):
        rho = random_density(rng, 12)
        chi = correlation_operator(rho, bp)
        assert np.max(np.abs(partial_trace(chi, bp, "system"))) < 1e-12
        assert np.max(np.abs(partial_trace(chi, bp, "environment"))) < 1e-12


def test_env_indistinguishability_bounds():
    rng = np.random.default_rng(3)
    for _ in range(6):
        r1 = random_density(rng, 4)
        r2 = random_density(rng, 4)
        e = env_indistinguishability(r1, r2)
        assert -1e-12 <= e <= 1.0 + 1e-12
    assert abs(env_indistinguishability(np.eye(4) / 4, np.eye(4) / 4) - 1.0) < 1e-14


def test_mutual_information_bell_and_product():
    bp = Bipartition(2, 2)
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    assert abs(mutual_information(np.outer(bell, bell.conj()), bp) - 2.0) < 1e-12
    prod = np.kron(np.diag([1.0, 0.0]), np.diag([0.5, 0.5])).astype(complex)
    assert abs(mutual_information(prod, bp)) < 1e-12


def test_mutual_information_pure_state_doubling():
    # for a pure joint state the total correlation is twice the local entropy
    rng = np.random.default_rng(4)
    for d_sys, d_env in ((2, 5), (3, 3)):
        bp = Bipartition(d_sys, d_env)
        for _ in range(5):
            psi = haar_random_state(d_sys * d_env, rng)
            rho = np.outer(psi, psi.conj())
            mi = mutual_information(rho, bp)
            s = von_neumann_entropy(partial_trace(rho, bp, "system"))
            assert abs(mi - 2 * s) < 1e-10


def bound_oracle(h, bp, rho1_se, rho2_se):
    """The two bound terms assembled from scratch, full-space algebra."""
    def pt(m, keep):
        return partial_trace(m, bp, keep)

    rho_s = [pt(rho1_se, "system"), pt(rho2_se, "system")]
    rho_e = [pt(rho1_se, "environment"), pt(rho2_se, "environment")]
    delta_env = rho_e[0] - rho_e[1]
    branches = []
    for k in (0, 1):
        x = np.kron(rho_s[k], delta_env)
        branches.append(trace_norm(pt(h @ x - x @ h, "system")))
    chi1 = rho1_se - np.kron(rho_s[0], rho_e[0])
    chi2 = rho2_se - np.kron(rho_s[1], rho_e[1])
    dchi = chi1 - chi2
    term2 = trace_norm(pt(h @ dchi - dchi @ h, "system"))
    return min(branches), term2


def test_distinguishability_bound_matches_oracle():
    rng = np.random.default_rng(5)
    for d_sys, d_env in ((2, 2), (2, 4), (3, 3)):
        bp = Bipartition(d_sys, d_env)
        d = d_sys * d_env
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = (a + a.conj().T) / 2

        class Bare:
            hamiltonian = h
            bipartition = bp
            interaction_terms = None

        for _ in range(5):
            r1 = random_density(rng, d)
            r2 = random_density(rng, d)
            got = distinguishability_bound(Bare, r1, r2)
            t1, t2 = bound_oracle(h, bp, r1, r2)
            assert abs(got.term1 - t1) < 1e-10
            assert abs(got.term2 - t2) < 1e-10
            assert abs(got.total - 0.5 * (t1 + t2)) < 1e-10


def test_coupling_route_equals_direct():
    # the interaction-term route drops environment-local parts; equal results
    model = build_chain_model(ChainParams(n_total=3, j_sys=0.8, b_field=0.2))
    rng = np.random.default_rng(6)
    for _ in range(8):
        rho_s = random_density(rng, 2)
        e1 = random_density(rng, 4)
        e2 = random_density(rng, 4)
        delta = e1 - e2
        direct = bound_term1_branch(model, rho_s, delta)
        via = bound_term1_from_couplings(model, rho_s, delta)
        assert abs(direct - via) < 1e-10


def test_coupling_route_needs_terms():
    bp = Bipartition(2, 2)

    class Bare:
        hamiltonian = np.eye(4, dtype=complex)
        bipartition = bp
        interaction_terms = None

    with pytest.raises(ValueError):
        bound_term1_from_couplings(Bare, np.eye(2) / 2, np.zeros((2, 2)))


def test_pair_step_series_matches_scalar_reference():
    # batched kernel against one-time scalar evaluations, full space
    model = build_chain_model(ChainParams(n_total=3, b_field=0.1))
    h = model.hamiltonian
    bp = model.bipartition
    rng = np.random.default_rng(7)
    n_times = 9
    w, v = np.linalg.eigh(h)
    psi1 = np.kron(np.array([1, 1]) / np.sqrt(2), [1, 0, 0, 0]).astype(complex)
    psi2 = np.kron(np.array([1, -1]) / np.sqrt(2), [1, 0, 0, 0]).astype(complex)
    times = np.linspace(0.0, 3.0, n_times)
    phases = np.exp(-1j * np.outer(times, w))
    s1 = (v @ (phases * (v.conj().T @ psi1)).T).T
    s2 = (v @ (phases * (v.conj().T @ psi2)).T).T

    out = pair_step_series(h, 2, 4, s1, s2, sz_diagonal=None, chunk_elements=64)
    for i in range(n_times):
        r1 = np.outer(s1[i], s1[i].conj())
        r2 = np.outer(s2[i], s2[i].conj())
        r1s = partial_trace(r1, bp, "system")
        r2s = partial_trace(r2, bp, "system")
        r1e = partial_trace(r1, bp, "environment")
        r2e = partial_trace(r2, bp, "environment")
        chi1 = correlation_operator(r1, bp)
        chi2 = correlation_operator(r2, bp)
        bt = distinguishability_bound(model, r1, r2)
        assert abs(out["d_system"][i] - trace_distance(r1s, r2s)) < 1e-10
        assert abs(out["d_env"][i] - trace_distance(r1e, r2e)) < 1e-10
        assert abs(out["e_indist"][i] - env_indistinguishability(r1e, r2e)) < 1e-10
        assert abs(out["x_corr"][i] - correlation_distance(chi1, chi2)) < 1e-10
        assert abs(out["chi1_norm"][i] - trace_norm(chi1)) < 1e-10
        assert abs(out["chi2_norm"][i] - trace_norm(chi2)) < 1e-10
        assert abs(out["bound_term1"][i] - bt.term1) < 1e-10
        assert abs(out["bound_term2"][i] - bt.term2) < 1e-10
        assert abs(out["bound_total"][i] - bt.total) < 1e-10
        assert abs(out["svn_system_1"][i] - von_neumann_entropy(r1s)) < 1e-10
        assert abs(out["svn_system_2"][i] - von_neumann_entropy(r2s)) < 1e-10
        assert abs(out["mutual_info_1"][i] - mutual_information(r1, bp)) < 1e-10
        assert abs(out["mutual_info_2"][i] - mutual_information(r2, bp)) < 1e-10
    assert np.all(np.isnan(out["magnetization_1"]))


def test_pair_step_series_chunking_invariant():
    model = build_chain_model(ChainParams(n_total=3))
    h = model.hamiltonian
    rng = np.random.default_rng(8)
    s1 = np.array([haar_random_state(8, rng) for _ in range(7)])
    s2 = np.array([haar_random_state(8, rng) for _ in range(7)])
    a = pair_step_series(h, 2, 4, s1, s2, chunk_elements=10**9)
    b = pair_step_series(h, 2, 4, s1, s2, chunk_elements=64)
    for key in a:
        ga, gb = a[key], b[key]
        if np.all(np.isnan(ga)) and np.all(np.isnan(gb)):
            continue
        assert np.max(np.abs(ga - gb)) < 1e-12, key
