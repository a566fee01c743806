import math

import numpy as np
import pytest

from decolab import discord as dc, entropies as en, qmat, states as st
from decolab.errors import NotBipartite
from decolab.infotypes import pinch

FAST = dc.BasisOptimizerConfig(restarts=3, seed=0)


def _cq_state(rng):
    u = st.random_unitary(2, rng)
    parts = [st.random_state(dims=(2,), seed=rng).matrix for _ in range(2)]
    m = sum(0.5 * np.kron(np.outer(u[:, j], u[:, j].conj()), parts[j]) for j in range(2))
    return st.DensityOperator(m, (2, 2))


def test_config_validation():
    with pytest.raises(ValueError):
        dc.BasisOptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        dc.BasisOptimizerConfig(tolerance=0.0)


def test_bell_values():
    bell = st.bell_state()
    assert abs(dc.deficit(bell, FAST).value - 1) < 1e-6
    assert abs(dc.original_discord(bell, FAST).value - 1) < 1e-6
    assert abs(dc.geometric(bell, FAST).value - 0.5) < 1e-6
    assert abs(dc.min_entropy_discord(bell, FAST).value - 1) < 1e-6
    assert abs(dc.eg_discord(bell, FAST).value - 0.5) < 1e-6
    assert abs(dc.two_way_discord(bell, en.VN, FAST).value - 1) < 1e-6
    assert abs(dc.two_way_discord(bell, en.MIN, FAST).value - 1) < 1e-6


def test_cq_state_has_zero_one_way_discord(rng):
    rho = _cq_state(rng)
    for fn in (dc.deficit, dc.geometric, dc.original_discord, dc.min_entropy_discord):
        rep = fn(rho, FAST)
        assert abs(rep.value) < 1e-6, rep.measure
        assert rep.is_upper_bound


def test_cc_state_has_zero_two_way_discord(rng):
    ua, ub = st.random_unitary(2, rng), st.random_unitary(2, rng)
    p = rng.dirichlet(np.ones(4))
    m = sum(p[2 * j + k] * np.kron(qmat.proj(ua[:, j]), qmat.proj(ub[:, k])) for j in range(2) for k in range(2))
    rho = st.DensityOperator(m, (2, 2))
    assert abs(dc.two_way_discord(rho, en.VN, FAST).value) < 1e-6
    assert abs(dc.two_way_discord(rho, en.MIN, FAST).value) < 1e-6


def test_deficit_argmin_is_consistent(rng):
    rho = st.random_state(dims=(2, 2), seed=rng)
    rep = dc.deficit(rho, FAST)
    pinched = pinch(rho, rep.argmin_basis)
    assert abs(pinched.entropy() - rho.entropy() - rep.value) < 1e-9
    assert rep.optimizer_diag["route_gap"] < 1e-6


def test_geometric_routes_agree(rng):
    rep = dc.geometric(st.random_state(dims=(2, 3), seed=rng), FAST)
    assert rep.optimizer_diag["route_gap"] < 1e-8


def test_min_entropy_identity(rng):
    rep = dc.min_entropy_discord(st.random_state(dims=(2, 2), seed=rng), FAST)
    assert rep.optimizer_diag["identity_gap"] < 1e-6
    assert abs(rep.optimizer_diag["eg"] - (1 - 2 ** -rep.value)) < 1e-12


def test_qutrit_measures_run(rng):
    rho = st.random_state(dims=(3, 2), seed=rng)
    d = dc.deficit(rho, FAST).value
    g = dc.geometric(rho, FAST).value
    assert 0 <= g <= math.log(2) * d + 1e-7


def test_profile_orderings(rng):
    rho = st.random_state(dims=(2, 2), seed=rng)
    prof = dc.discord_profile(rho, FAST)
    assert list(prof) == ["two_way_vn", "two_way_min", "deficit", "delta_arrow", "geometric", "min_entropy"]
    assert prof["two_way_vn"].value >= prof["deficit"].value - 1e-7
    assert prof["two_way_min"].value >= prof["min_entropy"].value - 1e-7
    assert prof["deficit"].value >= prof["delta_arrow"].value - 1e-7
    assert math.log(2) * prof["deficit"].value >= prof["geometric"].value - 1e-7


def test_profile_handles_eg_and_unknown(rng):
    rho = st.random_state(dims=(2, 2), seed=rng)
    prof = dc.discord_profile(rho, FAST, names=("eg", "deficit"))
    d_min = -math.log2(1 - prof["eg"].value)
    assert abs(prof["eg"].optimizer_diag["identity_gap"]) < 1e-6
    assert 0 <= prof["eg"].value <= 0.5 + 1e-9
    assert d_min <= prof["deficit"].value + 1e-7
    with pytest.raises(ValueError):
        dc.discord_profile(rho, FAST, names=("nope",))


def test_measure_dispatch(rng):
    rho = st.random_state(dims=(2, 2), seed=rng)
    assert dc.measure(rho, "deficit", FAST).measure == "deficit"
    assert dc.measure(rho, "two_way_min", FAST).measure == "two_way_min"
    with pytest.raises(ValueError):
        dc.measure(rho, "quantumness", FAST)
    with pytest.raises(ValueError):
        dc.two_way_discord(rho, en.QUAD, FAST)


def test_rejects_non_bipartite(rng):
    with pytest.raises(NotBipartite):
        dc.deficit(st.random_state(dims=(2, 2, 2), seed=rng), FAST)


def test_complementarity_on_bell():
    cfg = dc.BasisOptimizerConfig(restarts=1, seed=0)
    rep = dc.complementarity_discord(st.bell_state(), en.QUAD, samples=50, cfg=cfg)
    # every W is perfectly readable from B, so C_Q = (N - 1) Tr(rho_B^2) = 1/2
    assert abs(rep.value - 0.5) < 1e-6


def test_min_over_bases_black_box(rng):
    rho = st.random_state(dims=(2, 2), seed=rng)

    def objective(z):
        return pinch(rho, z).entropy() - rho.entropy()

    val, z, diag = dc.min_over_bases(objective, 2, dc.BasisOptimizerConfig(restarts=2))
    assert abs(val - dc.deficit(rho, FAST).value) < 1e-5
    assert diag["starts"] == 3


def _fd_gap(obj, d, rng, h):
    u0 = st.random_unitary(d, rng)
    m = d * d - 1

    def f(theta):
        return obj.value(u0 @ dc._expi(theta, d)[0])

    theta = 0.1 * rng.standard_normal(m)
    e, w, v = dc._expi(theta, d)
    _, k = obj.evaluate((u0 @ e)[None])
    grad = dc._expi_grad(w, v, u0, k[0], d)
    fd = np.array([(f(theta + h * ei) - f(theta - h * ei)) / (2 * h) for ei in np.eye(m)])
    return float(np.max(np.abs(grad - fd)))


def test_block_gradient_matches_finite_differences(rng):
    prep = dc._prepare(st.random_state(dims=(2, 2), seed=rng))
    for kind in (dc.VN, dc.QUAD, dc.MIN):
        obj = dc.BlockObjective((dc.BlockTerm(prep.r_ac, kind),))
        assert _fd_gap(obj, 2, rng, 1e-6) < 1e-6, kind
    prep = dc._prepare(st.random_state(dims=(3, 2), seed=rng))
    for kind in (dc.VN, dc.QUAD):
        obj = dc.BlockObjective((dc.BlockTerm(prep.r_ac, kind),))
        assert _fd_gap(obj, 3, rng, 1e-6) < 1e-6, kind


def test_sdp_gradient_matches_finite_differences(rng):
    # three outcomes go through the interior-point solver, whose values carry
    # a ~1e-8 duality gap; the step is chosen so that noise stays below 1e-5
    prep = dc._prepare(st.random_state(dims=(3, 2), seed=rng))
    obj = dc.BlockObjective((dc.BlockTerm(prep.r_ac, dc.MIN),))
    assert _fd_gap(obj, 3, rng, 1e-3) < 1e-4


def test_seeding_never_hurts(rng):
    rho = st.random_state(dims=(2, 2), seed=rng)
    good = dc.deficit(rho, dc.BasisOptimizerConfig(restarts=10))
    seeded = dc.deficit(rho, dc.BasisOptimizerConfig(restarts=1, seed=5), seeds=[good.argmin_basis.vectors()])
    assert seeded.value <= good.value + 1e-9


def test_report_json():
    rep = dc.deficit(st.bell_state(), FAST)
    d = rep.to_dict()
    assert d["measure"] == "deficit" and d["is_upper_bound"] is True
    assert isinstance(d["diagnostics"]["starts"], int)
    assert len(d["basis"]["projectors"]) == 2
